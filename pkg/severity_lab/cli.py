"""
`sirslab` console script: the `sirslab` management command without a host Django project.
"""
import sys
from typing import List, NoReturn, Optional

import django

from .conf import configure
from .management.commands.sirslab import Command


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand and return its exit code: 0 on success, 2 for scenario errors, 3 for numerical failures.

    -----
    Usage Examples:
        run(["reproduce", "fig7", "--out", "/tmp/fig7"])    --->    0
        run(["simulate", "--scenario", "typo.txt"])          --->    2
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    configure()
    django.setup()
    try:
        Command().run_from_argv(["sirslab", "sirslab", *argv])
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return 0


def main() -> NoReturn:
    sys.exit(run())
