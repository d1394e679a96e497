from typing import Any

from django.conf import settings

from . import constants

DEFAULTS = {
    "RTOL": constants.DEFAULT_RTOL,
    "ATOL": constants.DEFAULT_ATOL,
    "T_MAX": constants.DEFAULT_T_MAX,
    "COST_RATE": constants.DEFAULT_COST_RATE,
    "WORKERS": constants.DEFAULT_WORKERS,
    "OUTPUT_DIR": None,
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "severity_lab": {"handlers": ["console"], "level": "WARNING", "propagate": False},
    },
}


def lab_setting(name: str) -> Any:
    """
    Read one key of the `SEVERITY_LAB` setting.
    Falls back to the package defaults when Django settings are not configured, so the numerical modules
        can be used as a plain library.
    """
    if name not in DEFAULTS:
        raise KeyError(f"Unknown severity lab setting: {name}")

    if not settings.configured:
        return DEFAULTS[name]

    return getattr(settings, "SEVERITY_LAB", {}).get(name, DEFAULTS[name])


def configure(**overrides) -> None:
    """
    Configure a minimal settings object for standalone use (manage.py and the console script).
    Does nothing if settings were already configured by a host project.
    """
    if settings.configured:
        return

    settings.configure(
        DEBUG=False,
        INSTALLED_APPS=("severity_lab",),
        SEVERITY_LAB=dict(DEFAULTS, **overrides),
        LOGGING=LOGGING,
        TIME_ZONE="UTC",
        USE_TZ=True,
    )
