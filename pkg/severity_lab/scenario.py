"""
Scenario files: flat `key = value` lines, `#` comments, UTF-8.

    beta = 1.0
    theta = 0.35      # probability of the critical course
    gamma_i = 0.6
    gamma_c = 0.8
    gamma_h = 0.4
    eps = 0.01
    experiment = simulate
"""
import dataclasses
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np

from .constants import DEFAULT_ENTRY_SEED, DEFAULT_INITIAL_INFECTED, FIGURE_SCENARIOS
from .econ import step_grid
from .exceptions import InvalidParameters, ScenarioError
from .model import ModelParams
from .sim import IntegratorConfig

EXPERIMENTS = ("simulate", "analyze", "entry-exit", "worst-theta", "bifurcation", "sweep")

# theta is ignored by experiments that scan it
THETA_FREE_EXPERIMENTS = ("worst-theta", "sweep")
PLACEHOLDER_THETA = 0.5

PARAMETER_KEYS = ("beta", "theta", "gamma_i", "gamma_c", "gamma_h", "eps")
INTEGRATOR_KEYS = ("rtol", "atol", "h_init", "h_max", "t_max")


def parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_experiment(value: str) -> str:
    if value not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {value!r}, expected one of {', '.join(EXPERIMENTS)}")
    return value


def _split_grid(value: str):
    parts = value.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected a:b:x, got {value!r}")
    return parts


def parse_step_grid(value: str) -> np.ndarray:
    """`a:b:step`, e.g. 0:1:0.02 for 51 points."""
    start, stop, step = (float(part) for part in _split_grid(value))
    try:
        return step_grid(start, stop, step)
    except InvalidParameters as exc:
        raise ValueError(str(exc)) from exc


def parse_count_grid(value: str) -> np.ndarray:
    """`a:b:n`, n evenly spaced points including both ends."""
    start, stop, count = _split_grid(value)
    count = int(count)
    if count < 1 or float(stop) < float(start):
        raise ValueError(f"bad grid {value!r}")
    return np.linspace(float(start), float(stop), count)


def parse_float_list(value: str) -> Tuple[float, ...]:
    """Comma-separated numbers, e.g. `0.2, 0.5, 1`."""
    parts = [part.strip() for part in value.split(",")]
    if not all(parts):
        raise ValueError(f"expected comma-separated numbers, got {value!r}")
    return tuple(float(part) for part in parts)


CONVERTERS: Dict[str, Callable[[str], Any]] = {
    "beta": float,
    "theta": float,
    "gamma_i": float,
    "gamma_c": float,
    "gamma_h": float,
    "eps": float,
    "allow_unordered": parse_bool,
    "initial_total_infected": float,
    "rtol": float,
    "atol": float,
    "h_init": float,
    "h_max": float,
    "t_max": float,
    "experiment": parse_experiment,
    "theta_grid": parse_step_grid,
    "curve_thetas": parse_float_list,
    "entry_grid": parse_count_grid,
    "beta_grid": parse_count_grid,
    "k": float,
    "t0_fast": float,
    "h0": float,
    "workers": int,
    "out": str,
}


@dataclasses.dataclass(frozen=True)
class Scenario:
    params: ModelParams
    experiment: str = "simulate"
    initial_total_infected: float = DEFAULT_INITIAL_INFECTED
    integrator: Dict[str, float] = dataclasses.field(default_factory=dict)
    theta_grid: Optional[np.ndarray] = None
    # severities whose K(t) is written out by worst-theta
    curve_thetas: Tuple[float, ...] = ()
    entry_grid: Optional[np.ndarray] = None
    beta_grid: Optional[np.ndarray] = None
    k: Optional[float] = None
    t0_fast: float = DEFAULT_ENTRY_SEED
    h0: float = DEFAULT_ENTRY_SEED
    workers: Optional[int] = None
    out: Optional[str] = None
    source: str = "<string>"

    def integrator_config(self, **overrides) -> IntegratorConfig:
        """Settings, then the scenario's integrator keys, then `overrides` (command-line flags)."""
        values = dict(self.integrator)
        values.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return IntegratorConfig.from_settings(**values)
        except InvalidParameters as exc:
            raise ScenarioError(f"{self.source}: {exc}") from exc

    @classmethod
    def from_values(cls, values: Dict[str, Any], source: str = "<string>") -> "Scenario":
        experiment = values.get("experiment", "simulate")
        required = [key for key in PARAMETER_KEYS if key != "theta" or experiment not in THETA_FREE_EXPERIMENTS]
        missing = [key for key in required if key not in values]
        if missing:
            raise ScenarioError(f"{source}: missing required key(s): {', '.join(missing)}")

        try:
            params = ModelParams(
                beta=values["beta"],
                theta=values.get("theta", PLACEHOLDER_THETA),
                gamma_i=values["gamma_i"],
                gamma_c=values["gamma_c"],
                gamma_h=values["gamma_h"],
                eps=values["eps"],
                allow_unordered=values.get("allow_unordered", False),
            )
        except InvalidParameters as exc:
            raise ScenarioError(f"{source}: {exc}") from exc
        outside = [theta for theta in values.get("curve_thetas", ()) if not 0 <= theta <= 1]
        if outside:
            raise ScenarioError(f"{source}: curve_thetas must lie in [0, 1], got {outside}")

        options = {
            key: values[key]
            for key in ("experiment", "initial_total_infected", "theta_grid", "curve_thetas", "entry_grid",
                        "beta_grid", "k", "t0_fast", "h0", "workers", "out")
            if key in values
        }
        integrator = {key: values[key] for key in INTEGRATOR_KEYS if key in values}
        return cls(params=params, integrator=integrator, source=source, **options)


def _convert(key: str, raw: str, where: str) -> Any:
    if key not in CONVERTERS:
        raise ScenarioError(f"{where}: unknown key {key!r}")
    try:
        return CONVERTERS[key](raw)
    except ValueError as exc:
        raise ScenarioError(f"{where}: bad value for {key!r}: {exc}") from exc


def parse_scenario(text: str, source: str = "<string>", experiment: Optional[str] = None) -> Scenario:
    """`experiment`, when given, replaces the file's own `experiment` key."""
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        where = f"{source}:{number}"
        if "=" not in content:
            raise ScenarioError(f"{where}: expected `key = value`, got {content!r}")

        key, raw = (part.strip() for part in content.split("=", 1))
        if key in values:
            raise ScenarioError(f"{where}: duplicate key {key!r}")
        values[key] = _convert(key, raw, where)

    if experiment is not None:
        values["experiment"] = _convert("experiment", experiment, source)
    return Scenario.from_values(values, source=source)


def load_scenario(path: Union[str, Path], experiment: Optional[str] = None) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"Cannot read scenario {path}: {exc}") from exc
    return parse_scenario(text, source=str(path), experiment=experiment)


def from_figure(figure_id: str) -> Scenario:
    """
    Built-in scenario behind `sirslab reproduce <figure_id>`.

    -----
    Usage Examples:
        from_figure("fig6b").experiment    --->    "worst-theta"
    """
    if figure_id not in FIGURE_SCENARIOS:
        raise ScenarioError(f"Unknown figure {figure_id!r}, expected one of {', '.join(FIGURE_SCENARIOS)}")
    values = {
        key: _convert(key, str(value), figure_id)
        for key, value in FIGURE_SCENARIOS[figure_id].items()
    }
    return Scenario.from_values(values, source=figure_id)
