"""
Severity against hospitalization cost.

At the simplified endemic equilibrium the hospitalized fraction is proportional to
f(theta) = theta (1 - 1/R0(theta)), so the severity that fills hospitals most is the argmax of f; the four
regimes of beta against gamma_i, gamma_c and gamma_c**2 / gamma_i decide where that argmax sits. The
empirical side integrates the model for every theta on a grid and compares the cost K at the end of the
first wave.
"""
import dataclasses
import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np

from .analysis import theta_star
from .conf import lab_setting
from .constants import DEFAULT_INITIAL_INFECTED, DEFAULT_THETA_STEP, NEAR_THRESHOLD_MARGIN, PRACTICAL_MATCH_GAP
from .exceptions import InvalidParameters, NotApplicable, NumericalError
from .model import ModelParams, make_initial_conditions
from .sim import IntegratorConfig, cost_at, detect_wave_end, integrate, wave_end_event

logger = logging.getLogger(__name__)


def step_grid(start: float, stop: float, step: float) -> np.ndarray:
    """start, start + step, ... up to stop (included when it falls on the grid)."""
    if step <= 0 or stop < start:
        raise InvalidParameters(f"Bad grid {start}:{stop}:{step}.")
    count = int(np.floor((stop - start) / step + 1e-9))
    return np.linspace(start, start + count * step, count + 1)


def default_theta_grid() -> np.ndarray:
    return step_grid(0.0, 1.0, DEFAULT_THETA_STEP)


class EpidemicCase(enum.Enum):
    FAST = "Case1_FastEpidemic"
    MODERATE = "Case2_ModerateEpidemic"
    SLOW = "Case3_SlowEpidemic"
    NO_EPIDEMIC = "Case4_NoEpidemic"


def classify_case(params: ModelParams) -> EpidemicCase:
    """Depends on beta and the recovery rates only; params.theta is ignored."""
    beta, gamma_i, gamma_c = params.beta, params.gamma_i, params.gamma_c

    # R0 does not depend on theta, or grows with it: f is increasing wherever there is an epidemic.
    if gamma_i >= gamma_c:
        return EpidemicCase.FAST if beta > gamma_c else EpidemicCase.NO_EPIDEMIC

    if beta > gamma_c ** 2 / gamma_i:
        return EpidemicCase.FAST
    if beta >= gamma_c:
        return EpidemicCase.MODERATE
    if beta > gamma_i:
        return EpidemicCase.SLOW
    return EpidemicCase.NO_EPIDEMIC


def theta_tilde(params: ModelParams) -> Optional[float]:
    case = classify_case(params)
    if case is EpidemicCase.FAST:
        return 1.0
    if case is EpidemicCase.NO_EPIDEMIC:
        return None
    gamma_i, gamma_c = params.gamma_i, params.gamma_c
    return float(gamma_c / (gamma_c - gamma_i) * (1 - np.sqrt(gamma_i / params.beta)))


def f_theta(params: ModelParams, theta: float) -> float:
    """theta (1 - 1/R0(theta)); zero where R0(theta) <= 1."""
    return float(f_curve(params, [theta])[0])


def f_curve(params: ModelParams, thetas: Sequence[float]) -> np.ndarray:
    thetas = np.asarray(thetas, dtype=float)
    r = params.beta * ((1 - thetas) / params.gamma_i + thetas / params.gamma_c)
    return np.where(r > 1, thetas * (1 - 1 / r), 0.0)


class SweepStatus(enum.Enum):
    OK = "ok"
    NO_EPIDEMIC = "no-epidemic"
    NEAR_THRESHOLD = "near-threshold"
    NO_WAVE_END = "no-wave-end"
    DEGENERATE_THETA = "degenerate-theta"


@dataclasses.dataclass(frozen=True)
class SweepRow:
    theta: float
    r0: float
    t_f: Optional[float]
    k_tf: Optional[float]
    status: str

    @property
    def ok(self) -> bool:
        return self.status == SweepStatus.OK.value


@dataclasses.dataclass(frozen=True)
class EmpiricalSweep:
    rows: Tuple[SweepRow, ...]
    k: float
    total_infected: float
    theta_argmax: Optional[float] = None
    k_argmax: Optional[float] = None
    theta_tilde: Optional[float] = None
    k_tilde: Optional[float] = None

    @property
    def resolution(self) -> Optional[float]:
        thetas = [row.theta for row in self.rows]
        return float(np.min(np.diff(thetas))) if len(thetas) > 1 else None

    @property
    def thetas(self) -> np.ndarray:
        return np.array([row.theta for row in self.rows])

    @property
    def costs(self) -> np.ndarray:
        return np.array([np.nan if row.k_tf is None else row.k_tf for row in self.rows])


@dataclasses.dataclass(frozen=True)
class WorstCaseReport:
    case_id: EpidemicCase
    theta_tilde: Optional[float]
    theta_star: Optional[float]
    f_thetas: np.ndarray
    f_values: np.ndarray
    empirical: Optional[EmpiricalSweep] = None

    def as_dict(self) -> dict:
        data = {
            "case": self.case_id.value,
            "theta_tilde": self.theta_tilde,
            "theta_star": self.theta_star,
        }
        if self.empirical is not None:
            data.update({
                "theta_argmax": self.empirical.theta_argmax,
                "K_argmax": self.empirical.k_argmax,
                "K_theta_tilde": self.empirical.k_tilde,
                "grid_resolution": self.empirical.resolution,
            })
        return data


def worst_theta_analytic(params: ModelParams, f_thetas: Optional[Sequence[float]] = None) -> WorstCaseReport:
    f_thetas = default_theta_grid() if f_thetas is None else np.asarray(f_thetas, dtype=float)
    return WorstCaseReport(
        case_id=classify_case(params),
        theta_tilde=theta_tilde(params),
        theta_star=theta_star(params).value,
        f_thetas=f_thetas,
        f_values=f_curve(params, f_thetas),
    )


def _sweep_row(args) -> SweepRow:
    params, theta, total_infected, k, config = args
    at_theta = params.with_theta(float(theta))
    r = at_theta.r0

    if r <= 1:
        return SweepRow(theta, r, None, None, SweepStatus.NO_EPIDEMIC.value)
    if r <= 1 + NEAR_THRESHOLD_MARGIN:
        return SweepRow(theta, r, None, None, SweepStatus.NEAR_THRESHOLD.value)
    if theta == 0:
        # nobody is ever hospitalized, and C2 = 0 leaves the wave end undefined
        return SweepRow(theta, r, None, 0.0, SweepStatus.DEGENERATE_THETA.value)

    try:
        trajectory = integrate(
            at_theta,
            make_initial_conditions(at_theta, total_infected),
            config,
            [wave_end_event(at_theta, terminal=True)],
        )
    except NumericalError as exc:
        logger.warning("Simulation failed at theta=%r: %s", theta, exc)
        return SweepRow(theta, r, None, None, f"failed: theta={theta!r}: {exc}")

    t_f = detect_wave_end(trajectory)
    if t_f is None:
        return SweepRow(theta, r, None, None, SweepStatus.NO_WAVE_END.value)
    return SweepRow(theta, r, t_f, cost_at(trajectory, t_f, k), SweepStatus.OK.value)


def worst_theta_empirical(params: ModelParams, theta_grid: Optional[Sequence[float]] = None,
                          total_infected: float = DEFAULT_INITIAL_INFECTED, k: Optional[float] = None,
                          config: Optional[IntegratorConfig] = None,
                          workers: Optional[int] = None) -> EmpiricalSweep:
    """
    Simulate every theta of the grid and record K at the end of the first wave.

    Rows come out in ascending theta whatever the worker count. The argmax only considers rows with
        status "ok"; ties go to the smaller theta.
    """
    k = lab_setting("COST_RATE") if k is None else k
    workers = lab_setting("WORKERS") if workers is None else workers
    config = config or IntegratorConfig.from_settings()
    grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    if np.any((grid < 0) | (grid > 1)):
        raise InvalidParameters("theta_grid must lie in [0, 1].")

    tasks = [(params, float(theta), total_infected, k, config) for theta in np.sort(grid)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(task) for task in tasks]

    skipped = [row for row in rows if not row.ok]
    if skipped:
        logger.info("Skipped %d of %d theta values: %s", len(skipped), len(rows),
                    ", ".join(f"{row.theta:g} ({row.status})" for row in skipped))

    best = None
    for row in rows:
        if row.ok and (best is None or row.k_tf > best.k_tf):
            best = row

    tilde = theta_tilde(params)
    k_tilde = None
    if tilde is not None:
        k_tilde = _sweep_row((params, tilde, total_infected, k, config)).k_tf

    return EmpiricalSweep(
        rows=tuple(rows),
        k=k,
        total_infected=total_infected,
        theta_argmax=None if best is None else best.theta,
        k_argmax=None if best is None else best.k_tf,
        theta_tilde=tilde,
        k_tilde=k_tilde,
    )


def worst_case_report(params: ModelParams, theta_grid: Optional[Sequence[float]] = None,
                      total_infected: float = DEFAULT_INITIAL_INFECTED, k: Optional[float] = None,
                      config: Optional[IntegratorConfig] = None, workers: Optional[int] = None) -> WorstCaseReport:
    report = worst_theta_analytic(params, theta_grid)
    empirical = worst_theta_empirical(params, theta_grid, total_infected, k, config, workers)
    return dataclasses.replace(report, empirical=empirical)


@dataclasses.dataclass(frozen=True)
class Comparison:
    theta_gap: float
    k_gap: float
    practical_match: bool

    def as_dict(self) -> dict:
        return {"theta_gap": self.theta_gap, "k_gap": self.k_gap, "practical_match": self.practical_match}


def compare(analytic: WorstCaseReport, empirical: EmpiricalSweep) -> Comparison:
    """Distance between the analytic worst severity and the sweep's argmax, in theta and in relative cost."""
    if analytic.theta_tilde is None or empirical.theta_argmax is None or empirical.k_tilde is None:
        raise NotApplicable("Both an analytic worst theta and a successful empirical sweep are needed.")

    theta_gap = abs(empirical.theta_argmax - analytic.theta_tilde)
    difference = abs(empirical.k_argmax - empirical.k_tilde)
    k_gap = difference / empirical.k_argmax if empirical.k_argmax else difference
    return Comparison(theta_gap=theta_gap, k_gap=k_gap, practical_match=k_gap < PRACTICAL_MATCH_GAP)
