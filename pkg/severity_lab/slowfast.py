"""
Slow-fast structure of the model.

For eps = 0 the set I = C = H = 0 is a line of equilibria (the critical manifold). It attracts while
S < 1/R0 and repels in the infective direction beyond it. With gamma_i == gamma_c an orbit entering
near the manifold at S0 < 1/R0 drifts along the slow flow S' = 1 - S and leaves only once the accumulated
contraction has been undone; the exit point and exit time are roots of two scalar equations.
"""
import dataclasses
import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .conf import lab_setting
from .constants import (
    DEFAULT_ENTRY_SEED, ENTRY_EXIT_ATOL, EXIT_BRACKET_DELTA, NON_HYPERBOLIC_TOL, ROOT_XTOL,
)
from .exceptions import (
    DomainError, ExitNotDetected, NoEpidemicOrbit, NotApplicable, NotInAttractingRegion, NumericalError,
    RootNotBracketed,
)
from .model import ModelParams, ReducedState, reduced_vector_field, require_equal_recovery
from .sim import EventKind, EventSpec, IntegratorConfig, integrate_field

logger = logging.getLogger(__name__)


class Verdict(enum.Enum):
    ATTRACTING = "Attracting"
    NON_HYPERBOLIC = "NonHyperbolic"
    SADDLE = "Saddle"


class FastEigenvalues(NamedTuple):
    lambda1: float
    lambda2: float
    lambda3: float


@dataclasses.dataclass(frozen=True)
class ManifoldClassification:
    s: float
    lambda1: float
    lambda2: float
    lambda3: float
    verdict: Verdict


def _require_susceptible_fraction(s: float) -> None:
    if not 0 <= s <= 1:
        raise DomainError(f"s must lie in [0, 1], got {s!r}.")


def fast_eigenvalues(params: ModelParams, s: float) -> FastEigenvalues:
    """
    Nonzero eigenvalues of the fast Jacobian at (s, 0, 0, 0).

    lambda1 = -gamma_h comes from the hospital block. lambda2 <= lambda3 are the eigenvalues of the
        infective block, a Metzler matrix, so both are real. lambda3 is obtained as det / lambda2, which
        makes it exactly zero at s = 1/R0.
    """
    _require_susceptible_fraction(s)
    theta, gamma_i, gamma_c = params.theta, params.gamma_i, params.gamma_c
    pressure = params.beta * s

    trace = pressure - gamma_i - gamma_c
    spread = (1 - theta) * pressure - gamma_i - theta * pressure + gamma_c
    discriminant = spread ** 2 + 4 * theta * (1 - theta) * pressure ** 2
    lambda2 = (trace - np.sqrt(discriminant)) / 2
    determinant = gamma_i * gamma_c * (1 - s * params.r0)

    return FastEigenvalues(-params.gamma_h, float(lambda2), float(determinant / lambda2))


def classify_manifold(params: ModelParams, s: float) -> ManifoldClassification:
    lambda1, lambda2, lambda3 = fast_eigenvalues(params, s)
    threshold = 1 / params.r0
    if abs(s - threshold) <= NON_HYPERBOLIC_TOL:
        verdict = Verdict.NON_HYPERBOLIC
    elif s < threshold:
        verdict = Verdict.ATTRACTING
    else:
        verdict = Verdict.SADDLE
    return ManifoldClassification(s, lambda1, lambda2, lambda3, verdict)


def conserved_gamma(params: ModelParams, s: float, i: float, c: float) -> float:
    """log S - R0 (S + I + C), constant along the fast flow when gamma_i == gamma_c."""
    require_equal_recovery(params)
    if s <= 0:
        raise DomainError(f"The conserved quantity needs s > 0, got {s!r}.")
    return float(np.log(s) - params.r0 * (s + i + c))


def s_infinity(params: ModelParams, s0: float, i0: float, c0: float) -> float:
    """
    Limit of S along the fast flow from (s0, i0, c0): the root of log(x/s0) - R0 (x - s0 - i0 - c0)
        in (0, min(1/R0, s0)).
    """
    require_equal_recovery(params)
    if i0 + c0 <= 0:
        raise NoEpidemicOrbit(f"No infectives at the start (i0 + c0 = {i0 + c0!r}); S stays at {s0!r}.")
    if not 0 < s0 <= 1:
        raise DomainError(f"s0 must lie in (0, 1], got {s0!r}.")

    r = params.r0

    def h(x):
        return np.log(x / s0) - r * (x - s0 - i0 - c0)

    upper = min(1 / r, s0)
    lower = upper / 2
    while h(lower) >= 0:
        lower /= 2
        if lower < np.finfo(float).tiny:
            raise RootNotBracketed(f"Could not bracket S_infinity for s0={s0!r}.")
    return float(brentq(h, lower, upper, xtol=ROOT_XTOL))


def _require_entry(params: ModelParams, s_entry: float) -> None:
    require_equal_recovery(params)
    if params.r0 <= 1:
        raise NotApplicable(f"R0={params.r0:.6g} <= 1: the critical manifold never repels.")
    if s_entry <= 0:
        raise DomainError(f"s_entry must be positive, got {s_entry!r}.")
    if s_entry >= 1 / params.r0:
        raise NotInAttractingRegion(
            f"s_entry={s_entry!r} is not below 1/R0={1 / params.r0:.17g}; the orbit does not enter near the manifold."
        )


def exit_residual(params: ModelParams, s_entry: float, s_exit: float) -> float:
    """
    y_E - y_0 + (R0 - 1) log((R0 - 1 - y_E) / (R0 - 1 - y_0)) with y = R0 S - 1.
    Vanishes at the trivial root s_exit = s_entry and at the exit point.
    """
    gap = params.r0 - 1
    y0, y = params.r0 * s_entry - 1, params.r0 * s_exit - 1
    return float(y - y0 + gap * np.log((gap - y) / (gap - y0)))


def entry_exit_point(params: ModelParams, s_entry: float) -> float:
    _require_entry(params, s_entry)
    r = params.r0
    gap = r - 1
    y0 = r * s_entry - 1
    delta = EXIT_BRACKET_DELTA

    def residual(y):
        return y - y0 + gap * np.log((gap - y) / (gap - y0))

    if residual(delta) <= 0:
        # s_entry sits so close to 1/R0 that the nontrivial root is inside the excluded band
        return (delta + 1) / r
    y_exit = brentq(residual, delta, gap - delta, xtol=ROOT_XTOL)
    return float((y_exit + 1) / r)


def exit_time_residual(params: ModelParams, s_entry: float, tau: float) -> float:
    """Integral of the unstable fast eigenvalue along the slow flow from 0 to tau."""
    beta, gamma = params.beta, params.gamma_i
    return float((beta - gamma) * tau - beta * (1 - s_entry) * (1 - np.exp(-tau)))


def exit_time(params: ModelParams, s_entry: float) -> float:
    """
    Slow time tau_E > 0 at which the orbit leaves the manifold.
    The residual is convex with a single minimum at tau_m > 0, so the nontrivial root is bracketed by
        [tau_m, tau_m + beta (1 - s_entry) / (beta - gamma) + 1].
    """
    _require_entry(params, s_entry)
    beta, gamma = params.beta, params.gamma_i
    tau_min = np.log(beta * (1 - s_entry) / (beta - gamma))
    tau_up = tau_min + beta * (1 - s_entry) / (beta - gamma) + 1
    return float(brentq(lambda tau: exit_time_residual(params, s_entry, tau), tau_min, tau_up, xtol=ROOT_XTOL))


@dataclasses.dataclass(frozen=True)
class EntryExitResult:
    s_entry: float
    s_exit_predicted: float
    tau_exit_predicted: float
    s_exit_simulated: Optional[float] = None
    tau_exit_simulated: Optional[float] = None
    abs_err_point: Optional[float] = None
    abs_err_time: Optional[float] = None
    status: str = "ok"
    eps: Optional[float] = dataclasses.field(default=None, compare=False)

    @property
    def t_exit_predicted(self) -> Optional[float]:
        if not self.eps:
            return None
        return self.tau_exit_predicted / self.eps

    @property
    def fast_time_error(self) -> Optional[float]:
        """Error on the fast exit time, abs_err_time / eps."""
        if self.abs_err_time is None or not self.eps:
            return None
        return self.abs_err_time / self.eps


def infective_return_event(params: ModelParams, t0_fast: float) -> EventSpec:
    s_threshold = 1 / params.r0
    return EventSpec(
        kind=EventKind.INFECTIVE_RETURN,
        function=lambda t, y: y[1] - t0_fast,
        direction=1,
        level=t0_fast,
        accept=lambda t, y: y[0] > s_threshold,
        terminal=True,
    )


def simulate_entry_exit(params: ModelParams, s_entry: float, t0_fast: float = DEFAULT_ENTRY_SEED,
                        h0: float = DEFAULT_ENTRY_SEED, config: Optional[IntegratorConfig] = None,
                        strict: bool = False) -> EntryExitResult:
    """
    Integrate the reduced (S, I + C, H) system from (s_entry, t0_fast, h0) until I + C climbs back to
        t0_fast with S > 1/R0, and compare with the predicted exit.

    A missing exit is reported in `status`; pass `strict=True` to raise ExitNotDetected instead.
    """
    if params.eps == 0:
        raise NotApplicable("The entry-exit passage needs a slow drift, got eps = 0.")
    predicted = EntryExitResult(
        s_entry=s_entry,
        s_exit_predicted=entry_exit_point(params, s_entry),
        tau_exit_predicted=exit_time(params, s_entry),
        eps=params.eps,
    )
    ReducedState(s_entry, t0_fast, h0).validate()
    config = config or IntegratorConfig.from_settings(atol=ENTRY_EXIT_ATOL)

    flow = integrate_field(
        lambda t, y: reduced_vector_field(params, y),
        [s_entry, t0_fast, h0],
        config,
        [infective_return_event(params, t0_fast)],
    )
    exits = [event for event in flow.events if event.kind is EventKind.INFECTIVE_RETURN]
    if not exits:
        message = f"No exit found up to t={config.t_max:.6g} for s_entry={s_entry!r}."
        if strict:
            raise ExitNotDetected(message)
        logger.warning(message)
        return dataclasses.replace(predicted, status="exit-not-detected")

    s_exit = float(exits[0].state[0])
    tau_exit = params.eps * exits[0].time
    return dataclasses.replace(
        predicted,
        s_exit_simulated=s_exit,
        tau_exit_simulated=tau_exit,
        abs_err_point=abs(s_exit - predicted.s_exit_predicted),
        abs_err_time=abs(tau_exit - predicted.tau_exit_predicted),
    )


@dataclasses.dataclass(frozen=True)
class EntryExitSweep:
    params: ModelParams
    results: Tuple[EntryExitResult, ...]

    def _max(self, field: str) -> Optional[float]:
        values = [getattr(result, field) for result in self.results if getattr(result, field) is not None]
        return max(values) if values else None

    @property
    def max_err_point(self) -> Optional[float]:
        return self._max("abs_err_point")

    @property
    def max_err_time(self) -> Optional[float]:
        return self._max("abs_err_time")

    @property
    def max_fast_time_error(self) -> Optional[float]:
        return self._max("fast_time_error")


def default_entry_grid(params: ModelParams, count: int = 50) -> np.ndarray:
    """Evenly spaced entry points across the attracting part of the manifold, short of 1/R0."""
    threshold = 1 / params.r0
    return np.linspace(threshold / 12, 0.98 * threshold, count)


def _entry_exit_row(args) -> EntryExitResult:
    params, s_entry, t0_fast, h0, config = args
    try:
        return simulate_entry_exit(params, s_entry, t0_fast, h0, config)
    except NumericalError as exc:
        logger.warning("Entry-exit run failed at s_entry=%r: %s", s_entry, exc)
        return EntryExitResult(
            s_entry=s_entry,
            s_exit_predicted=entry_exit_point(params, s_entry),
            tau_exit_predicted=exit_time(params, s_entry),
            status=f"failed: {exc}",
            eps=params.eps,
        )


def entry_exit_sweep(params: ModelParams, s_grid: Sequence[float], t0_fast: float = DEFAULT_ENTRY_SEED,
                     h0: float = DEFAULT_ENTRY_SEED, config: Optional[IntegratorConfig] = None,
                     workers: Optional[int] = None) -> EntryExitSweep:
    """
    Usage Examples:
        sweep = entry_exit_sweep(params, np.linspace(0.05, 0.59, 50))
        sweep.max_err_point, sweep.max_err_time
    """
    workers = lab_setting("WORKERS") if workers is None else workers
    config = config or IntegratorConfig.from_settings(atol=ENTRY_EXIT_ATOL)
    grid = sorted(float(s) for s in s_grid)
    for s_entry in grid:
        _require_entry(params, s_entry)

    tasks = [(params, s_entry, t0_fast, h0, config) for s_entry in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_entry_exit_row, tasks))
    else:
        results = [_entry_exit_row(task) for task in tasks]

    sweep = EntryExitSweep(params=params, results=tuple(results))
    logger.info(
        "Entry-exit sweep over %d points: max point error %s, max time error %s.",
        len(results), sweep.max_err_point, sweep.max_err_time,
    )
    return sweep
