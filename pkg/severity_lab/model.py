"""
SIRS model with a critical (hospital-bound) course of the disease.

The population is split into susceptible S, standard-course infected I, critical-course infected C,
hospitalized H and recovered R, with S + I + C + H + R = 1. R is never stored: it is derived as
1 - S - I - C - H, so every state lives in the four-dimensional simplex

    S, I, C, H >= 0,  S + I + C + H <= 1.

Time is the fast time t; immunity is lost at the slow rate eps.
"""
import dataclasses
import warnings
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .constants import MAX_INITIAL_INFECTED, SIMPLEX_CLAMP_FACTOR, DEFAULT_ATOL, TIMESCALE_SEPARATION_RATIO
from .exceptions import DomainError, InvalidParameters, TimescaleSeparationWarning, UnsupportedRegime


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """
    Rates (1/time) and the critical-course probability theta.

    gamma_i > gamma_c is a legitimate but unusual regime (recovery faster than hospital entry); it has
        to be requested explicitly with `allow_unordered=True`.
    """
    beta: float
    theta: float
    gamma_i: float
    gamma_c: float
    gamma_h: float
    eps: float
    allow_unordered: bool = False

    def __post_init__(self):
        for name in ("beta", "gamma_i", "gamma_c", "gamma_h"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidParameters(f"{name} must be a positive rate, got {value!r}.")
        if not np.isfinite(self.eps) or self.eps < 0:
            raise InvalidParameters(f"eps must be non-negative, got {self.eps!r}.")
        if not 0 <= self.theta <= 1:
            raise InvalidParameters(f"theta must be a probability in [0, 1], got {self.theta!r}.")
        if self.gamma_i > self.gamma_c and not self.allow_unordered:
            raise InvalidParameters(
                f"gamma_i={self.gamma_i} exceeds gamma_c={self.gamma_c}. "
                f"Pass allow_unordered=True to study this regime."
            )

        fastest_slow_rate = TIMESCALE_SEPARATION_RATIO * min(self.beta, self.gamma_i, self.gamma_c, self.gamma_h)
        if self.eps > fastest_slow_rate:
            warnings.warn(
                f"eps={self.eps} is not small against the fast rates "
                f"(threshold {fastest_slow_rate:.3g}); slow-fast results may not apply.",
                TimescaleSeparationWarning,
                stacklevel=3,
            )

    @property
    def ordered(self) -> bool:
        return self.gamma_i <= self.gamma_c

    @property
    def equal_recovery(self) -> bool:
        return self.gamma_i == self.gamma_c

    @property
    def r0(self) -> float:
        return self.beta * self.rbar0

    @property
    def rbar0(self) -> float:
        return (1 - self.theta) / self.gamma_i + self.theta / self.gamma_c

    def with_theta(self, theta: float) -> "ModelParams":
        return dataclasses.replace(self, theta=theta)

    def with_beta(self, beta: float) -> "ModelParams":
        return dataclasses.replace(self, beta=beta)

    def with_eps(self, eps: float) -> "ModelParams":
        return dataclasses.replace(self, eps=eps)


@dataclasses.dataclass(frozen=True)
class State:
    s: float
    i: float
    c: float
    h: float

    @property
    def r(self) -> float:
        return 1.0 - self.s - self.i - self.c - self.h

    @property
    def infective(self) -> float:
        return self.i + self.c

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.i, self.c, self.h], dtype=float)

    @classmethod
    def from_array(cls, values) -> "State":
        s, i, c, h = (float(v) for v in values[:4])
        return cls(s, i, c, h)

    def simplex_violation(self) -> float:
        """Largest distance by which the state leaves the simplex (0 inside)."""
        return max(0.0, -self.s, -self.i, -self.c, -self.h, -self.r)

    def validate(self, tol: float = 0.0) -> "State":
        violation = self.simplex_violation()
        if violation > tol:
            raise DomainError(f"{self} lies outside the simplex by {violation:.3g} (tolerance {tol:.3g}).")
        return self

    def clamped(self, tol: float = SIMPLEX_CLAMP_FACTOR * DEFAULT_ATOL) -> "State":
        """
        Set components in [-tol, 0) to zero.
        No renormalization happens: (S, I, C, H) is not a conserved sum.
        """
        return State.from_array(clamp_to_simplex(self.as_array(), tol))


@dataclasses.dataclass(frozen=True)
class ReducedState:
    """State of the gamma_i == gamma_c system, with t_inf = I + C."""
    s: float
    t_inf: float
    h: float

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.t_inf, self.h], dtype=float)

    def validate(self, tol: float = 0.0) -> "ReducedState":
        if min(self.s, self.t_inf, self.h) < -tol or self.s + self.t_inf + self.h > 1 + tol:
            raise DomainError(f"{self} lies outside the simplex.")
        return self


class StateDerivative(NamedTuple):
    ds: float
    di: float
    dc: float
    dh: float

    @property
    def dr(self) -> float:
        return -(self.ds + self.di + self.dc + self.dh)


class ReducedDerivative(NamedTuple):
    ds: float
    dt_inf: float
    dh: float


def clamp_to_simplex(values: np.ndarray, tol: float) -> np.ndarray:
    clamped = np.array(values, dtype=float)
    near_boundary = (clamped < 0) & (clamped >= -tol)
    clamped[near_boundary] = 0.0
    return clamped


def vector_field(params: ModelParams, y, eps: Optional[float] = None) -> np.ndarray:
    """
    Right-hand side for y = (S, I, C, H).
    `eps` overrides the immunity-loss rate; eps=0 gives the fast subsystem.
    """
    eps = params.eps if eps is None else eps
    s, i, c, h = y[0], y[1], y[2], y[3]
    infection = params.beta * s * (i + c)
    return np.array([
        -infection + eps * (1.0 - s - i - c - h),
        (1.0 - params.theta) * infection - params.gamma_i * i,
        params.theta * infection - params.gamma_c * c,
        params.gamma_c * c - params.gamma_h * h,
    ])


def derivative(params: ModelParams, state: State) -> StateDerivative:
    return StateDerivative(*vector_field(params, state.as_array()))


def fast_derivative(params: ModelParams, state: State) -> StateDerivative:
    return StateDerivative(*vector_field(params, state.as_array(), eps=0.0))


def require_equal_recovery(params: ModelParams) -> None:
    if not params.equal_recovery:
        raise UnsupportedRegime(
            f"Only available for gamma_i == gamma_c, got gamma_i={params.gamma_i}, gamma_c={params.gamma_c}."
        )


def reduced_vector_field(params: ModelParams, y) -> np.ndarray:
    s, t_inf, h = y[0], y[1], y[2]
    gamma = params.gamma_i
    infection = params.beta * s * t_inf
    return np.array([
        -infection + params.eps * (1.0 - s - t_inf - h),
        infection - gamma * t_inf,
        gamma * params.theta * t_inf - params.gamma_h * h,
    ])


def reduced_derivative(params: ModelParams, state: ReducedState) -> ReducedDerivative:
    require_equal_recovery(params)
    return ReducedDerivative(*reduced_vector_field(params, state.as_array()))


def slow_derivative(s: float) -> float:
    """Flow of S on the critical manifold I = C = H = 0, in slow time tau = eps * t."""
    return 1.0 - s


def slow_flow(s0: float, tau) -> np.ndarray:
    decay = np.exp(-np.asarray(tau, dtype=float))
    # exact at tau = 0
    return s0 * decay + (1.0 - decay)


def make_initial_conditions(params: ModelParams, total_infected: float) -> State:
    """
    Start of an epidemic: nobody hospitalized or recovered, and the infected split by theta.
    """
    if not 0 < total_infected < MAX_INITIAL_INFECTED:
        raise InvalidParameters(
            f"total_infected must lie in (0, {MAX_INITIAL_INFECTED}), got {total_infected!r}."
        )
    return State(
        s=1.0 - total_infected,
        i=(1.0 - params.theta) * total_infected,
        c=params.theta * total_infected,
        h=0.0,
    )


def embed_reduced(params: ModelParams, state: ReducedState) -> State:
    return State(
        s=state.s,
        i=(1.0 - params.theta) * state.t_inf,
        c=params.theta * state.t_inf,
        h=state.h,
    )


def reduce_state(state: State) -> ReducedState:
    return ReducedState(s=state.s, t_inf=state.i + state.c, h=state.h)


def disease_free_state() -> State:
    return State(1.0, 0.0, 0.0, 0.0)


def infective_growth_bound(params: ModelParams) -> Tuple[float, bool]:
    """
    Rate bounding d(I+C)/dt / (I+C) from above, and whether it certifies exponential decay
    (beta < gamma_i <= gamma_c).
    """
    rate = params.beta - min(params.gamma_i, params.gamma_c)
    return rate, rate < 0
