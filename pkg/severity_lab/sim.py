"""
Time integration: Dormand-Prince 5(4) steps with dense output, event location on each step's interpolant,
and the hospital-occupancy integral carried as a fifth state component so the error controller governs it.
"""
import dataclasses
import enum
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import RK45, OdeSolution
from scipy.optimize import brentq

from .analysis import endemic_equilibrium
from .conf import lab_setting
from .constants import (
    DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_T_MAX, EVENT_XTOL, SIMPLEX_CLAMP_FACTOR, SLOW_REGIME_FACTOR,
)
from .exceptions import InvalidParameters, NotApplicable, StiffnessSuspected
from .model import ModelParams, State, clamp_to_simplex, vector_field

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    h_init: Optional[float] = None
    h_max: float = np.inf
    t_max: float = DEFAULT_T_MAX

    def __post_init__(self):
        if not 0 < self.atol <= self.rtol < 1:
            raise InvalidParameters(f"Need 0 < atol <= rtol < 1, got atol={self.atol}, rtol={self.rtol}.")
        if self.h_init is not None and self.h_init <= 0:
            raise InvalidParameters(f"h_init must be positive, got {self.h_init}.")
        if self.h_max <= 0 or self.t_max <= 0:
            raise InvalidParameters("h_max and t_max must be positive.")

    @classmethod
    def from_settings(cls, **overrides) -> "IntegratorConfig":
        values = {
            "rtol": lab_setting("RTOL"),
            "atol": lab_setting("ATOL"),
            "t_max": lab_setting("T_MAX"),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def refined(self, factor: float = 2.0) -> "IntegratorConfig":
        return dataclasses.replace(self, rtol=self.rtol / factor, atol=self.atol / factor)

    @property
    def clamp_tol(self) -> float:
        return SIMPLEX_CLAMP_FACTOR * self.atol


class EventKind(enum.Enum):
    WAVE_END = "WaveEnd"
    S_CROSS_UP = "SCrossUp"
    S_CROSS_DOWN = "SCrossDown"
    S_MINIMUM = "SMinimum"
    SLOW_ENTRY = "SlowEntry"
    SLOW_EXIT = "SlowExit"
    INFECTIVE_RETURN = "InfectiveReturn"
    REACHED_HORIZON = "ReachedHorizon"


@dataclasses.dataclass(frozen=True)
class Event:
    time: float
    kind: EventKind
    state: np.ndarray = dataclasses.field(repr=False, compare=False)
    level: Optional[float] = None

    @property
    def label(self) -> str:
        if self.level is None:
            return self.kind.value
        return f"{self.kind.value}({self.level:.17g})"


@dataclasses.dataclass(frozen=True)
class EventSpec:
    """
    A scalar event function g(t, y) whose zero crossings are events.
    direction: +1 counts upward crossings, -1 downward ones, 0 both.
    accept: extra condition on the located state; rejected crossings are not events.
    """
    kind: EventKind
    function: Callable[[float, np.ndarray], float]
    direction: int = 0
    level: Optional[float] = None
    accept: Optional[Callable[[float, np.ndarray], bool]] = None
    terminal: bool = False


@dataclasses.dataclass(frozen=True)
class FlowSolution:
    t: np.ndarray
    y: np.ndarray
    interpolants: Tuple
    events: Tuple[Event, ...]
    terminated: bool
    nfev: int

    def __call__(self, t):
        return OdeSolution(self.t, list(self.interpolants))(t)

    @property
    def n_steps(self) -> int:
        return len(self.interpolants)


def _crosses(direction: int, old: float, new: float) -> bool:
    up = old < 0 <= new
    down = old > 0 >= new
    if direction > 0:
        return up
    if direction < 0:
        return down
    return up or down


def _locate_in_step(spec: EventSpec, interpolant, t_old, t_new, g_old, g_new) -> Optional[Event]:
    if not _crosses(spec.direction, g_old, g_new):
        return None

    def g(t):
        return spec.function(t, interpolant(t))

    g_a, g_b = g(t_old), g(t_new)
    if g_b == 0 or g_a * g_b > 0:
        # the step's end values and the interpolant disagree in the last bits
        t_event = t_new if abs(g_b) <= abs(g_a) else t_old
    elif g_a == 0:
        t_event = t_old
    else:
        t_event = brentq(g, t_old, t_new, xtol=EVENT_XTOL)

    state = interpolant(t_event)
    if spec.accept is not None and not spec.accept(t_event, state):
        return None
    return Event(time=float(t_event), kind=spec.kind, state=state, level=spec.level)


def _pair_slow_regime(events: List[Event]) -> List[Event]:
    """Keep a SlowExit only when it follows an unmatched SlowEntry."""
    paired = []
    inside = False
    for event in events:
        if event.kind is EventKind.SLOW_ENTRY:
            inside = True
        elif event.kind is EventKind.SLOW_EXIT:
            if not inside:
                continue
            inside = False
        paired.append(event)
    return paired


def integrate_field(fun, y0, config: IntegratorConfig, events: Sequence[EventSpec] = (), t0: float = 0.0) -> FlowSolution:
    """
    Integrate y' = fun(t, y) from t0 to config.t_max, stopping early at the first accepted terminal event.
    """
    y0 = np.asarray(y0, dtype=float)
    solver = RK45(
        fun, t0, y0, config.t_max,
        max_step=config.h_max, rtol=config.rtol, atol=config.atol, first_step=config.h_init,
    )
    ts, ys, interpolants, found = [t0], [y0.copy()], [], []
    values = [spec.function(t0, y0) for spec in events]
    terminated = False

    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise StiffnessSuspected(f"Step size underflow at t={solver.t:.17g}: {message}")

        interpolant = solver.dense_output()
        t_old, t_new, y_new = solver.t_old, solver.t, solver.y.copy()
        new_values = [spec.function(t_new, y_new) for spec in events]
        hits = []
        for spec, g_old, g_new in zip(events, values, new_values):
            event = _locate_in_step(spec, interpolant, t_old, t_new, g_old, g_new)
            if event is not None:
                hits.append((event, spec))

        ts.append(t_new)
        ys.append(y_new)
        interpolants.append(interpolant)
        for event, spec in sorted(hits, key=lambda hit: hit[0].time):
            found.append(event)
            if spec.terminal:
                terminated = True
                if event.time <= t_old:
                    ts.pop(), ys.pop(), interpolants.pop()
                else:
                    ts[-1], ys[-1] = event.time, event.state
                break
        if terminated:
            break
        values = new_values

    if not terminated:
        found.append(Event(time=ts[-1], kind=EventKind.REACHED_HORIZON, state=ys[-1]))

    return FlowSolution(
        t=np.array(ts),
        y=np.array(ys).T,
        interpolants=tuple(interpolants),
        events=tuple(_pair_slow_regime(found)),
        terminated=terminated,
        nfev=solver.nfev,
    )


def _augmented_field(params: ModelParams):
    def fun(t, y):
        return np.append(vector_field(params, y), y[3])
    return fun


@dataclasses.dataclass(frozen=True)
class SampleRow:
    t: float
    s: float
    i: float
    c: float
    h: float
    k: float
    event: str = ""

    @property
    def r(self) -> float:
        return 1.0 - self.s - self.i - self.c - self.h


@dataclasses.dataclass(frozen=True)
class TrajectorySamples:
    """CSV-ready view of a trajectory: one row per accepted step, plus one row per event."""
    rows: Tuple[SampleRow, ...]

    @property
    def step_rows(self) -> Tuple[SampleRow, ...]:
        return tuple(row for row in self.rows if not row.event)

    @property
    def event_rows(self) -> Tuple[SampleRow, ...]:
        return tuple(row for row in self.rows if row.event)


@dataclasses.dataclass(frozen=True)
class Trajectory:
    """
    Numerical solution of the model from one initial state.
    Rows of `flow.y` are S, I, C, H and Q, the running integral of H; the cost is K = k * Q.
    """
    params: ModelParams
    config: IntegratorConfig
    flow: FlowSolution

    @property
    def times(self) -> np.ndarray:
        return self.flow.t

    @property
    def events(self) -> Tuple[Event, ...]:
        return self.flow.events

    @property
    def raw_states(self) -> np.ndarray:
        return self.flow.y[:4]

    @property
    def states(self) -> np.ndarray:
        return clamp_to_simplex(self.raw_states, self.config.clamp_tol)

    @property
    def state_list(self) -> List[State]:
        return [State.from_array(column) for column in self.states.T]

    @property
    def hospital_integral(self) -> np.ndarray:
        return self.flow.y[4]

    @property
    def final_state(self) -> State:
        return State.from_array(self.states[:, -1])

    @property
    def simplex_violation(self) -> float:
        y = self.raw_states
        below = -np.min(y)
        above = np.max(y.sum(axis=0)) - 1.0
        return float(max(0.0, below, above))

    def __call__(self, t):
        return self.flow(t)

    def state_at(self, t: float) -> State:
        return State.from_array(clamp_to_simplex(self.flow(t)[:4], self.config.clamp_tol))

    def events_of(self, kind: EventKind) -> List[Event]:
        return [event for event in self.events if event.kind is kind]

    def first_event(self, kind: EventKind) -> Optional[Event]:
        matches = self.events_of(kind)
        return matches[0] if matches else None

    def distance_to(self, state: State, t: Optional[float] = None) -> float:
        here = self.final_state if t is None else self.state_at(t)
        return float(np.max(np.abs(here.as_array() - state.as_array())))

    def samples(self, k: Optional[float] = None) -> TrajectorySamples:
        k = lab_setting("COST_RATE") if k is None else k
        states = self.states
        cost = accumulate_cost(self, k)
        rows = [
            (t, 0, SampleRow(float(t), *(float(v) for v in states[:, n]), float(cost[n])))
            for n, t in enumerate(self.times)
        ]
        for event in self.events:
            s, i, c, h = clamp_to_simplex(event.state[:4], self.config.clamp_tol)
            q = event.state[4] if len(event.state) > 4 else 0.0
            rows.append((event.time, 1, SampleRow(event.time, s, i, c, h, float(k * q), event.label)))
        rows.sort(key=lambda row: (row[0], row[1]))
        return TrajectorySamples(rows=tuple(row for _, _, row in rows))


def s_crossing(level: float, direction: int) -> EventSpec:
    kind = EventKind.S_CROSS_UP if direction > 0 else EventKind.S_CROSS_DOWN
    return EventSpec(kind=kind, function=lambda t, y: y[0] - level, direction=direction, level=level)


def s_minimum_event(params: ModelParams) -> EventSpec:
    return EventSpec(
        kind=EventKind.S_MINIMUM,
        function=lambda t, y: vector_field(params, y)[0],
        direction=1,
    )


def slow_regime_events(params: ModelParams, factor: float = SLOW_REGIME_FACTOR) -> List[EventSpec]:
    """
    SlowEntry when max(I, C, H) drops below factor * eps**2, SlowExit when it rises back above it with S > 1/R0.
    """
    if params.eps == 0:
        raise NotApplicable("The slow regime is undefined for eps = 0.")

    threshold = factor * params.eps ** 2
    s_threshold = 1 / params.r0

    def sick(t, y):
        return max(y[1], y[2], y[3]) - threshold

    return [
        EventSpec(kind=EventKind.SLOW_ENTRY, function=sick, direction=-1, level=threshold),
        EventSpec(
            kind=EventKind.SLOW_EXIT, function=sick, direction=1, level=threshold,
            accept=lambda t, y: y[0] > s_threshold,
        ),
    ]


def wave_end_event(params: ModelParams, terminal: bool = False) -> EventSpec:
    """
    End of the first wave: S returns to S2 while I < I2 and C < C2 (exact endemic equilibrium).
    """
    if params.r0 <= 1:
        raise NotApplicable(f"R0={params.r0:.6g} <= 1: there is no wave to end.")

    ee = endemic_equilibrium(params)

    def accept(t, y):
        # at theta = 1 both I and I2 vanish identically
        return (y[1] < ee.i or ee.i == 0) and y[2] < ee.c

    return EventSpec(
        kind=EventKind.WAVE_END,
        function=lambda t, y: y[0] - ee.s,
        direction=0,
        accept=accept,
        terminal=terminal,
    )


def integrate(params: ModelParams, x0: State, config: Optional[IntegratorConfig] = None,
              events: Sequence[EventSpec] = ()) -> Trajectory:
    config = config or IntegratorConfig.from_settings()
    x0.validate(tol=config.clamp_tol)

    flow = integrate_field(_augmented_field(params), np.append(x0.as_array(), 0.0), config, events)
    trajectory = Trajectory(params=params, config=config, flow=flow)

    if trajectory.simplex_violation > config.clamp_tol:
        logger.warning(
            "Trajectory left the simplex by %.3g (> %.3g) for %s.",
            trajectory.simplex_violation, config.clamp_tol, params,
        )
    logger.debug(
        "Integrated to t=%.6g in %d steps (%d evaluations), %d events.",
        flow.t[-1], flow.n_steps, flow.nfev, len(flow.events),
    )
    return trajectory


def locate_events(flow: FlowSolution, specs: Sequence[EventSpec]) -> List[Event]:
    """
    Re-run event location on a stored dense output. Uses the same per-step interpolants and end values as
        the integration loop, so it reproduces the event times found during integration.
    """
    found = []
    for k, interpolant in enumerate(flow.interpolants):
        t_old, t_new = flow.t[k], flow.t[k + 1]
        y_old, y_new = flow.y[:, k], flow.y[:, k + 1]
        hits = []
        for spec in specs:
            event = _locate_in_step(spec, interpolant, t_old, t_new, spec.function(t_old, y_old), spec.function(t_new, y_new))
            if event is not None:
                hits.append(event)
        found.extend(sorted(hits, key=lambda event: event.time))
    return _pair_slow_regime(found)


def detect_wave_end(trajectory: Trajectory, params: Optional[ModelParams] = None) -> Optional[float]:
    """First time t_F with S(t_F) = S2, I < I2 and C < C2, or None if the orbit never gets there."""
    if params is None or params == trajectory.params:
        recorded = trajectory.first_event(EventKind.WAVE_END)
        if recorded is not None:
            return recorded.time
    params = params or trajectory.params

    located = locate_events(trajectory.flow, [wave_end_event(params)])
    return located[0].time if located else None


def accumulate_cost(trajectory: Trajectory, k: Optional[float] = None) -> np.ndarray:
    """K(t) = k * integral of H, sampled at the accepted steps."""
    k = lab_setting("COST_RATE") if k is None else k
    return k * trajectory.hospital_integral


def cost_at(trajectory: Trajectory, t: float, k: Optional[float] = None) -> float:
    k = lab_setting("COST_RATE") if k is None else k
    return float(k * trajectory(t)[4])
