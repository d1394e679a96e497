"""
Closed-form epidemiological analysis: reproduction number, equilibria, their eigenvalues and the
transcritical bifurcation in beta.
"""
import cmath
import dataclasses
import enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DegenerateTheta, NoEndemicEquilibrium
from .model import ModelParams, State, disease_free_state


def r0(params: ModelParams) -> float:
    return params.r0


def rbar0(params: ModelParams) -> float:
    """R0 / beta, the threshold in beta is 1 / rbar0."""
    return params.rbar0


def transmission_matrices(params: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """New-infection (F) and transition (V) Jacobians at the DFE, over the disease compartments I, C, H."""
    beta, theta = params.beta, params.theta
    f = np.array([
        [(1 - theta) * beta, (1 - theta) * beta, 0.0],
        [theta * beta, theta * beta, 0.0],
        [0.0, 0.0, 0.0],
    ])
    v = np.array([
        [params.gamma_i, 0.0, 0.0],
        [0.0, params.gamma_c, 0.0],
        [0.0, -params.gamma_c, params.gamma_h],
    ])
    return f, v


def next_generation_matrix(params: ModelParams) -> np.ndarray:
    f, v = transmission_matrices(params)
    # F V^-1 without forming the inverse.
    return np.linalg.solve(v.T, f.T).T


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def lyapunov_function(params: ModelParams, state: State) -> float:
    return state.i / params.gamma_i + state.c / params.gamma_c


class EigenRole(enum.Enum):
    CRITICAL_MANIFOLD = "critical-manifold"
    HOSPITAL_DISCHARGE = "hospital-discharge"
    INFECTIVE_GROWTH = "infective-growth"
    INFECTIVE_DECAY = "infective-decay"


class ModalValue(NamedTuple):
    value: complex
    role: EigenRole


def dfe_eigenvalues(params: ModelParams) -> Tuple[ModalValue, ModalValue, ModalValue, ModalValue]:
    """
    Eigenvalues of the Jacobian at (1, 0, 0, 0).

    The immunity-loss direction spans the critical manifold, the discharge direction corresponds to
        I0 = C0 = 0, and the decaying infective direction leaves the simplex; only the growing infective
        direction is biologically admissible.
    """
    trace = params.beta - params.gamma_i - params.gamma_c
    root = cmath.sqrt(trace ** 2 - 4 * params.gamma_i * params.gamma_c * (1 - params.r0))
    return (
        ModalValue(complex(-params.eps), EigenRole.CRITICAL_MANIFOLD),
        ModalValue(complex(-params.gamma_h), EigenRole.HOSPITAL_DISCHARGE),
        ModalValue((trace + root) / 2, EigenRole.INFECTIVE_GROWTH),
        ModalValue((trace - root) / 2, EigenRole.INFECTIVE_DECAY),
    )


def _require_endemic(params: ModelParams) -> None:
    if params.r0 <= 1:
        raise NoEndemicEquilibrium(f"R0={params.r0:.6g} <= 1, only the disease-free equilibrium exists.")
    if params.theta == 0:
        raise DegenerateTheta("theta=0 makes the endemic equilibrium degenerate (C2 = H2 = 0).")


def _ee_scale(params: ModelParams, simplified: bool) -> float:
    theta, gamma_i, gamma_c, gamma_h = params.theta, params.gamma_i, params.gamma_c, params.gamma_h
    if simplified:
        return theta / gamma_c
    return 1.0 / (
        gamma_c / theta + params.eps * (1 + gamma_c / gamma_h + gamma_c / gamma_i * (1 / theta - 1))
    )


def endemic_equilibrium(params: ModelParams, simplified: bool = False) -> State:
    """
    The endemic equilibrium, which exists iff R0 > 1.
    `simplified=True` drops the O(eps) correction in the common factor; that form drives the
        worst-case severity analysis.
    """
    _require_endemic(params)
    theta, gamma_i, gamma_c = params.theta, params.gamma_i, params.gamma_c
    common = params.eps * (1 - 1 / params.r0) * _ee_scale(params, simplified)
    return State(
        s=1 / params.r0,
        i=common * (1 - theta) / theta * gamma_c / gamma_i,
        c=common,
        h=common * gamma_c / params.gamma_h,
    )


@dataclasses.dataclass(frozen=True)
class CharPoly:
    """q(x) = x^3 + a x^2 + b x + c, the EE characteristic polynomial after removing (x + gamma_h)."""
    a: float
    b: float
    c: float

    def q(self, x):
        return ((x + self.a) * x + self.b) * x + self.c

    def roots(self) -> np.ndarray:
        return np.roots([1.0, self.a, self.b, self.c])

    @property
    def complex_pair_decays(self) -> bool:
        return self.q(-self.a) < 0


def ee_charpoly_coeffs(params: ModelParams) -> CharPoly:
    _require_endemic(params)
    theta, gamma_i, gamma_c, eps, r = params.theta, params.gamma_i, params.gamma_c, params.eps, params.r0
    weighted = (theta * gamma_i ** 2 + (1 - theta) * gamma_c ** 2) / (theta * gamma_i + (1 - theta) * gamma_c)
    return CharPoly(
        a=weighted + eps * r,
        b=eps * (r * (gamma_i + gamma_c) - params.beta / r),
        c=eps * gamma_i * gamma_c * (r - 1),
    )


def ee_eigenvalues(params: ModelParams) -> np.ndarray:
    return np.concatenate([[complex(-params.gamma_h)], ee_charpoly_coeffs(params).roots().astype(complex)])


class ThresholdReason(enum.Enum):
    EXISTS = "exists"
    NO_EPIDEMIC = "no-epidemic"
    ALWAYS_EPIDEMIC = "always-epidemic"
    THETA_INDEPENDENT = "theta-independent"


class ThetaStar(NamedTuple):
    value: Optional[float]
    reason: ThresholdReason


def theta_star(params: ModelParams) -> ThetaStar:
    """
    Severity at which R0 = 1. It lies in (0, 1) iff beta is strictly between gamma_i and gamma_c
        (for ordered rates: gamma_i < beta < gamma_c).
    """
    gamma_i, gamma_c, beta = params.gamma_i, params.gamma_c, params.beta
    if gamma_i == gamma_c:
        return ThetaStar(None, ThresholdReason.THETA_INDEPENDENT)

    low, high = min(gamma_i, gamma_c), max(gamma_i, gamma_c)
    if low < beta < high:
        value = (1 / gamma_i - 1 / beta) / (1 / gamma_i - 1 / gamma_c)
        return ThetaStar(value, ThresholdReason.EXISTS)
    if beta <= low:
        return ThetaStar(None, ThresholdReason.NO_EPIDEMIC)
    return ThetaStar(None, ThresholdReason.ALWAYS_EPIDEMIC)


@dataclasses.dataclass(frozen=True)
class EquilibriumReport:
    r0: float
    rbar0: float
    dfe: State
    dfe_eigenvalues: Tuple[ModalValue, ...]
    dfe_stable: bool
    ee: Optional[State] = None
    ee_charpoly: Optional[CharPoly] = None
    ee_locally_stable: Optional[bool] = None
    theta_star: Optional[float] = None

    def as_dict(self) -> dict:
        data = {
            "r0": self.r0,
            "rbar0": self.rbar0,
            "dfe_stable": self.dfe_stable,
            "theta_star": self.theta_star,
        }
        for modal in self.dfe_eigenvalues:
            data[f"dfe_eig_{modal.role.value}"] = modal.value
        if self.ee is not None:
            data.update({"ee_S": self.ee.s, "ee_I": self.ee.i, "ee_C": self.ee.c, "ee_H": self.ee.h})
            data.update({"ee_a": self.ee_charpoly.a, "ee_b": self.ee_charpoly.b, "ee_c": self.ee_charpoly.c})
            data["ee_locally_stable"] = self.ee_locally_stable
        return data


def equilibrium_report(params: ModelParams) -> EquilibriumReport:
    report = EquilibriumReport(
        r0=params.r0,
        rbar0=params.rbar0,
        dfe=disease_free_state(),
        dfe_eigenvalues=dfe_eigenvalues(params),
        dfe_stable=params.r0 < 1,
        theta_star=theta_star(params).value,
    )
    if params.r0 <= 1 or params.theta == 0:
        return report

    charpoly = ee_charpoly_coeffs(params)
    return dataclasses.replace(
        report,
        ee=endemic_equilibrium(params),
        ee_charpoly=charpoly,
        ee_locally_stable=bool(np.all(ee_eigenvalues(params).real < 0)),
    )


class Branch(enum.Enum):
    DFE = "DFE"
    EE = "EE"


@dataclasses.dataclass(frozen=True)
class BifurcationBranch:
    branch_id: Branch
    beta_grid: np.ndarray
    s: np.ndarray
    i: np.ndarray
    c: np.ndarray
    h: np.ndarray
    stable: np.ndarray
    # X2 / (1 - 1/R0), independent of beta; NaN on the DFE branch.
    p_i: np.ndarray
    p_c: np.ndarray
    p_h: np.ndarray

    def __len__(self):
        return len(self.beta_grid)


def _sirs_endemic_equilibrium(params: ModelParams) -> Tuple[State, np.ndarray]:
    """
    Endemic equilibrium at theta = 0, where nobody takes the critical course and the model is a plain
        SIRS; C and H decouple with eigenvalues -gamma_c and -gamma_h.
    """
    beta, gamma_i, eps = params.beta, params.gamma_i, params.eps
    s = 1 / params.r0
    i = eps * (1 - s) / (gamma_i + eps)
    susceptible_infective = np.array([
        [-beta * i - eps, -beta * s - eps],
        [beta * i, 0.0],
    ])
    eigenvalues = np.concatenate([
        [complex(-params.gamma_c), complex(-params.gamma_h)],
        np.linalg.eigvals(susceptible_infective).astype(complex),
    ])
    return State(s=s, i=i, c=0.0, h=0.0), eigenvalues


def bifurcation_diagram(params: ModelParams, beta_grid: Sequence[float]) -> List[BifurcationBranch]:
    """
    Equilibrium branches over beta; params.beta is ignored.
    The DFE covers the whole grid, the EE only exists beyond the transcritical point beta = 1 / rbar0.
    """
    betas = np.asarray(beta_grid, dtype=float)
    if np.any(betas <= 0) or np.any(np.diff(betas) < 0):
        raise ValueError("beta_grid must be positive and sorted ascending.")

    threshold = 1 / params.rbar0
    zeros = np.zeros_like(betas)
    nans = np.full_like(betas, np.nan)
    dfe = BifurcationBranch(
        branch_id=Branch.DFE,
        beta_grid=betas,
        s=np.ones_like(betas),
        i=zeros, c=zeros, h=zeros,
        stable=betas < threshold,
        p_i=nans, p_c=nans, p_h=nans,
    )

    endemic_betas = betas[betas > threshold]
    rows = []
    for beta in endemic_betas:
        at_beta = params.with_beta(float(beta))
        if at_beta.theta == 0:
            ee, eigenvalues = _sirs_endemic_equilibrium(at_beta)
        else:
            ee, eigenvalues = endemic_equilibrium(at_beta), ee_eigenvalues(at_beta)
        scale = 1 - 1 / at_beta.r0
        stable = bool(np.all(eigenvalues.real < 0))
        rows.append((ee.s, ee.i, ee.c, ee.h, stable, ee.i / scale, ee.c / scale, ee.h / scale))

    columns = list(zip(*rows)) if rows else [()] * 8
    ee_branch = BifurcationBranch(
        branch_id=Branch.EE,
        beta_grid=endemic_betas,
        s=np.array(columns[0], dtype=float),
        i=np.array(columns[1], dtype=float),
        c=np.array(columns[2], dtype=float),
        h=np.array(columns[3], dtype=float),
        stable=np.array(columns[4], dtype=bool),
        p_i=np.array(columns[5], dtype=float),
        p_c=np.array(columns[6], dtype=float),
        p_h=np.array(columns[7], dtype=float),
    )
    return [dfe, ee_branch]
