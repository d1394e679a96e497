import numpy as np
from hypothesis import strategies as st

from severity_lab.model import ModelParams, vector_field

OSCILLATING = ModelParams(beta=1.0, theta=0.35, gamma_i=0.6, gamma_c=0.8, gamma_h=0.4, eps=0.01)
DAMPED = ModelParams(beta=1.0, theta=0.2, gamma_i=0.2, gamma_c=0.3, gamma_h=0.15, eps=0.01)
EQUAL_RECOVERY = ModelParams(beta=1.0, theta=0.35, gamma_i=0.6, gamma_c=0.6, gamma_h=0.2, eps=0.01)
CASE_1 = ModelParams(beta=1.5, theta=0.5, gamma_i=0.6, gamma_c=0.8, gamma_h=0.4, eps=0.01)
CASE_2 = ModelParams(beta=1.0, theta=0.5, gamma_i=0.6, gamma_c=0.9, gamma_h=0.4, eps=0.01)
CASE_3 = ModelParams(beta=0.7, theta=0.3, gamma_i=0.6, gamma_c=0.8, gamma_h=0.4, eps=0.01)


def numerical_jacobian(params: ModelParams, y, step: float = 1e-6) -> np.ndarray:
    """Central differences; exact up to rounding because the vector field is quadratic."""
    y = np.asarray(y, dtype=float)
    columns = []
    for k in range(len(y)):
        shift = np.zeros_like(y)
        shift[k] = step
        columns.append((vector_field(params, y + shift) - vector_field(params, y - shift)) / (2 * step))
    return np.column_stack(columns)


def random_params(rng: np.random.Generator, ordered: bool = True, eps: float = 0.001) -> ModelParams:
    gamma_i, gamma_c = rng.uniform(0.1, 2.0, size=2)
    if ordered and gamma_i > gamma_c:
        gamma_i, gamma_c = gamma_c, gamma_i
    return ModelParams(
        beta=rng.uniform(0.1, 2.0),
        theta=rng.uniform(0.0, 1.0),
        gamma_i=gamma_i,
        gamma_c=gamma_c,
        gamma_h=rng.uniform(0.1, 2.0),
        eps=eps,
        allow_unordered=not ordered,
    )


rates = st.floats(min_value=0.1, max_value=2.0, allow_nan=False)
probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def model_params(draw, eps=st.floats(min_value=0.0, max_value=0.01)):
    gamma_i = draw(rates)
    gamma_c = draw(st.floats(min_value=gamma_i, max_value=3.0))
    return ModelParams(
        beta=draw(rates),
        theta=draw(probabilities),
        gamma_i=gamma_i,
        gamma_c=gamma_c,
        gamma_h=draw(rates),
        eps=draw(eps),
    )


@st.composite
def simplex_points(draw):
    """(S, I, C, H) with non-negative entries summing to at most 1."""
    weights = draw(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=5, max_size=5))
    total = sum(weights)
    if total == 0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    return np.array(weights[:4]) / total
