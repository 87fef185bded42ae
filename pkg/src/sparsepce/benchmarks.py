"""Analytic benchmark functions and surrogate validation metrics."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateOutput, DimensionMismatch, OutOfSupport
from .inputs import InputModel, Uniform

SOBOL_C = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 500.0)
SCHWEFEL_DIM = 20
SCHWEFEL_S1 = (1, 3, 5, 6, 8)
SCHWEFEL_S2 = (15, 18, 20)
DEFAULT_VALIDATION_SIZE = 100_000


def _points(x, dim, low, high):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != dim:
        raise DimensionMismatch(f"expected {dim} coordinates, got {x.shape[1]}")
    slack = 1e-12 * (high - low)
    if np.any(x < low - slack) or np.any(x > high + slack) or not np.all(np.isfinite(x)):
        raise OutOfSupport(f"points must lie in [{low}, {high}]^{dim}")
    return x, single


def sobol_g(x, c=SOBOL_C):
    """Sobol' g-function ``prod_i (|4 x_i - 2| + c_i) / (1 + c_i)`` on the unit cube.

    Accepts a single point or an (L, M) array.
    """
    c = np.asarray(c, dtype=float)
    x, single = _points(x, c.shape[0], 0.0, 1.0)
    y = np.prod((np.abs(4.0 * x - 2.0) + c) / (1.0 + c), axis=1)
    return float(y[0]) if single else y


def sobol_g_moments(c=SOBOL_C):
    """Exact mean and variance of the g-function under independent U(0, 1) inputs."""
    c = np.asarray(c, dtype=float)
    return 1.0, float(np.prod(1.0 + 1.0 / (3.0 * (1.0 + c) ** 2)) - 1.0)


def _schwefel_terms(x):
    i = np.arange(1, SCHWEFEL_DIM + 1) / SCHWEFEL_DIM
    return (i + 0.5) * x * np.sin(np.sqrt(i * np.abs(x)))


def schwefel_mod(x):
    """Modified 20-dimensional Schwefel function with an S1 x S2 interaction term."""
    x, single = _points(x, SCHWEFEL_DIM, -500.0, 500.0)
    terms = _schwefel_terms(x)
    s1 = np.asarray(SCHWEFEL_S1) - 1
    s2 = np.asarray(SCHWEFEL_S2) - 1
    y = -terms.sum(axis=1) + terms[:, s1].sum(axis=1) * x[:, s2].sum(axis=1) / 3000.0
    return float(y[0]) if single else y


def validation_error(y_true, y_pred):
    """Relative validation error ``sum (y - yhat)^2 / sum (y - mean y)^2``."""
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.shape != y_pred.shape:
        raise DimensionMismatch("prediction and reference lengths differ")
    if y_true.shape[0] < 2:
        raise DegenerateOutput("at least two validation points are needed")
    denom = np.sum((y_true - y_true.mean()) ** 2)
    if not denom > 0:
        raise DegenerateOutput("validation outputs have zero variance")
    return float(np.sum((y_true - y_pred) ** 2) / denom)


def pce_moments(model):
    """Mean (constant coefficient) and variance (sum of squared others) of a PCE."""
    return model.moments()


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    dimension: int
    input_model: InputModel
    function: object = field(repr=False)
    parameters: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.function(x)


BENCHMARKS = {
    "sobolg": BenchmarkSpec(
        "SobolG", 8, InputModel.iid(Uniform(0.0, 1.0), 8), sobol_g, {"c": SOBOL_C}
    ),
    "schwefelmod": BenchmarkSpec(
        "SchwefelMod",
        SCHWEFEL_DIM,
        InputModel.iid(Uniform(-500.0, 500.0), SCHWEFEL_DIM),
        schwefel_mod,
        {"S1": SCHWEFEL_S1, "S2": SCHWEFEL_S2},
    ),
}
_ALIASES = {"sobol": "sobolg", "schwefel": "schwefelmod"}


def get_benchmark(name):
    key = name.lower().replace("-", "").replace("_", "").replace("'", "")
    key = _ALIASES.get(key, key)
    try:
        return BENCHMARKS[key]
    except KeyError:
        known = ", ".join(b.name for b in BENCHMARKS.values())
        raise KeyError(f"unknown benchmark {name!r}; available: {known}") from None
