"""Design matrices, least squares and leave-one-out error."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateOutput,
    DimensionMismatch,
    InvalidInput,
    RankDeficient,
    SaturatedLeverage,
)
from .multiindex import MultiIndex
from .polynomials import DEFAULT_MAX_DEGREE, PolyFamily, univariate_table

RANK_RTOL = 1e-12
LEVERAGE_TOL = 1e-10


@dataclass
class DesignMatrix:
    """Regressor matrix ``values[i, j] = psi_{alpha_j}(u_i)`` with its column labels."""

    values: np.ndarray
    column_index: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DimensionMismatch("design matrix must be two-dimensional")
        if self.column_index and len(self.column_index) != self.values.shape[1]:
            raise DimensionMismatch("one multi-index per column is required")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInput("design matrix has non-finite entries")

    @property
    def shape(self):
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


class BasisEvaluator:
    """Caches univariate tables of a fixed point set to evaluate columns on demand."""

    def __init__(self, u, families, max_degree):
        u = np.asarray(u, dtype=float)
        if u.ndim != 2:
            raise DimensionMismatch("standardized points must form an (N, M) array")
        families = [PolyFamily.coerce(f) for f in families]
        if len(families) != u.shape[1]:
            raise DimensionMismatch(
                f"{len(families)} families given for {u.shape[1]} input dimensions"
            )
        self.n_points, self.dimension = u.shape
        self.families = families
        self.tables = [
            univariate_table(f, max_degree, u[:, i], degree_cap=max(max_degree, DEFAULT_MAX_DEGREE))
            for i, f in enumerate(families)
        ]

    def column(self, alpha):
        col = np.ones(self.n_points)
        for i, d in enumerate(alpha):
            if d:
                col = col * self.tables[i][:, d]
        return col

    def matrix(self, basis):
        out = np.empty((self.n_points, len(basis)))
        for j, alpha in enumerate(basis):
            out[:, j] = self.column(alpha)
        return out


def build_design_matrix(u, basis, families):
    """Evaluate every basis polynomial at every standardized point.

    Parameters
    ----------
    u : array_like, shape (N, M)
        Points already mapped to the families' standard domains.
    basis : sequence of MultiIndex
    families : sequence of PolyFamily, length M

    Returns
    -------
    DesignMatrix
    """
    basis = [MultiIndex(a) for a in basis]
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if any(len(a) != u.shape[1] for a in basis):
        raise DimensionMismatch("multi-index length differs from the input dimension")
    max_degree = max((max(a, default=0) for a in basis), default=0)
    evaluator = BasisEvaluator(u, families, max_degree)
    return DesignMatrix(evaluator.matrix(basis), basis)


def _as_problem(psi, y):
    psi = np.asarray(psi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if psi.ndim != 2 or psi.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"matrix shape {psi.shape} incompatible with {y.shape[0]} outputs")
    return psi, y


def _svd(psi):
    n, k = psi.shape
    if k > n:
        raise RankDeficient(n, k, f"{k} columns exceed {n} rows")
    U, s, Vt = np.linalg.svd(psi, full_matrices=False)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    if rank < k:
        raise RankDeficient(rank, k)
    return U, s, Vt


def ols_solve(psi, y):
    """Least-squares coefficients via the singular value decomposition.

    Raises
    ------
    RankDeficient
        When a singular value falls below ``1e-12`` times the largest.
    """
    psi, y = _as_problem(psi, y)
    U, s, Vt = _svd(psi)
    return Vt.T @ ((U.T @ y) / s)


def leverages(psi):
    """Diagonal of the hat matrix ``Psi (Psi^T Psi)^-1 Psi^T``."""
    U, _, _ = _svd(np.asarray(psi, dtype=float))
    return np.einsum("ij,ij->i", U, U)


def _variance(y):
    if y.shape[0] < 2:
        raise DegenerateOutput("at least two outputs are needed for a variance")
    var = np.var(y, ddof=1)
    if not var > 0:
        raise DegenerateOutput("output sample has zero variance")
    return var


def loo_correction_factor(psi):
    """Finite-sample inflation ``N/(N-K) * (1 + tr((Psi^T Psi / N)^-1) / N)``."""
    psi = np.asarray(psi, dtype=float)
    n, k = psi.shape
    _, s, _ = _svd(psi)
    trace_inv = n * np.sum(1.0 / s**2)
    return n / (n - k) * (1.0 + trace_inv / n)


def loo_from_residuals(residuals, h, y, correction=1.0):
    """Normalized LOO error from in-sample residuals and leverages."""
    bad = np.flatnonzero(h >= 1.0 - LEVERAGE_TOL)
    if bad.size:
        raise SaturatedLeverage(int(bad[0]), float(h[bad[0]]))
    return correction * np.mean((residuals / (1.0 - h)) ** 2) / _variance(y)


def loo_error(psi, y, c, correction=False):
    """Analytic leave-one-out error normalized by the sample variance of ``y``.

    Uses the hat-matrix identity ``y_i - yhat_(-i) = (y_i - yhat_i) / (1 - h_i)``,
    exact for linear least squares. ``correction=True`` multiplies by the
    finite-sample factor of :func:`loo_correction_factor`.
    """
    psi, y = _as_problem(psi, y)
    var = _variance(y)
    residuals = y - psi @ np.asarray(c, dtype=float)
    h = leverages(psi)
    factor = loo_correction_factor(psi) if correction else 1.0
    bad = np.flatnonzero(h >= 1.0 - LEVERAGE_TOL)
    if bad.size:
        raise SaturatedLeverage(int(bad[0]), float(h[bad[0]]))
    return factor * np.mean((residuals / (1.0 - h)) ** 2) / var


def empirical_error(psi, y, c):
    """Mean squared residual normalized by the sample variance of ``y``."""
    psi, y = _as_problem(psi, y)
    var = _variance(y)
    residuals = y - psi @ np.asarray(c, dtype=float)
    return np.mean(residuals**2) / var
