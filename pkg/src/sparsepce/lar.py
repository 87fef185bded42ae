"""Least angle regression with hybrid OLS refits and LOO-based model selection.

The path works on centered, unit-norm copies of the candidate columns. The
constant term never competes: the response is centered and every hybrid
refit carries an explicit intercept.
"""

import warnings
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import (
    DimensionMismatch,
    InvalidTruncation,
    NonFiniteCorrelation,
    NumericalError,
    PCEError,
    RankDeficient,
    SaturatedLeverage,
)
from .inputs import ExperimentalDesign, InputModel
from .multiindex import MultiIndex, TruncationSpec, generate_candidate_set
from .regression import LEVERAGE_TOL, BasisEvaluator

DEFAULT_PATIENCE = 10
DEGREE_PATIENCE = 2
# model selection uses the finite-sample corrected LOO unless asked otherwise
LOO_CORRECTION = True
# remainder norm of a unit column after orthogonalization below which it is
# treated as linearly dependent on the active set
DEPENDENCE_TOL = 1e-10
TIE_RTOL = 1e-12
STEP_EPS = 1e-12
# normalized LOO differences below this are rounding noise of an exact fit;
# such steps do not count as improvements, so the sparser model is kept
LOO_NOISE_FLOOR = 1e-20


@dataclass
class LarStep:
    """One iteration of a LAR-type path.

    ``coefficients`` are the hybrid (OLS) coefficients of
    ``[constant] + active`` in raw column units.
    """

    selected: MultiIndex
    active: tuple
    coefficients: np.ndarray
    loo_error: float
    empirical_error: float
    lar_empirical_error: float
    entry_correlations: np.ndarray = field(repr=False)
    step_length: float = 1.0


@dataclass
class LarPath:
    steps: list
    best_step: int | None
    stop_reason: str
    dropped: list = field(default_factory=list)

    @property
    def best(self):
        return None if self.best_step is None else self.steps[self.best_step]

    def selected(self):
        return [s.selected for s in self.steps]


class LarEngine:
    """Mutable state of a single LAR path.

    Holds the centered response, the current LAR residual and an
    incrementally updated QR factorization of the standardized active
    columns, from which both the equiangular move and the hybrid refit
    (with intercept) are obtained without refactorizing.
    """

    def __init__(self, y, loo_correction=LOO_CORRECTION):
        self.y = np.asarray(y, dtype=float)
        self.n = self.y.shape[0]
        self.y_mean = float(self.y.mean())
        self.yc = self.y - self.y_mean
        self.var = float(np.var(self.y, ddof=1)) if self.n > 1 else 0.0
        self.residual = self.yc.copy()
        self.Q = np.empty((self.n, 0))
        self.R = np.empty((0, 0))
        self.beta = np.empty(0)
        self.labels = []
        self.columns = []  # standardized active columns
        self.raw = []  # (mean, norm) per active column
        self.loo_correction = loo_correction

    @staticmethod
    def standardize(col):
        """Centered, unit-norm copy of ``col`` with its (mean, norm), or None if constant."""
        mean = col.mean()
        centered = col - mean
        norm = np.linalg.norm(centered)
        if not np.isfinite(norm):
            raise NonFiniteCorrelation("candidate column has non-finite values")
        if norm <= 1e-12 * max(1.0, np.sqrt(col.shape[0]) * abs(mean)):
            return None
        return centered / norm, mean, norm

    @property
    def size(self):
        return len(self.columns)

    def correlations(self, X):
        c = X.T @ self.residual
        if not np.all(np.isfinite(c)):
            raise NonFiniteCorrelation("correlation with the residual is not finite")
        return c

    def add(self, label, standardized, mean, norm):
        """Append a column to the active set; raises RankDeficient if dependent."""
        v = standardized.copy()
        k = self.size
        r = np.zeros(k + 1)
        for _ in range(2):
            if k:
                proj = self.Q.T @ v
                v -= self.Q @ proj
                r[:k] += proj
        rho = np.linalg.norm(v)
        if rho < DEPENDENCE_TOL:
            raise RankDeficient(k, k + 1, "candidate column is linearly dependent on the active set")
        r[k] = rho
        self.Q = np.column_stack([self.Q, v / rho])
        R = np.zeros((k + 1, k + 1))
        R[:k, :k] = self.R
        R[:, k] = r
        self.R = R
        self.beta = np.append(self.beta, 0.0)
        self.labels.append(label)
        self.columns.append(standardized)
        self.raw.append((mean, norm))

    def active_matrix(self):
        return np.column_stack(self.columns) if self.columns else np.empty((self.n, 0))

    def move(self, candidates):
        """Advance active coefficients until a candidate ties with the active set.

        The direction is the least-squares fit of the residual on the
        active columns, which reduces all active correlations by the same
        factor ``1 - gamma``; when they are equal this is the classical
        equiangular direction. Returns the step length ``gamma``.
        """
        XA = self.active_matrix()
        cA = XA.T @ self.residual
        C = np.max(np.abs(cA))
        # (XA^T XA) delta = cA with XA = Q R
        z = _solve_triangular(self.R.T, cA, lower=True)
        delta = _solve_triangular(self.R, z)
        u = self.Q @ z
        gamma = 1.0
        if candidates is not None and candidates.shape[1]:
            c = candidates.T @ self.residual
            a = candidates.T @ u
            with np.errstate(divide="ignore", invalid="ignore"):
                roots = np.concatenate([(C - c) / (C - a), (C + c) / (C + a)])
            roots = roots[np.isfinite(roots) & (roots > STEP_EPS)]
            if roots.size:
                gamma = min(1.0, float(roots.min()))
        self.residual = self.residual - gamma * u
        self.beta = self.beta + gamma * delta
        return gamma

    def hybrid(self):
        """OLS refit of ``[1] + active`` on the raw response.

        Returns raw-unit coefficients (constant first), LOO and empirical errors.
        """
        qy = self.Q.T @ self.yc
        fitted = self.Q @ qy
        resid = self.yc - fitted
        h = 1.0 / self.n + np.einsum("ij,ij->i", self.Q, self.Q)
        bad = np.flatnonzero(h >= 1.0 - LEVERAGE_TOL)
        if bad.size:
            raise SaturatedLeverage(int(bad[0]), float(h[bad[0]]))
        b = _solve_triangular(self.R, qy)
        means = np.array([m for m, _ in self.raw])
        norms = np.array([s for _, s in self.raw])
        slopes = b / norms
        coefficients = np.concatenate([[self.y_mean - slopes @ means], slopes])
        loo = np.mean((resid / (1.0 - h)) ** 2) / self.var
        if self.loo_correction:
            loo *= self.correction_factor(means, norms)
        emp = np.mean(resid**2) / self.var
        return coefficients, float(loo), float(emp)

    def correction_factor(self, means, norms):
        """Finite-sample LOO inflation for the raw design ``[1] + active``.

        The raw design factors as ``[1/sqrt(N), Q] B`` with ``B`` upper
        triangular, so ``tr((Psi^T Psi)^-1) = ||B^-1||_F^2``.
        """
        k = self.size + 1
        if k >= self.n:
            return np.inf
        root_n = np.sqrt(self.n)
        B = np.zeros((k, k))
        B[0, 0] = root_n
        B[0, 1:] = root_n * means
        B[1:, 1:] = self.R * norms
        B_inv = solve_triangular(B, np.eye(k))
        trace_inv = float(np.sum(B_inv**2))
        return self.n / (self.n - k) * (1.0 + trace_inv)

    def lar_empirical_error(self):
        return float(np.mean(self.residual**2) / self.var)


def _solve_triangular(R, b, lower=False):
    if R.shape[0] == 0:
        return np.empty(0)
    return solve_triangular(R, b, lower=lower)


class CandidatePool:
    """Standardized candidate columns that can grow and shrink during a path."""

    def __init__(self, n):
        self.n = n
        self.labels = []
        self.keys = []
        self.stats = []
        self._matrix = np.empty((n, 64))
        self._alive = np.zeros(64, dtype=bool)
        self.index = {}

    def __len__(self):
        return int(self._alive[: len(self.labels)].sum())

    def __contains__(self, label):
        j = self.index.get(label)
        return j is not None and bool(self._alive[j])

    def add(self, label, standardized, mean, norm, key):
        j = len(self.labels)
        if j == self._matrix.shape[1]:
            grow = max(64, j)
            self._matrix = np.concatenate([self._matrix, np.empty((self.n, grow))], axis=1)
            self._alive = np.concatenate([self._alive, np.zeros(grow, dtype=bool)])
        self._matrix[:, j] = standardized
        self._alive[j] = True
        self.labels.append(label)
        self.keys.append(key)
        self.stats.append((mean, norm))
        self.index[label] = j

    def remove(self, j):
        self._alive[j] = False

    def alive_ids(self):
        return np.flatnonzero(self._alive[: len(self.labels)])

    def column(self, j):
        return self._matrix[:, j]

    def matrix(self, ids):
        return self._matrix[:, ids]

    def argmax(self, correlations, ids):
        """Candidate with the largest |correlation|; near-ties go to the lowest key."""
        mags = np.abs(correlations)
        top = mags.max()
        tied = ids[mags >= top * (1.0 - TIE_RTOL)]
        if tied.size == 1:
            return int(tied[0])
        return int(min(tied, key=lambda j: self.keys[j]))


def _label_key(label, position):
    if isinstance(label, tuple):
        return MultiIndex(label).sort_key()
    return (position,)


def lar_path(psi, y, max_terms=None, column_index=None, patience=DEFAULT_PATIENCE, loo_correction=LOO_CORRECTION):
    """Run hybrid LAR over a fixed candidate basis.

    Parameters
    ----------
    psi : array_like or DesignMatrix, shape (N, K)
        Candidate regressors. Columns labelled with the zero multi-index, or
        constant on the design, are kept out of the competition: an intercept
        is always part of every refit.
    y : array_like, shape (N,)
    max_terms : int, optional
        Maximum number of selected (non-constant) terms, default ``min(K, N - 1)``.
    column_index : sequence, optional
        Labels of the columns, multi-indices preferably; taken from ``psi`` when
        it is a DesignMatrix. They drive tie-breaking.
    patience : int or None
        Stop after this many consecutive steps without LOO improvement.

    Returns
    -------
    LarPath
    """
    X = np.asarray(psi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"matrix shape {X.shape} incompatible with {y.shape[0]} outputs")
    n, K = X.shape
    if column_index is None:
        column_index = getattr(psi, "column_index", None) or list(range(K))
    if len(column_index) != K:
        raise DimensionMismatch("one label per column is required")
    labels = [MultiIndex(c) if isinstance(c, tuple) else c for c in column_index]

    engine = LarEngine(y, loo_correction=loo_correction)
    pool = CandidatePool(n)
    dropped = []
    for j, label in enumerate(labels):
        if isinstance(label, MultiIndex) and label.rank() == 0:
            continue
        st = engine.standardize(X[:, j])
        if st is None:
            dropped.append(label)
            continue
        pool.add(label, *st, key=_label_key(label, j))
    if dropped:
        warnings.warn(f"dropped {len(dropped)} candidate column(s) constant on the design", stacklevel=2)

    if max_terms is None:
        max_terms = min(len(pool), n - 1)
    return run_path(engine, pool, max_terms, patience, dropped=dropped)


def _improves(loo, best_loo):
    return loo < best_loo - LOO_NOISE_FLOOR


def run_path(engine, pool, max_terms, patience, dropped=(), select=None):
    """Drive ``engine`` over ``pool`` until a stop rule fires.

    ``select(engine, pool, ids, correlations)`` returns the pool index to
    activate and a dict of extra fields; the default picks the most
    correlated candidate. With extra fields, steps are built by
    ``extra.pop("step_type")``.
    """
    steps = []
    if engine.var <= 0:
        return LarPath(steps, None, "constant response", list(dropped))
    best, since_best = None, 0
    stop_reason = "maximum number of terms"
    while len(steps) < max_terms:
        ids = pool.alive_ids()
        if not ids.size:
            stop_reason = "candidates exhausted"
            break
        c = engine.correlations(pool.matrix(ids))
        if select is None:
            j, extra = pool.argmax(c, ids), {}
        else:
            j, extra = select(engine, pool, ids, c)
        step = _advance(engine, pool, j)
        if isinstance(step, str):
            stop_reason = step
            break
        if extra:
            step_type = extra.pop("step_type")
            step = step_type(**{f.name: getattr(step, f.name) for f in fields(step)}, **extra)
        steps.append(step)
        if best is None or _improves(step.loo_error, steps[best].loo_error):
            best, since_best = len(steps) - 1, 0
        else:
            since_best += 1
            if patience is not None and since_best >= patience:
                stop_reason = f"no LOO improvement in {patience} steps"
                break
    return LarPath(steps, best, stop_reason, list(dropped))


def _advance(engine, pool, j):
    """Activate candidate ``j``, move along the path and refit; a string means stop."""
    label = pool.labels[j]
    mean, norm = pool.stats[j]
    try:
        engine.add(label, pool.column(j), mean, norm)
    except RankDeficient as exc:
        return f"rank deficient active set: {exc}"
    pool.remove(j)
    entry = np.abs(engine.active_matrix().T @ engine.residual)
    gamma = engine.move(pool.matrix(pool.alive_ids()))
    try:
        coefficients, loo, emp = engine.hybrid()
    except SaturatedLeverage as exc:
        return f"saturated leverage: {exc}"
    return LarStep(
        selected=label,
        active=tuple(engine.labels),
        coefficients=coefficients,
        loo_error=loo,
        empirical_error=emp,
        lar_empirical_error=engine.lar_empirical_error(),
        entry_correlations=entry,
        step_length=gamma,
    )


@dataclass
class SparsePceModel:
    """Sparse PCE: retained multi-indices (constant first) and their coefficients."""

    basis: list
    coefficients: np.ndarray
    input_model: InputModel
    loo_error: float
    empirical_error: float
    truncation: TruncationSpec | None = None
    best_degree: int | None = None
    method: str = "LAR"
    seed: int | None = None
    options: dict = field(default_factory=dict)
    path: object = field(default=None, repr=False, compare=False)
    degree_log: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.basis = [MultiIndex(a) for a in self.basis]
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if len(self.basis) != self.coefficients.shape[0]:
            raise DimensionMismatch("basis and coefficients differ in length")

    @property
    def n_retained(self):
        return len(self.basis)

    @property
    def dimension(self):
        return self.input_model.dimension

    def predict(self, x):
        """Evaluate the expansion at physical points ``x`` of shape (L, M)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        u = self.input_model.standardize(x)
        max_degree = max((max(a) for a in self.basis if a), default=0)
        evaluator = BasisEvaluator(u, self.input_model.families, max_degree)
        return evaluator.matrix(self.basis) @ self.coefficients

    def moments(self):
        """Mean and variance implied by the orthonormal expansion."""
        mean, var = 0.0, 0.0
        for alpha, c in zip(self.basis, self.coefficients):
            if alpha.rank() == 0:
                mean += c
            else:
                var += c * c
        return float(mean), float(var)


def constant_model(ed, input_model, truncation=None, method="LAR", degree=None):
    zero = MultiIndex.zero(input_model.dimension)
    return SparsePceModel(
        basis=[zero],
        coefficients=[float(np.mean(ed.outputs))],
        input_model=input_model,
        loo_error=0.0,
        empirical_error=0.0,
        truncation=truncation,
        best_degree=degree,
        method=method,
        seed=ed.seed,
    )


def model_from_path(path, ed, input_model, truncation, method, degree):
    if path.best_step is None:
        if np.var(ed.outputs) == 0:
            return constant_model(ed, input_model, truncation, method, degree)
        raise NumericalError(f"path produced no admissible step ({path.stop_reason})")
    step = path.steps[path.best_step]
    zero = MultiIndex.zero(input_model.dimension)
    return SparsePceModel(
        basis=[zero, *step.active],
        coefficients=step.coefficients,
        input_model=input_model,
        loo_error=step.loo_error,
        empirical_error=step.empirical_error,
        truncation=truncation,
        best_degree=degree,
        method=method,
        seed=ed.seed,
        path=path,
    )


def _check_design(ed, input_model):
    if not isinstance(ed, ExperimentalDesign):
        raise TypeError("ed must be an ExperimentalDesign")
    if ed.dimension != input_model.dimension:
        raise DimensionMismatch(
            f"design has {ed.dimension} inputs, the input model {input_model.dimension}"
        )
    if ed.size < 3:
        raise DimensionMismatch("at least three design points are required")


def fit_reference(ed, spec, input_model, max_terms=None, patience=DEFAULT_PATIENCE, loo_correction=LOO_CORRECTION):
    """Sparse PCE by hybrid LAR over an a-priori truncated candidate set."""
    _check_design(ed, input_model)
    candidates = generate_candidate_set(input_model.dimension, spec)
    if len(candidates) <= 1:
        raise InvalidTruncation("truncation leaves no non-constant candidate")
    if np.var(ed.outputs) == 0:
        return constant_model(ed, input_model, spec, "LAR", spec.p)
    u = input_model.standardize(ed.inputs)
    evaluator = BasisEvaluator(u, input_model.families, spec.p)
    psi = evaluator.matrix(candidates)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        path = lar_path(
            psi, ed.outputs, max_terms=max_terms, column_index=candidates,
            patience=patience, loo_correction=loo_correction,
        )
    return model_from_path(path, ed, input_model, spec, "LAR", spec.p)


def fit_degree_adaptive(
    ed,
    input_model,
    degrees,
    method="lar",
    q=1.0,
    r=None,
    child_truncation="per_dimension",
    patience=DEFAULT_PATIENCE,
    degree_patience=DEGREE_PATIENCE,
    loo_correction=LOO_CORRECTION,
    callback=None,
):
    """Fit one model per maximal degree and keep the one with the smallest LOO error.

    The sweep stops after ``degree_patience`` consecutive degrees without
    improvement. ``method`` is ``"lar"`` (a-priori candidate set) or
    ``"hlar"`` (heredity-enriched candidates). ``callback(p, model)`` is
    called after every successful per-degree fit.
    """
    from .heredity import HeredityConfig, hlar_fit

    degrees = [int(p) for p in degrees]
    if not degrees or degrees != sorted(degrees):
        raise InvalidTruncation("degrees must be a non-empty ascending sequence")
    method = method.lower().replace("-", "")
    if method not in ("lar", "hlar"):
        raise ValueError(f"unknown method {method!r}")

    best, since_best, log, errors = None, 0, [], []
    for p in degrees:
        try:
            if method == "lar":
                model = fit_reference(
                    ed, TruncationSpec(p, q, r), input_model,
                    patience=patience, loo_correction=loo_correction,
                )
            else:
                config = HeredityConfig(p=p, q=q, child_truncation=child_truncation)
                model = hlar_fit(ed, config, input_model, patience=patience, loo_correction=loo_correction)
        except (NumericalError, InvalidTruncation) as exc:
            errors.append((p, exc))
            log.append((p, np.nan, 0))
            continue
        log.append((p, model.loo_error, model.n_retained))
        if callback is not None:
            callback(p, model)
        if best is None or _improves(model.loo_error, best.loo_error):
            best, since_best = model, 0
        else:
            since_best += 1
            if since_best >= degree_patience:
                break
        if best.loo_error <= LOO_NOISE_FLOOR:
            break
    if best is None:
        p, exc = errors[-1]
        raise exc
    best.degree_log = log
    if method == "lar":
        best.truncation = TruncationSpec(best.best_degree, q, r)
    return best


__all__ = [
    "LarEngine",
    "LarPath",
    "LarStep",
    "SparsePceModel",
    "fit_degree_adaptive",
    "fit_reference",
    "lar_path",
    "PCEError",
]
