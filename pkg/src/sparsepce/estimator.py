"""scikit-learn compatible regressor wrapping the sparse PCE fitters."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .inputs import ExperimentalDesign, Gaussian, InputModel, Uniform, marginal_from_dict
from .lar import DEFAULT_PATIENCE, fit_degree_adaptive


def _resolve_marginals(marginals, X):
    """Build an InputModel from the ``marginals`` parameter.

    ``None`` means independent uniforms over the observed range of each
    column. A single marginal (or dict) is broadcast to all columns.
    """
    m = X.shape[1]
    if marginals is None:
        lo, hi = X.min(axis=0), X.max(axis=0)
        span = np.where(hi > lo, hi - lo, 1.0)
        return InputModel(tuple(Uniform(a, a + s) for a, s in zip(lo, span)))
    if isinstance(marginals, InputModel):
        return marginals
    if isinstance(marginals, (Uniform, Gaussian, dict)):
        marginals = [marginals] * m
    items = [marginal_from_dict(d) if isinstance(d, dict) else d for d in marginals]
    return InputModel(tuple(items))


class SparsePCERegressor(RegressorMixin, BaseEstimator):
    """Sparse polynomial chaos regressor.

    Parameters
    ----------
    method : {"hlar", "lar"}
        ``"lar"`` selects terms from an a-priori truncated candidate set;
        ``"hlar"`` starts from univariate candidates and adds rank-2
        interactions of selected terms.
    degrees : int or sequence of int
        Maximal degrees tried; an int ``p`` means ``1..p``.
    q : float
        Hyperbolic truncation exponent in (0, 1].
    r : int or None
        Maximal interaction rank for ``"lar"`` (``"hlar"`` is limited to 2).
    child_truncation : {"per_dimension", "total_degree", "qnorm"}
        Degree bound on generated interactions (``"hlar"`` only).
    marginals : InputModel, marginal, list of marginals, or None
        Input distribution; ``None`` uses uniforms on the training range.
    loo_correction : bool
        Select models with the finite-sample corrected LOO error.
    patience : int
        LOO no-improvement window along a path.

    Attributes
    ----------
    model_ : SparsePceModel
    basis_ : list of MultiIndex
    coef_ : ndarray
        Coefficients of ``basis_`` (the constant term is first).
    intercept_ : float
    loo_error_ : float
    best_degree_ : int
    """

    def __init__(
        self,
        method="hlar",
        degrees=10,
        q=1.0,
        r=2,
        child_truncation="per_dimension",
        marginals=None,
        loo_correction=True,
        patience=DEFAULT_PATIENCE,
    ):
        self.method = method
        self.degrees = degrees
        self.q = q
        self.r = r
        self.child_truncation = child_truncation
        self.marginals = marginals
        self.loo_correction = loo_correction
        self.patience = patience

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        degrees = range(1, self.degrees + 1) if np.isscalar(self.degrees) else self.degrees
        input_model = _resolve_marginals(self.marginals, X)
        ed = ExperimentalDesign(X, y)
        self.model_ = fit_degree_adaptive(
            ed,
            input_model,
            degrees,
            method=self.method,
            q=self.q,
            r=self.r,
            child_truncation=self.child_truncation,
            patience=self.patience,
            loo_correction=self.loo_correction,
        )
        self.input_model_ = input_model
        self.basis_ = self.model_.basis
        self.coef_ = self.model_.coefficients
        self.intercept_ = float(self.coef_[0])
        self.loo_error_ = self.model_.loo_error
        self.best_degree_ = self.model_.best_degree
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = validate_data(self, X, reset=False)
        return self.model_.predict(X)

    def moments(self):
        """Mean and variance of the fitted expansion."""
        check_is_fitted(self, "model_")
        return self.model_.moments()
