"""Sparse polynomial chaos expansions by least angle regression.

Two selection strategies share one path engine: ``LAR`` over an a-priori
truncated candidate set, and ``hLAR``, whose candidate set starts with
univariate terms and is enriched with rank-2 interactions of selected
terms (heredity principle).
"""

from .benchmarks import (
    get_benchmark,
    pce_moments,
    schwefel_mod,
    sobol_g,
    sobol_g_moments,
    validation_error,
)
from .estimator import SparsePCERegressor
from .exceptions import PCEError
from .heredity import ChildTruncation, Heredity, HeredityConfig, hlar_fit
from .inputs import ExperimentalDesign, Gaussian, InputModel, Uniform, lhs_sample
from .lar import SparsePceModel, fit_degree_adaptive, fit_reference, lar_path
from .multiindex import MultiIndex, TruncationSpec, generate_candidate_set
from .polynomials import PolyFamily, eval_multivariate, eval_univariate

__version__ = "0.1.0"

__all__ = [
    "ChildTruncation",
    "ExperimentalDesign",
    "Gaussian",
    "Heredity",
    "HeredityConfig",
    "InputModel",
    "MultiIndex",
    "PCEError",
    "PolyFamily",
    "SparsePCERegressor",
    "SparsePceModel",
    "TruncationSpec",
    "Uniform",
    "eval_multivariate",
    "eval_univariate",
    "fit_degree_adaptive",
    "fit_reference",
    "generate_candidate_set",
    "get_benchmark",
    "hlar_fit",
    "lar_path",
    "lhs_sample",
    "pce_moments",
    "schwefel_mod",
    "sobol_g",
    "sobol_g_moments",
    "validation_error",
]
