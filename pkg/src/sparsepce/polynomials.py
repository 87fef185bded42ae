"""Orthonormal univariate polynomial families and tensor-product evaluation."""

import enum
import math

import numpy as np

from .exceptions import DegreeOverflow, DimensionMismatch, InvalidInput

DEFAULT_MAX_DEGREE = 50


class PolyFamily(enum.Enum):
    """Orthonormal polynomial family attached to an input marginal.

    ``LEGENDRE`` is orthonormal w.r.t. the uniform density 1/2 on [-1, 1],
    ``HERMITE`` (probabilists' convention) w.r.t. the standard normal density.
    """

    LEGENDRE = "legendre"
    HERMITE = "hermite"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidInput(f"unknown polynomial family {value!r}") from None


def _check_degree(degree, max_degree):
    if int(degree) != degree or degree < 0:
        raise InvalidInput(f"degree must be a non-negative integer, got {degree!r}")
    if degree > max_degree:
        raise DegreeOverflow(f"degree {degree} exceeds the cap {max_degree}")


def univariate_table(family, max_degree, u, degree_cap=DEFAULT_MAX_DEGREE):
    """Evaluate all orthonormal polynomials of degree 0..max_degree.

    Parameters
    ----------
    family : PolyFamily or str
    max_degree : int
        Highest degree to evaluate.
    u : array_like, shape (n,)
        Standardized coordinates.
    degree_cap : int
        Degrees above this raise :class:`DegreeOverflow`.

    Returns
    -------
    ndarray, shape (n, max_degree + 1)
        Column ``k`` holds the orthonormal degree-``k`` polynomial.
    """
    family = PolyFamily.coerce(family)
    _check_degree(max_degree, degree_cap)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1:
        raise DimensionMismatch("u must be one-dimensional")
    if not np.all(np.isfinite(u)):
        raise InvalidInput("non-finite standardized coordinate")

    n = u.shape[0]
    out = np.empty((n, max_degree + 1))
    out[:, 0] = 1.0
    if max_degree == 0:
        return out
    out[:, 1] = u
    if family is PolyFamily.LEGENDRE:
        for k in range(1, max_degree):
            out[:, k + 1] = ((2 * k + 1) * u * out[:, k] - k * out[:, k - 1]) / (k + 1)
        norms = np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0)
    else:
        for k in range(1, max_degree):
            out[:, k + 1] = u * out[:, k] - k * out[:, k - 1]
        norms = 1.0 / np.sqrt([float(math.factorial(k)) for k in range(max_degree + 1)])
    out *= norms
    return out


def eval_univariate(family, degree, u, max_degree=DEFAULT_MAX_DEGREE):
    """Value of the degree-``degree`` orthonormal polynomial at ``u``.

    Scalars in, scalar out; arrays are evaluated elementwise.

    >>> round(eval_univariate("legendre", 1, 1.0), 7)
    1.7320508
    """
    _check_degree(degree, max_degree)
    arr = np.asarray(u, dtype=float)
    values = univariate_table(family, int(degree), arr.ravel(), degree_cap=max_degree)
    result = values[:, int(degree)].reshape(arr.shape)
    return float(result) if result.ndim == 0 else result


def eval_multivariate(basis, alpha, u, max_degree=DEFAULT_MAX_DEGREE):
    """Tensor-product basis value ``prod_i psi_{alpha_i}(u_i)``.

    ``basis`` lists the family of each dimension (or ``(dimension, family)``
    pairs). Factors are multiplied in ascending dimension order.
    """
    families = [b[1] if isinstance(b, tuple) else b for b in basis]
    alpha = tuple(alpha)
    u = np.asarray(u, dtype=float)
    if not (len(families) == len(alpha) == u.shape[-1]):
        raise DimensionMismatch(
            f"basis has {len(families)} dimensions, alpha {len(alpha)}, u {u.shape[-1]}"
        )
    result = np.ones(u.shape[:-1]) if u.ndim > 1 else 1.0
    for i, (family, degree) in enumerate(zip(families, alpha)):
        if degree == 0:
            continue
        result = result * eval_univariate(family, degree, u[..., i], max_degree)
    return result


def gauss_rule(family, n_nodes):
    """Gauss quadrature nodes and weights for the family's probability measure."""
    family = PolyFamily.coerce(family)
    if family is PolyFamily.LEGENDRE:
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        return x, w / 2.0
    x, w = np.polynomial.hermite_e.hermegauss(n_nodes)
    return x, w / math.sqrt(2.0 * math.pi)
