"""Multi-indices and truncated candidate sets."""

from dataclasses import dataclass

from .exceptions import InvalidTruncation

QNORM_RTOL = 1e-9


class MultiIndex(tuple):
    """Tuple of per-dimension polynomial degrees.

    Behaves like a plain tuple (hashing, equality) and adds the norms used
    by the truncation schemes.
    """

    __slots__ = ()

    def __new__(cls, degrees):
        degrees = tuple(int(d) for d in degrees)
        if any(d < 0 for d in degrees):
            raise ValueError(f"degrees must be non-negative, got {degrees}")
        return super().__new__(cls, degrees)

    @classmethod
    def zero(cls, dimension):
        return cls((0,) * dimension)

    @classmethod
    def axis(cls, dimension, i, degree):
        """Rank-1 index with ``degree`` in dimension ``i``."""
        degrees = [0] * dimension
        degrees[i] = degree
        return cls(degrees)

    @property
    def dimension(self):
        return len(self)

    def total_degree(self):
        return sum(self)

    def rank(self):
        return sum(1 for d in self if d > 0)

    def qnorm(self, q):
        if q == 1:
            return float(self.total_degree())
        return sum(d**q for d in self if d > 0) ** (1.0 / q)

    def support(self):
        """Dimensions with a non-zero degree."""
        return tuple(i for i, d in enumerate(self) if d > 0)

    def sort_key(self):
        """Graded lexicographic key: total degree first, then the degrees."""
        return (self.total_degree(), tuple(self))

    def __repr__(self):
        return f"MultiIndex({tuple(self)})"


def canonical_sort(indices):
    return sorted((MultiIndex(a) for a in indices), key=MultiIndex.sort_key)


@dataclass(frozen=True)
class TruncationSpec:
    """Candidate-set truncation: max degree ``p``, q-norm exponent ``q``, max rank ``r``.

    ``r=None`` leaves the rank unbounded.
    """

    p: int
    q: float = 1.0
    r: int | None = None

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise InvalidTruncation(f"p must be a positive integer, got {self.p!r}")
        if not (0 < self.q <= 1):
            raise InvalidTruncation(f"q must lie in (0, 1], got {self.q!r}")
        if self.r is not None and (int(self.r) != self.r or self.r < 1):
            raise InvalidTruncation(f"r must be a positive integer, got {self.r!r}")

    def max_rank(self, dimension):
        return dimension if self.r is None else min(self.r, dimension)

    def admits(self, alpha):
        alpha = MultiIndex(alpha)
        return (
            alpha.rank() <= self.max_rank(len(alpha))
            and alpha.qnorm(self.q) <= self.p * (1 + QNORM_RTOL)
        )


def generate_candidate_set(dimension, spec):
    """All multi-indices with ``qnorm(q) <= p`` and ``rank <= r``, canonically ordered.

    The enumeration descends dimension by dimension and prunes on the
    partial q-norm sum and rank, so the full ``(p+1)**M`` grid is never
    materialized.
    """
    if not isinstance(spec, TruncationSpec):
        raise InvalidTruncation(f"expected a TruncationSpec, got {type(spec).__name__}")
    if int(dimension) != dimension or dimension < 1:
        raise InvalidTruncation(f"dimension must be a positive integer, got {dimension!r}")

    p, q = spec.p, spec.q
    max_rank = spec.max_rank(dimension)
    budget = p**q * (1 + QNORM_RTOL) ** q
    # degree contributions d**q, precomputed
    cost = [d**q for d in range(p + 1)]
    out = []
    current = [0] * dimension

    def descend(i, used, rank):
        if i == dimension:
            out.append(MultiIndex(current))
            return
        descend(i + 1, used, rank)
        if rank == max_rank:
            return
        for d in range(1, p + 1):
            if used + cost[d] > budget:
                break
            current[i] = d
            descend(i + 1, used + cost[d], rank + 1)
        current[i] = 0

    descend(0, 0.0, 0)
    out.sort(key=MultiIndex.sort_key)
    return out


def filter_rank(indices, k):
    """Order-preserving subset of indices with rank exactly ``k``."""
    return [MultiIndex(a) for a in indices if MultiIndex(a).rank() == k]
