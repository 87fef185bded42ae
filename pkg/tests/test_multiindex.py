import itertools
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsepce.exceptions import InvalidTruncation
from sparsepce.multiindex import MultiIndex, TruncationSpec, filter_rank, generate_candidate_set


def brute_force(m, p, q, r):
    """Exhaustive scan of the (p+1)^M grid."""
    out = []
    for alpha in itertools.product(range(p + 1), repeat=m):
        nz = [a for a in alpha if a]
        if len(nz) > r:
            continue
        if sum(a**q for a in nz) ** (1 / q) <= p * (1 + 1e-9) if nz else True:
            out.append(alpha)
    return sorted(out, key=lambda a: (sum(a), a))


class TestMultiIndex:
    def test_norms(self):
        a = MultiIndex((2, 0, 3))
        assert a.total_degree() == 5
        assert a.rank() == 2
        assert a.qnorm(1) == 5
        assert a.qnorm(0.5) == pytest.approx((2**0.5 + 3**0.5) ** 2)

    def test_equality_and_hash(self):
        assert MultiIndex((1, 2)) == MultiIndex([1, 2])
        assert len({MultiIndex((1, 2)), MultiIndex((1, 2)), MultiIndex((2, 1))}) == 2

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            MultiIndex((1, -1))


class TestCandidateSet:
    def test_standard_two_dimensional(self):
        assert len(generate_candidate_set(2, TruncationSpec(5, 1.0, 2))) == 21

    def test_low_rank_eight_dimensional(self):
        assert len(generate_candidate_set(8, TruncationSpec(3, 1.0, 2))) == 109

    def test_hyperbolic_two_dimensional(self):
        # exhaustive scan over alpha_i <= 5 gives 16 indices
        got = generate_candidate_set(2, TruncationSpec(5, 0.75, 2))
        assert len(got) == 16
        assert got == brute_force(2, 5, 0.75, 2)

    def test_zero_first_and_canonical_order(self):
        got = generate_candidate_set(3, TruncationSpec(3, 0.6, 2))
        assert got[0] == (0, 0, 0)
        assert got == sorted(got, key=MultiIndex.sort_key)
        assert len(set(got)) == len(got)

    @pytest.mark.parametrize("m", range(1, 7))
    @pytest.mark.parametrize("p", range(1, 9))
    def test_standard_cardinality(self, m, p):
        assert len(generate_candidate_set(m, TruncationSpec(p, 1.0, None))) == comb(m + p, p)

    @pytest.mark.parametrize("m", range(1, 5))
    @pytest.mark.parametrize("p", range(1, 7))
    @pytest.mark.parametrize("q", [0.25, 0.5, 0.75, 1.0])
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_matches_exhaustive_scan(self, m, p, q, r):
        assert generate_candidate_set(m, TruncationSpec(p, q, r)) == brute_force(m, p, q, r)

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(1, 4), st.integers(1, 7), st.floats(0.1, 1.0), st.floats(0.1, 1.0), st.integers(1, 4)
    )
    def test_monotone_in_q(self, m, p, q1, q2, r):
        q1, q2 = sorted((q1, q2))
        small = set(generate_candidate_set(m, TruncationSpec(p, q1, r)))
        large = set(generate_candidate_set(m, TruncationSpec(p, q2, r)))
        assert small <= large

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 6), st.floats(0.2, 1.0), st.integers(1, 3))
    def test_monotone_in_p_and_r(self, m, p, q, r):
        base = set(generate_candidate_set(m, TruncationSpec(p, q, r)))
        assert base <= set(generate_candidate_set(m, TruncationSpec(p + 1, q, r)))
        assert base <= set(generate_candidate_set(m, TruncationSpec(p, q, r + 1)))

    def test_boundary_membership(self):
        # (1, 4) sits exactly on the q=0.5, p=9 boundary: (1 + 2)^2 = 9
        got = generate_candidate_set(2, TruncationSpec(9, 0.5, 2))
        assert (1, 4) in got and (4, 1) in got and (2, 3) not in got

    @pytest.mark.parametrize(
        "kwargs", [dict(p=0), dict(p=3, q=0.0), dict(p=3, q=1.5), dict(p=3, r=0), dict(p=2.5)]
    )
    def test_invalid_truncation(self, kwargs):
        with pytest.raises(InvalidTruncation):
            TruncationSpec(**kwargs)

    def test_deterministic(self):
        spec = TruncationSpec(6, 0.5, 2)
        assert generate_candidate_set(5, spec) == generate_candidate_set(5, spec)


class TestFilterRank:
    def test_rank_zero(self):
        s = generate_candidate_set(3, TruncationSpec(2))
        assert filter_rank(s, 0) == [(0, 0, 0)]

    def test_rank_one_and_two(self):
        s = generate_candidate_set(2, TruncationSpec(5, 1.0, 2))
        assert len(filter_rank(s, 1)) == 10
        assert len(filter_rank(s, 2)) == 10

    def test_partition(self):
        s = generate_candidate_set(4, TruncationSpec(4, 0.7, 3))
        parts = [filter_rank(s, k) for k in range(5)]
        assert sum(len(p) for p in parts) == len(s)
        assert sorted(itertools.chain(*parts), key=MultiIndex.sort_key) == s
        for p in parts:
            assert p == [a for a in s if a in set(p)]
