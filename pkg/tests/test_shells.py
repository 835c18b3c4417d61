"""Tests for the even-sum truncated-box enumerative indexer."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oslc import shells
from oslc.shells import TdIndexer, TdParams, TdSampler, count_td


def enumerate_set(n, h, l):
    """Exhaustive point list of the even-sum truncated box, unordered."""
    pts = []
    for v in itertools.product(range(h + 1), repeat=n):
        s = sum(v)
        if s % 2 == 0 and s <= 2 * l:
            pts.append(v)
    return pts


def canonical_sort(points):
    return sorted(points, key=lambda p: (sum(p), p))


class TestCounting:
    def test_tiny_example(self):
        # {0,1}^2, even sum <= 2: exactly (0,0) and (1,1)
        assert count_td(2, 1, 1) == 2

    def test_full_box_is_half_of_all_points(self):
        assert count_td(4, 3, 6) == 128
        assert count_td(4, 3, 6) == 4**4 // 2

    def test_one_dimensional_listing(self):
        assert count_td(1, 5, 2) == 3  # values 0, 2, 4

    @given(
        st.integers(1, 5),
        st.integers(0, 4),
        st.integers(0, 6),
    )
    @settings(max_examples=40)
    def test_matches_exhaustive_enumeration(self, n, h, l):
        assert count_td(n, h, l) == len(enumerate_set(n, h, l))

    def test_large_counts_are_exact_integers(self):
        big = count_td(24, 43, 106)
        assert isinstance(big, int)
        assert big > 2**107
        # spot parity identity: doubling H on a full box doubles per-axis
        full = count_td(6, 7, 21)
        assert full == 8**6 // 2


class TestRankUnrank:
    def test_index_zero_is_origin(self):
        idx = TdIndexer(6, 3, 4)
        assert not idx.unrank(0).any()
        assert idx.rank(np.zeros(6, dtype=np.int64)) == 0

    def test_full_ordering_small_case(self):
        idx = TdIndexer(6, 3, 4)
        want = canonical_sort(enumerate_set(6, 3, 4))
        assert idx.count == len(want)
        got = [tuple(idx.unrank(i).tolist()) for i in range(idx.count)]
        assert got == want

    def test_round_trip_small_and_random_large(self):
        small = TdIndexer(6, 3, 4)
        for i in range(small.count):
            assert small.rank(small.unrank(i)) == i
        big = TdParams(24, 43, 106, 2**107).indexer()
        rng = np.random.default_rng(101)
        for _ in range(200):
            i = int(rng.integers(0, 2**63)) * int(rng.integers(1, 2**44))
            i %= 2**107
            assert big.rank(big.unrank(i)) == i

    def test_no_duplicates_up_to_sixteen_bits(self):
        idx = TdIndexer(8, 7, 14)
        assert idx.count >= 2**16
        seen = {tuple(idx.unrank(i).tolist()) for i in range(2**16)}
        assert len(seen) == 2**16

    def test_out_of_range_index_rejected(self):
        idx = TdIndexer(4, 2, 2)
        with pytest.raises(IndexError):
            idx.unrank(idx.count)
        with pytest.raises(IndexError):
            idx.unrank(-1)

    def test_rank_rejects_foreign_points(self):
        idx = TdIndexer(4, 2, 2)
        with pytest.raises(ValueError):
            idx.rank([1, 0, 0, 0])  # odd coordinate sum
        with pytest.raises(ValueError):
            idx.rank([3, 1, 0, 0])  # coordinate beyond H
        with pytest.raises(ValueError):
            idx.rank([2, 2, 2, 0])  # l1 norm beyond 2L
        with pytest.raises(ValueError):
            idx.rank([1, 1, 0])  # wrong length

    def test_module_level_helpers(self):
        p = shells.index_to_point(5, 6, 3, 4)
        assert shells.point_to_index(p, 6, 3, 4) == 5


class TestSelectionStats:
    def test_single_point_selection(self):
        sel = shells.l1_stats(6, 3, 4, 1)
        assert sel.sum_l1 == 0
        assert sel.mean_l1 == 0

    def test_full_box_mean(self):
        pts = enumerate_set(4, 1, 2)
        sel = shells.l1_stats(4, 1, 2, len(pts))
        want = Fraction(sum(sum(p) for p in pts), len(pts))
        assert sel.mean_l1 == want

    @given(
        st.integers(1, 4),
        st.integers(1, 5),
        st.integers(20, 150),
    )
    @settings(max_examples=30)
    def test_matches_exhaustive_enumeration_n8(self, h, l, m_frac):
        n = 8
        pts = canonical_sort(enumerate_set(n, h, l))
        if not pts:
            return
        m_s = max(1, min(len(pts), m_frac * len(pts) // 150))
        prefix = pts[:m_s]
        sel = shells.l1_stats(n, h, l, m_s)
        assert sel.sum_l1 == sum(sum(p) for p in prefix)
        firsts = [p[0] for p in prefix]
        want_hist = [firsts.count(v) for v in range(h + 1)]
        assert list(sel.first_coord_counts) == want_hist
        rest = [max(p[1:]) for p in prefix]
        assert sel.max_rest_coord == max(rest)
        assert sel.max_coord == max(max(p) for p in prefix)

    def test_least_l1_selection_property(self):
        idx = TdIndexer(6, 3, 4)
        pts = canonical_sort(enumerate_set(6, 3, 4))
        for m_s in (1, 7, 64, len(pts) - 1):
            sel = idx.selection(m_s)
            chosen = pts[:m_s]
            rejected = pts[m_s:]
            assert max(sum(p) for p in chosen) <= min(sum(p) for p in rejected)
            assert sel.sum_l1 == sum(sum(p) for p in chosen)

    def test_selection_bounds_checked(self):
        idx = TdIndexer(4, 2, 2)
        with pytest.raises(ValueError):
            idx.selection(0)
        with pytest.raises(ValueError):
            idx.selection(idx.count + 1)


class TestSampler:
    def test_samples_live_in_the_selection(self):
        idx = TdIndexer(6, 3, 4)
        m_s = 200
        sampler = TdSampler(idx, m_s)
        rng = np.random.default_rng(7)
        pts = sampler.sample(rng, 5000)
        assert pts.shape == (5000, 6)
        ranks = [idx.rank(p) for p in pts[:300]]
        assert all(0 <= r < m_s for r in ranks)

    def test_uniformity_chi_square(self):
        # chi-square against the uniform law on all m_s = 37 points
        idx = TdIndexer(4, 3, 6)
        m_s = 37
        sampler = TdSampler(idx, m_s)
        rng = np.random.default_rng(11)
        draws = sampler.sample(rng, 2 * 10**5)
        counts = np.zeros(m_s)
        for p in draws:
            counts[idx.rank(p)] += 1
        expected = draws.shape[0] / m_s
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # 36 degrees of freedom: mean 36, std ~8.5; 80 is beyond 5 sigma
        assert chi2 < 80.0

    def test_matches_direct_unrank_distribution_tiny(self):
        idx = TdIndexer(3, 2, 2)
        m_s = idx.count
        sampler = TdSampler(idx, m_s)
        rng = np.random.default_rng(13)
        pts = sampler.sample(rng, 20000)
        seen = {tuple(p.tolist()) for p in pts}
        want = {tuple(idx.unrank(i).tolist()) for i in range(m_s)}
        assert seen == want


class TestParams:
    def test_indexer_shortcut(self):
        params = TdParams(4, 3, 6, 64)
        idx = params.indexer()
        assert idx.count == 128
        assert (idx.n, idx.h, idx.l) == (4, 3, 6)

    def test_infeasible_cardinality_rejected(self):
        idx = TdIndexer(2, 1, 1)
        with pytest.raises(ValueError):
            idx.selection(3)
