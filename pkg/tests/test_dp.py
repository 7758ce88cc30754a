import itertools

import numpy as np
import pytest

from segexplain.dataset import DataError
from segexplain.dp import (
    KVarianceCurve,
    SegmentationScheme,
    SketchParams,
    k_segmentation_dp,
    segmentation_tables,
    select_optimal_k,
    sketch_select,
)


def table_variance(rng: np.random.Generator, n: int):
    """Random non-negative variance table as a lookup function."""
    table = rng.uniform(0.0, 1.0, size=(n, n))
    for i in range(n - 1):
        table[i, i + 1] = 0.0  # unit objects are their own centroid

    def variance(i, j):
        return float(table[i, j]) if j - i > 1 else 0.0

    return variance


def exhaustive_minimum(n: int, k: int, variance) -> float:
    best = np.inf
    for interior in itertools.combinations(range(1, n - 1), k - 1):
        cuts = (0, *interior, n - 1)
        total = sum((b - a) * variance(a, b) for a, b in zip(cuts, cuts[1:]))
        best = min(best, total)
    return best


class TestKSegmentationDP:
    def test_k_equals_n_minus_one_is_all_units(self):
        rng = np.random.default_rng(0)
        n = 9
        scheme, curve = k_segmentation_dp(n, n - 1, table_variance(rng, n))
        assert scheme.cuts == tuple(range(n))
        assert curve.variance_at(n - 1) == 0.0

    def test_k_one_single_segment(self):
        rng = np.random.default_rng(1)
        n = 7
        var = table_variance(rng, n)
        scheme, curve = k_segmentation_dp(n, 1, var)
        assert scheme.cuts == (0, n - 1)
        assert curve.variance_at(1) == pytest.approx((n - 1) * var(0, n - 1))

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(2)
        for trial in range(25):
            n = int(rng.integers(5, 13))
            k = int(rng.integers(1, 5))
            if k > n - 1:
                continue
            var = table_variance(rng, n)
            scheme, curve = k_segmentation_dp(n, k, var)
            want = exhaustive_minimum(n, k, var)
            assert curve.variance_at(k) == pytest.approx(want, rel=1e-12)
            total = sum((b - a) * var(a, b) for a, b in zip(scheme.cuts, scheme.cuts[1:]))
            assert total == pytest.approx(want, rel=1e-12)

    def test_candidate_cut_restriction(self):
        rng = np.random.default_rng(3)
        n = 10
        var = table_variance(rng, n)
        cuts = [0, 3, 6, 9]
        scheme, _ = k_segmentation_dp(n, 2, var, candidate_cuts=cuts)
        assert set(scheme.cuts) <= set(cuts)

    def test_candidate_cuts_must_cover_endpoints(self):
        rng = np.random.default_rng(4)
        with pytest.raises(DataError, match="endpoints"):
            k_segmentation_dp(10, 2, table_variance(rng, 10), candidate_cuts=[1, 5, 9])

    def test_infeasible_max_len_errors(self):
        rng = np.random.default_rng(5)
        with pytest.raises(DataError, match="infeasible"):
            k_segmentation_dp(20, 2, table_variance(rng, 20), max_len=3)

    def test_banded_equals_generic_under_length_cap(self):
        rng = np.random.default_rng(6)
        n, k, max_len = 14, 5, 4
        var = table_variance(rng, n)
        banded = segmentation_tables(n, k, var, candidate_cuts=None, max_len=max_len)
        generic = segmentation_tables(n, k, var, candidate_cuts=range(n), max_len=max_len)
        np.testing.assert_allclose(banded.totals, generic.totals)
        assert banded.scheme(k).cuts == generic.scheme(k).cuts

    def test_tie_break_smallest_last_cut(self):
        # all-zero variances: every scheme ties; cuts must pack leftmost
        scheme, _ = k_segmentation_dp(8, 3, lambda i, j: 0.0)
        assert scheme.cuts == (0, 1, 2, 7)

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        var = table_variance(rng, 12)
        a, _ = k_segmentation_dp(12, 4, var)
        b, _ = k_segmentation_dp(12, 4, var)
        assert a.cuts == b.cuts


class TestSchemeAndCurve:
    def test_scheme_validation(self):
        with pytest.raises(DataError):
            SegmentationScheme((1, 5), 6)
        with pytest.raises(DataError):
            SegmentationScheme((0, 3, 3, 5), 6)
        s = SegmentationScheme((0, 2, 5), 6)
        assert s.k == 2
        assert s.interior == (2,)
        assert [(r.start, r.end) for r in s.segments()] == [(0, 2), (2, 5)]

    def test_curve_lookup(self):
        curve = KVarianceCurve(((1, 5.0), (2, 3.0)))
        assert curve.variance_at(2) == 3.0
        with pytest.raises(DataError):
            curve.variance_at(9)


class TestSelectOptimalK:
    def test_hand_worked_knee(self):
        curve = KVarianceCurve(((1, 100.0), (2, 10.0), (3, 9.0), (4, 8.5), (5, 8.0)))
        assert select_optimal_k(curve) == 2

    def test_linear_decrease_returns_one(self):
        curve = KVarianceCurve(tuple((k, 10.0 - k) for k in range(1, 8)))
        assert select_optimal_k(curve) == 1

    def test_constant_curve_returns_one(self):
        curve = KVarianceCurve(tuple((k, 4.0) for k in range(1, 6)))
        assert select_optimal_k(curve) == 1

    def test_literal_formula_degenerates_to_one(self):
        curve = KVarianceCurve(((1, 100.0), (2, 10.0), (3, 9.0), (4, 8.5), (5, 8.0)))
        assert select_optimal_k(curve, literal_formula=True) == 1

    def test_needs_three_points(self):
        with pytest.raises(DataError, match="3 points"):
            select_optimal_k(KVarianceCurve(((1, 2.0), (2, 1.0))))

    def test_k_max_caps_the_search(self):
        points = [(k, 1000.0 / k) for k in range(1, 40)]
        assert select_optimal_k(KVarianceCurve(tuple(points)), k_max=20) <= 20


class TestSketch:
    def test_parameter_formula(self):
        params = SketchParams.for_length(300)
        assert params.max_segment_length == 15
        assert params.size == 60

    def test_length_cap_at_twenty(self):
        assert SketchParams.for_length(2000).max_segment_length == 20

    def test_sketch_includes_endpoints(self):
        rng = np.random.default_rng(8)
        n = 120
        positions = sketch_select(n, table_variance(rng, n))
        assert positions[0] == 0 and positions[-1] == n - 1
        assert len(positions) <= SketchParams.for_length(n).size + 1

    def test_degenerate_short_series_returns_all_indices(self):
        rng = np.random.default_rng(9)
        n = 40  # S = 3n/L >= n here
        positions = sketch_select(n, table_variance(rng, n))
        assert positions.tolist() == list(range(n))
