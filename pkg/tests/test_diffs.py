import json

import numpy as np
import pytest

from segexplain.dataset import AggFunction, AggSpec, DataError, Explanation, enumerate_explanations, materialize_cube
from segexplain.diffs import (
    SegmentRef,
    all_segments,
    filter_explanations,
    gamma_tau,
    length_bounded_segments,
    precompute_scores,
    signed_contributions,
)

from conftest import random_sum_cube, relation_from_rows


class TestGammaTau:
    def test_worked_example(self, four_row_cube):
        # delta=21, complement delta=1 -> gamma 20, effect +
        e = four_row_cube.explanations[0]
        scored = gamma_tau(four_row_cube, e, SegmentRef(0, 1))
        assert scored.gamma == 20.0
        assert scored.tau == "+"

    def test_explanation_covering_all_rows(self):
        rel = relation_from_rows(
            {"t": [1, 2, 3], "cat": ["a", "a", "a"], "v": [5.0, 9.0, 2.0]}, time_attr="t"
        )
        cube = materialize_cube(
            rel, AggSpec("v", AggFunction.SUM), enumerate_explanations(rel, ["cat"], 1)
        )
        scored = gamma_tau(cube, cube.explanations[0], SegmentRef(0, 2))
        assert scored.gamma == abs(2.0 - 5.0)  # removal empties the relation
        assert scored.tau == "-"

    def test_explanation_matching_no_rows(self, four_row_relation):
        ghost = Explanation((("cat", "zz"),))
        cube = materialize_cube(four_row_relation, AggSpec("v", AggFunction.SUM), [ghost])
        scored = gamma_tau(cube, ghost, SegmentRef(0, 1))
        assert scored.gamma == 0.0
        assert scored.tau == "+"  # sign(0) is +

    def test_absent_explanation_errors(self, four_row_cube):
        with pytest.raises(DataError, match="not in cube"):
            gamma_tau(four_row_cube, Explanation((("cat", "zz"),)), SegmentRef(0, 1))

    def test_endpoint_swap_preserves_gamma_flips_tau(self):
        rng = np.random.default_rng(11)
        cube = random_sum_cube(rng)
        n = cube.n
        for _ in range(50):
            i, j = sorted(rng.choice(n, 2, replace=False).tolist())
            e = cube.explanations[int(rng.integers(len(cube.explanations)))]
            fwd = gamma_tau(cube, e, SegmentRef(i, j))
            rev_contrib = signed_contributions(cube, j, i)[cube.index_of(e)]
            assert abs(rev_contrib) == pytest.approx(fwd.gamma, abs=1e-12)
            if fwd.gamma > 0:
                assert (rev_contrib >= 0) != (fwd.tau == "+") or rev_contrib == 0

    def test_signed_contributions_sum_to_overall_delta(self):
        rng = np.random.default_rng(5)
        cube = random_sum_cube(rng)
        contrib = signed_contributions(cube, 1, 6)
        delta = cube.overall_values[6] - cube.overall_values[1]
        assert contrib.sum() == pytest.approx(delta, abs=1e-9)

    def test_avg_gamma_uses_complement_parts(self):
        rel = relation_from_rows(
            {
                "t": [1, 1, 2, 2],
                "cat": ["a", "b", "a", "b"],
                "v": [10.0, 2.0, 20.0, 4.0],
            },
            time_attr="t",
        )
        cube = materialize_cube(
            rel, AggSpec("v", AggFunction.AVG), enumerate_explanations(rel, ["cat"], 1)
        )
        # overall avg: 6 -> 12 (delta 6); without cat=a: 2 -> 4 (delta 2)
        scored = gamma_tau(cube, cube.explanations[0], SegmentRef(0, 1))
        assert scored.gamma == pytest.approx(4.0)
        assert scored.tau == "+"


class TestScoreTable:
    def test_all_segments_count(self, four_row_cube):
        n = four_row_cube.n
        table = precompute_scores(four_row_cube, all_segments(n))
        assert len(table) == n * (n - 1) // 2

    def test_length_bounded_family_count(self):
        segs = length_bounded_segments(300, 15)
        assert len(segs) <= 15 * 300
        assert all(s.length <= 15 for s in segs)

    def test_empty_family(self, four_row_cube):
        assert len(precompute_scores(four_row_cube, [])) == 0

    def test_agrees_with_direct_calls(self):
        rng = np.random.default_rng(2)
        cube = random_sum_cube(rng, n_times=6)
        table = precompute_scores(cube, all_segments(cube.n))
        for (i, j), scored in table.entries.items():
            for s in scored:
                direct = gamma_tau(cube, s.explanation, SegmentRef(i, j))
                assert s.gamma == direct.gamma
                assert s.tau == direct.tau

    def test_dump_json_shape(self, four_row_cube):
        table = precompute_scores(four_row_cube, [SegmentRef(0, 1)])
        rows = json.loads(table.dump_json())
        assert rows[0] == {"segment": [0, 1], "explanation": "cat=a", "gamma": 20.0, "tau": "+"}


class TestFilter:
    def test_ratio_zero_keeps_everything(self, four_row_cube):
        out = filter_explanations(four_row_cube, 0.0)
        assert out.explanation_count == four_row_cube.explanation_count

    def test_low_support_explanation_dropped(self):
        rel = relation_from_rows(
            {
                "t": [1, 1, 2, 2],
                "cat": ["big", "tiny", "big", "tiny"],
                "v": [1000.0, 0.5, 2000.0, 0.4],
            },
            time_attr="t",
        )
        cube = materialize_cube(
            rel, AggSpec("v", AggFunction.SUM), enumerate_explanations(rel, ["cat"], 1)
        )
        out = filter_explanations(cube, 0.001)
        assert [e.label() for e in out.explanations] == ["cat=big"]
        # overall series untouched
        np.testing.assert_array_equal(out.overall_values, cube.overall_values)

    def test_single_significant_point_keeps_explanation(self):
        rel = relation_from_rows(
            {
                "t": [1, 1, 2, 2],
                "cat": ["big", "spike", "big", "spike"],
                "v": [1000.0, 0.5, 2000.0, 900.0],
            },
            time_attr="t",
        )
        cube = materialize_cube(
            rel, AggSpec("v", AggFunction.SUM), enumerate_explanations(rel, ["cat"], 1)
        )
        out = filter_explanations(cube, 0.001)
        assert out.explanation_count == 2

    def test_bad_ratio_errors(self, four_row_cube):
        with pytest.raises(DataError, match="ratio"):
            filter_explanations(four_row_cube, 1.0)


class TestSegmentRef:
    def test_invalid_indices(self):
        with pytest.raises(DataError):
            SegmentRef(3, 3)
        with pytest.raises(DataError):
            SegmentRef(-1, 2)

    def test_unit_object(self):
        assert SegmentRef(4, 5).length == 1

    def test_validate_against_grid(self):
        with pytest.raises(DataError, match="exceeds"):
            SegmentRef(0, 9).validate(5)
