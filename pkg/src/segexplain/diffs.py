"""Difference scores: how much each explanation contributes to a segment's change.

For a segment with endpoint indices (i, j) and an explanation E, the score
gamma(E) is the absolute change in the endpoint-to-endpoint delta of the
aggregate caused by removing E's rows, and tau(E) is the sign of that
contribution. For decomposable aggregates both come from the cube alone, in
O(1) per (segment, explanation).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dataset import AggFunction, DataError, Explanation, SeriesCube

TAU_PLUS = "+"
TAU_MINUS = "-"


@dataclass(frozen=True)
class SegmentRef:
    """Half-open index span [start, end] on the cube grid, 0-based, start < end.

    ``length`` counts unit steps (end - start); a unit object is a segment of
    length 1.
    """

    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise DataError(f"invalid segment indices ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start

    def validate(self, n: int) -> "SegmentRef":
        if self.end > n - 1:
            raise DataError(f"segment ({self.start}, {self.end}) exceeds grid of {n} points")
        return self


@dataclass(frozen=True)
class ScoredExplanation:
    explanation: Explanation
    gamma: float
    tau: str  # "+" or "-"

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise DataError("gamma must be non-negative")
        if self.tau not in (TAU_PLUS, TAU_MINUS):
            raise DataError(f"tau must be '+' or '-', got {self.tau!r}")


def signed_contributions(cube: SeriesCube, start: int, end: int) -> np.ndarray:
    """Per-explanation signed contribution over [start, end]: delta minus
    the delta with the explanation's rows removed. gamma = |value|, tau = sign.
    """
    if cube.agg.function == AggFunction.AVG:
        o_sum, o_cnt = cube.overall_parts
        p_sum, p_cnt = cube.parts
        delta = o_sum[end] / o_cnt[end] - o_sum[start] / o_cnt[start]
        comp = _complement_avg(o_sum, o_cnt, p_sum, p_cnt)
        return delta - (comp[:, end] - comp[:, start])
    # For SUM/COUNT the overall delta cancels against the complement delta,
    # leaving exactly the explanation's own series delta.
    return cube.values[:, end] - cube.values[:, start]


def unit_contributions(cube: SeriesCube) -> np.ndarray:
    """Signed contributions of every explanation over every unit segment, (eps, n-1)."""
    if cube.agg.function == AggFunction.AVG:
        o_sum, o_cnt = cube.overall_parts
        p_sum, p_cnt = cube.parts
        overall = o_sum / o_cnt
        comp = _complement_avg(o_sum, o_cnt, p_sum, p_cnt)
        return (overall[1:] - overall[:-1])[None, :] - (comp[:, 1:] - comp[:, :-1])
    return cube.values[:, 1:] - cube.values[:, :-1]


def _complement_avg(o_sum, o_cnt, p_sum, p_cnt) -> np.ndarray:
    num = o_sum[None, :] - p_sum
    den = o_cnt[None, :] - p_cnt
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den != 0)
    return out


def gamma_tau(cube: SeriesCube, e: Explanation, seg: SegmentRef) -> ScoredExplanation:
    """Difference score and change effect of one explanation on one segment.

    sign(0) is '+' by convention so results stay deterministic; a zero gamma
    makes the effect irrelevant downstream anyway.
    """
    seg.validate(cube.n)
    row = cube.index_of(e)
    contrib = signed_contributions(cube, seg.start, seg.end)[row]
    return ScoredExplanation(e, float(abs(contrib)), TAU_PLUS if contrib >= 0 else TAU_MINUS)


def score_segment(cube: SeriesCube, seg: SegmentRef) -> list[ScoredExplanation]:
    """gamma/tau for every explanation in the cube over one segment."""
    seg.validate(cube.n)
    contrib = signed_contributions(cube, seg.start, seg.end)
    return [
        ScoredExplanation(e, float(abs(c)), TAU_PLUS if c >= 0 else TAU_MINUS)
        for e, c in zip(cube.explanations, contrib.tolist())
    ]


@dataclass
class ScoreTable:
    """Scores for a declared family of segments, keyed by (start, end)."""

    entries: dict[tuple[int, int], list[ScoredExplanation]]

    def __getitem__(self, key: tuple[int, int]) -> list[ScoredExplanation]:
        return self.entries[key]

    def __len__(self) -> int:
        return len(self.entries)

    def segments(self) -> list[tuple[int, int]]:
        return sorted(self.entries)

    def dump_json(self) -> str:
        rows = []
        for (i, j), scored in sorted(self.entries.items()):
            for s in scored:
                rows.append(
                    {
                        "segment": [i, j],
                        "explanation": s.explanation.label(),
                        "gamma": s.gamma,
                        "tau": s.tau,
                    }
                )
        return json.dumps(rows)


def all_segments(n: int) -> list[SegmentRef]:
    return [SegmentRef(i, j) for i in range(n - 1) for j in range(i + 1, n)]


def length_bounded_segments(n: int, max_len: int) -> list[SegmentRef]:
    return [
        SegmentRef(i, j)
        for i in range(n - 1)
        for j in range(i + 1, min(i + max_len, n - 1) + 1)
    ]


def precompute_scores(cube: SeriesCube, segments: Iterable[SegmentRef]) -> ScoreTable:
    """Materialize gamma/tau over a segment family; deterministic and parallel-safe."""
    entries: dict[tuple[int, int], list[ScoredExplanation]] = {}
    for seg in segments:
        entries[(seg.start, seg.end)] = score_segment(cube, seg)
    return ScoreTable(entries)


def filter_explanations(cube: SeriesCube, ratio: float) -> SeriesCube:
    """Drop low-support explanations from the cube.

    An explanation goes iff at every timestamp its series magnitude stays
    under ratio times the overall magnitude (for AVG: compared on the COUNT
    parts, since the filter is a support test). The strict inequality means
    ratio=0 never drops anything.
    """
    if not (0 <= ratio < 1):
        raise DataError(f"filter ratio must be in [0, 1), got {ratio}")
    if cube.agg.function == AggFunction.AVG:
        part = np.abs(cube.parts[1])
        overall = np.abs(cube.overall_parts[1])
    else:
        part = np.abs(cube.values)
        overall = np.abs(cube.overall_values)
    drop = np.all(part < ratio * overall[None, :], axis=1)
    if not drop.any():
        return cube
    return cube.with_explanations(~drop)
