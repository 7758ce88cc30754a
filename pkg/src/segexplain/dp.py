"""Optimal K-segmentation by dynamic programming, elbow K selection, sketching.

The recursion minimizes the length-weighted within-segment variance: the best
k-segment split of the prefix ending at j extends the best (k-1)-segment
split ending at some earlier candidate cut j'. Ties prefer the smallest last
cut, recursively, so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dataset import DataError
from .diffs import SegmentRef


@dataclass(frozen=True)
class SegmentationScheme:
    """Cut positions (0-based grid indices) including both endpoints."""

    cuts: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if len(self.cuts) < 2 or self.cuts[0] != 0 or self.cuts[-1] != self.n - 1:
            raise DataError(f"cuts must start at 0 and end at n-1, got {self.cuts}")
        if any(a >= b for a, b in zip(self.cuts, self.cuts[1:])):
            raise DataError("cuts must be strictly increasing")

    @property
    def k(self) -> int:
        return len(self.cuts) - 1

    @property
    def interior(self) -> tuple[int, ...]:
        return self.cuts[1:-1]

    def segments(self) -> list[SegmentRef]:
        return [SegmentRef(a, b) for a, b in zip(self.cuts, self.cuts[1:])]


@dataclass(frozen=True)
class KVarianceCurve:
    """Total variance D(n, K) for K = 1..K_max."""

    points: tuple[tuple[int, float], ...]

    def variance_at(self, k: int) -> float:
        for kk, v in self.points:
            if kk == k:
                return v
        raise DataError(f"K={k} not on the curve")

    def k_values(self) -> list[int]:
        return [k for k, _ in self.points]


@dataclass
class DPTables:
    """Full DP state so one run serves every K up to the computed bound."""

    positions: np.ndarray  # candidate cut indices, ascending, includes 0 and n-1
    totals: np.ndarray  # (K+1, p): totals[k, b] = D(pos[b], k)
    parents: np.ndarray  # (K+1, p) argmin predecessor position index
    n: int

    @property
    def k_max(self) -> int:
        return self.totals.shape[0] - 1

    def curve(self, k_hi: int | None = None) -> KVarianceCurve:
        k_hi = self.k_max if k_hi is None else k_hi
        last = len(self.positions) - 1
        points = []
        for k in range(1, k_hi + 1):
            value = self.totals[k, last]
            if np.isfinite(value):  # small K can be infeasible under a length cap
                points.append((k, float(value)))
        if not points:
            raise DataError("no feasible segmentation for any K")
        return KVarianceCurve(tuple(points))

    def scheme(self, k: int) -> SegmentationScheme:
        last = len(self.positions) - 1
        if k < 1 or k > self.k_max or not np.isfinite(self.totals[k, last]):
            raise DataError(f"no feasible segmentation with K={k}")
        cuts = [int(self.positions[last])]
        b = last
        for kk in range(k, 0, -1):
            b = int(self.parents[kk, b])
            cuts.append(int(self.positions[b]))
        return SegmentationScheme(tuple(reversed(cuts)), self.n)

    def total_variance(self, k: int) -> float:
        return float(self.totals[k, len(self.positions) - 1])


def segmentation_tables(
    n: int,
    k_hi: int,
    variance: Callable[[int, int], float],
    candidate_cuts: Sequence[int] | None = None,
    max_len: int | None = None,
) -> DPTables:
    """Run the DP up to k_hi segments over the candidate cut set."""
    if n < 2:
        raise DataError("need at least two grid points")
    if candidate_cuts is None:
        positions = np.arange(n, dtype=np.int64)
    else:
        positions = np.unique(np.asarray(list(candidate_cuts), dtype=np.int64))
        if len(positions) < 2 or positions[0] != 0 or positions[-1] != n - 1:
            raise DataError("candidate cuts must include both endpoints 0 and n-1")
    p = len(positions)
    if k_hi < 1:
        raise DataError("K must be >= 1")
    if candidate_cuts is None and max_len is not None and max_len < n - 1:
        return _banded_tables(n, k_hi, variance, max_len)

    # weighted variance of every admissible candidate segment
    weighted = np.full((p, p), np.inf)
    for a in range(p):
        start = int(positions[a])
        for b in range(a + 1, p):
            end = int(positions[b])
            if max_len is not None and end - start > max_len:
                break
            weighted[a, b] = (end - start) * variance(start, end)

    totals = np.full((k_hi + 1, p), np.inf)
    parents = np.zeros((k_hi + 1, p), dtype=np.int64)
    totals[0, 0] = 0.0
    for k in range(1, k_hi + 1):
        lo = k - 1  # at least k-1 earlier cuts needed
        for b in range(k, p):
            options = totals[k - 1, lo:b] + weighted[lo:b, b]
            best = int(np.argmin(options))  # first minimum: smallest last cut
            totals[k, b] = options[best]
            parents[k, b] = lo + best
    return DPTables(positions, totals, parents, n)


def _banded_tables(
    n: int, k_hi: int, variance: Callable[[int, int], float], max_len: int
) -> DPTables:
    """Length-capped DP over the full grid, one vectorized sweep per k.

    Band rows run from the longest admissible segment down to length 1 so the
    argmin's first hit is the smallest last-cut position, matching the
    generic path's tie-break.
    """
    lengths = np.arange(max_len, 0, -1)
    band = np.full((max_len, n), np.inf)
    for row, length in enumerate(lengths.tolist()):
        for b in range(length, n):
            band[row, b] = length * variance(b - length, b)

    totals = np.full((k_hi + 1, n), np.inf)
    parents = np.zeros((k_hi + 1, n), dtype=np.int64)
    totals[0, 0] = 0.0
    stacked = np.full((max_len, n), np.inf)
    for k in range(1, k_hi + 1):
        stacked.fill(np.inf)
        prev = totals[k - 1]
        for row, length in enumerate(lengths.tolist()):
            stacked[row, length:] = prev[:-length] + band[row, length:]
        choice = np.argmin(stacked, axis=0)
        totals[k] = stacked[choice, np.arange(n)]
        parents[k] = np.arange(n) - lengths[choice]
        totals[k, :k] = np.inf  # cannot split fewer points into k segments
    parents[:, 0] = 0
    return DPTables(np.arange(n, dtype=np.int64), totals, parents, n)


def k_segmentation_dp(
    n: int,
    k: int,
    variance: Callable[[int, int], float],
    candidate_cuts: Sequence[int] | None = None,
    max_len: int | None = None,
) -> tuple[SegmentationScheme, KVarianceCurve]:
    """Exact minimizer of the K-segmentation objective, plus D(n, k') for k' <= k."""
    if max_len is not None and max_len * k < n - 1:
        raise DataError(
            f"infeasible: {k} segments of length <= {max_len} cannot cover {n} points"
        )
    tables = segmentation_tables(n, k, variance, candidate_cuts, max_len)
    return tables.scheme(k), tables.curve(k)


# ---------------------------------------------------------------------------
# Optimal K (elbow of the K-variance curve)
# ---------------------------------------------------------------------------


def select_optimal_k(
    curve: KVarianceCurve, k_max: int = 20, literal_formula: bool = False
) -> int:
    """Knee of the (decreasing) K-variance curve, Ks capped at k_max.

    Normalizes both axes to [0, 1] and maximizes (1 - norm_var) - norm_k; a
    constant curve or a perfectly linear decrease yields K=1. The
    ``literal_formula`` flag switches to maximizing norm_var - norm_k, which
    degenerates to K=1 on any decreasing curve; it exists for comparison
    only.
    """
    points = [(k, v) for k, v in curve.points if k <= k_max]
    if len(points) < 3:
        raise DataError("K selection needs a curve with at least 3 points")
    ks = np.array([k for k, _ in points], dtype=np.float64)
    vs = np.array([v for _, v in points], dtype=np.float64)
    if vs.max() == vs.min():
        return 1
    norm_k = (ks - ks[0]) / (ks[-1] - ks[0])
    norm_v = (vs - vs.min()) / (vs.max() - vs.min())
    score = (norm_v - norm_k) if literal_formula else ((1.0 - norm_v) - norm_k)
    # near-ties (e.g. a perfectly linear curve) resolve to the smallest K
    best = float(score.max())
    winner = int(np.argmax(score >= best - 1e-12))
    return int(ks[winner])


# ---------------------------------------------------------------------------
# Sketching: a cheap pass that nominates candidate cut positions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SketchParams:
    max_segment_length: int  # L
    size: int  # S: number of segments in the nomination pass

    @staticmethod
    def for_length(n: int) -> "SketchParams":
        max_len = min(math.ceil(0.05 * n), 20)
        return SketchParams(max_len, math.ceil(3 * n / max_len))


def sketch_select(
    n: int,
    variance: Callable[[int, int], float],
    params: SketchParams | None = None,
) -> np.ndarray:
    """Candidate cut positions from a length-bounded pre-segmentation.

    Degenerates to every index when the series is too short for the sketch
    to shrink anything.
    """
    params = params or SketchParams.for_length(n)
    if n <= params.size + 1:
        return np.arange(n, dtype=np.int64)
    scheme, _curve = k_segmentation_dp(
        n, params.size, variance, max_len=params.max_segment_length
    )
    return np.array(scheme.cuts, dtype=np.int64)
