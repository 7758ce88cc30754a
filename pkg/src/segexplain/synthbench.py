"""Ground-truthed synthetic datasets and the benchmark harness.

Each dataset is a relation (T, sales, category) whose per-category count
series is piecewise linear with alternating up/down trends; the union of the
per-category breakpoints is the ground-truth segmentation. Gaussian noise is
injected at a controlled signal-to-noise ratio, and rows are expanded so that
a COUNT-by-time query reproduces each (rounded) series.

The harness hosts the explanation-agnostic bottom-up baseline, the normalized
cut-displacement accuracy metric, and the ground-truth rank experiment that
compares the eight variance metrics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import (
    AggFunction,
    AggSpec,
    AttributeSchema,
    DataError,
    Relation,
    SeriesCube,
    enumerate_explanations,
    materialize_cube,
)
from .dp import SegmentationScheme
from .metrics import VARIANCE_METRICS, SegmentScorer

MIN_CUT_GAP = 6  # matches the observed spread of true segment lengths
MAX_GENERATION_RETRIES = 500


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 100
    categories: int = 3
    snr_db: float | None = 50.0  # None disables noise entirely
    seed: int = 0
    datasets_per_level: int = 20

    def __post_init__(self) -> None:
        if self.n < 10:
            raise DataError("synthetic series length must be >= 10")
        if self.categories < 2:
            raise DataError("need at least two categories")


@dataclass(frozen=True)
class GroundTruth:
    n: int
    interior_cuts: tuple[int, ...]  # union of per-category breakpoints
    per_category_cuts: dict[str, tuple[int, ...]] = field(hash=False)
    snr_db: float | None = None
    seed: int = 0

    @property
    def k(self) -> int:
        return len(self.interior_cuts) + 1

    def scheme(self) -> SegmentationScheme:
        return SegmentationScheme((0, *self.interior_cuts, self.n - 1), self.n)

    @staticmethod
    def from_category_cuts(
        n: int,
        per_category_cuts: dict[str, Sequence[int]],
        snr_db: float | None = None,
        seed: int = 0,
    ) -> "GroundTruth":
        """Truth cuts are the union of every category's breakpoints."""
        union = sorted(set().union(*[set(c) for c in per_category_cuts.values()]))
        return GroundTruth(
            n=n,
            interior_cuts=tuple(union),
            per_category_cuts={k: tuple(v) for k, v in per_category_cuts.items()},
            snr_db=snr_db,
            seed=seed,
        )


def generate_synthetic(spec: SyntheticSpec) -> tuple[Relation, GroundTruth]:
    """Seeded generation; identical specs reproduce identical datasets.

    Slopes are integers in no-noise mode (the count series is then exactly
    piecewise linear); with noise they are continuous so breakpoint kinks of
    any size occur.

    One breakpoint per dataset is shape-camouflaged: two categories flip
    trend at the same position with offsetting slope changes, so the
    aggregated series barely kinks there while the underlying contributors
    swap. Shape-only segmentation has nothing to latch onto at such cuts.
    """
    rng = np.random.default_rng(spec.seed)
    names = [f"a{i + 1}" for i in range(spec.categories)]
    for _ in range(MAX_GENERATION_RETRIES):
        per_cat = {name: _draw_category_cuts(rng, spec.n) for name in names}
        shared = per_cat[names[0]][0]  # camouflaged breakpoint
        if shared not in per_cat[names[1]]:
            per_cat[names[1]] = sorted(per_cat[names[1]] + [shared])
        union = sorted(set().union(*per_cat.values()))
        boundaries = [0, *union, spec.n - 1]
        if all(b - a >= MIN_CUT_GAP for a, b in zip(boundaries, boundaries[1:])):
            break
    else:
        raise DataError("could not draw well-spaced ground-truth cuts; relax the generation parameters")

    integer = spec.snr_db is None
    slopes = {name: _draw_slopes(rng, per_cat[name], integer) for name in names}
    _camouflage(rng, per_cat, slopes, names[0], names[1], shared, integer)
    clean = {
        name: _piecewise_series(rng, spec.n, per_cat[name], slopes[name]) for name in names
    }
    noisy = {}
    for name in names:
        series = clean[name]
        if spec.snr_db is not None:
            series = add_noise(series, spec.snr_db, rng)
        noisy[name] = np.maximum(np.rint(series), 0.0).astype(np.int64)

    truth = GroundTruth.from_category_cuts(spec.n, per_cat, spec.snr_db, spec.seed)
    for cut in truth.interior_cuts:  # every union cut flips some category's trend
        assert any(cut in per_cat[name] for name in names)

    t_parts, cat_parts = [], []
    for name in names:
        counts = noisy[name]
        t_parts.append(np.repeat(np.arange(spec.n, dtype=np.int64), counts))
        cat_parts.append(np.full(int(counts.sum()), name, dtype=object))
    t_col = np.concatenate(t_parts)
    relation = Relation(
        schema=[
            AttributeSchema("T", "time", "integer"),
            AttributeSchema("sales", "dimension", "integer"),
            AttributeSchema("category", "dimension", "text"),
        ],
        columns={
            "T": t_col,
            "sales": np.ones(len(t_col), dtype=np.int64),
            "category": np.concatenate(cat_parts),
        },
    )
    return relation, truth


def _draw_category_cuts(rng: np.random.Generator, n: int) -> list[int]:
    count = int(rng.integers(1, 4))
    for _ in range(MAX_GENERATION_RETRIES):
        cuts = np.sort(rng.choice(np.arange(MIN_CUT_GAP, n - MIN_CUT_GAP), count, replace=False))
        boundaries = [0, *cuts.tolist(), n - 1]
        if all(b - a >= MIN_CUT_GAP for a, b in zip(boundaries, boundaries[1:])):
            return cuts.tolist()
    raise DataError("could not place category cuts with the required spacing")


def _draw_slopes(rng: np.random.Generator, cuts: Sequence[int], integer: bool) -> list[float]:
    """Signed slope per piece, alternating direction, random magnitudes."""
    direction = 1 if rng.random() < 0.5 else -1
    out = []
    for _ in range(len(cuts) + 1):
        magnitude = float(rng.integers(2, 6)) if integer else float(rng.uniform(0.8, 5.0))
        out.append(direction * magnitude)
        direction = -direction
    return out


def _camouflage(
    rng: np.random.Generator,
    per_cat: dict[str, list[int]],
    slopes: dict[str, list[float]],
    first: str,
    second: str,
    shared: int,
    integer: bool,
) -> None:
    """Make the second category's trend flip at ``shared`` offset the first's.

    The two slope changes nearly cancel in the aggregate, hiding the
    breakpoint from shape-based methods while the contributor mix flips.
    """
    pos_a = per_cat[first].index(shared)
    pos_b = per_cat[second].index(shared)
    change_a = slopes[first][pos_a + 1] - slopes[first][pos_a]
    if integer:
        target = float(int(abs(change_a)))  # keep the series integer-valued
        before = float(int(target // 2))
        after = target - before
    else:
        target = min(max(abs(change_a) * float(rng.uniform(0.9, 1.0)), 1.6), 10.0)
        before = min(max(target * float(rng.uniform(0.35, 0.65)), 0.8), target - 0.8)
        after = target - before
    sign_b = -1.0 if change_a > 0 else 1.0  # flip opposite to the first category
    # rewrite the second category's slopes, keeping alternation on both sides
    new_b = list(slopes[second])
    new_b[pos_b] = -sign_b * before
    new_b[pos_b + 1] = sign_b * after
    for k in range(pos_b - 1, -1, -1):
        new_b[k] = -np.sign(new_b[k + 1]) * abs(new_b[k])
    for k in range(pos_b + 2, len(new_b)):
        new_b[k] = -np.sign(new_b[k - 1]) * abs(new_b[k])
    slopes[second] = new_b


def _piecewise_series(
    rng: np.random.Generator, n: int, cuts: Sequence[int], slopes: Sequence[float]
) -> np.ndarray:
    """Linear pieces between the cuts with the given slopes, kept positive."""
    boundaries = [0, *cuts, n - 1]
    values = np.empty(n, dtype=np.float64)
    values[0] = float(rng.integers(200, 501))
    for (a, b), slope in zip(zip(boundaries, boundaries[1:]), slopes):
        steps = np.arange(1, b - a + 1, dtype=np.float64)
        values[a + 1 : b + 1] = values[a] + slope * steps
    low = values.min()
    if low < 5.0:
        values += np.ceil(5.0 - low)
    return values


def add_noise(series: np.ndarray, snr_db: float | None, seed) -> np.ndarray:
    """Additive Gaussian noise sized so the signal-to-noise ratio hits snr_db.

    Signal power is the variance of the clean series. ``seed`` may be an
    integer or a Generator; a None/inf snr_db returns the series unchanged.
    """
    series = np.asarray(series, dtype=np.float64)
    if snr_db is None or np.isinf(snr_db):
        return series.copy()
    if not np.isfinite(snr_db):
        raise DataError("snr_db must be finite or the no-noise sentinel")
    power = float(np.mean((series - series.mean()) ** 2))
    if power == 0.0:
        raise DataError("SNR undefined for a constant series")
    sigma = np.sqrt(power / (10.0 ** (snr_db / 10.0)))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return series + rng.normal(0.0, sigma, len(series))


# ---------------------------------------------------------------------------
# Accuracy metric
# ---------------------------------------------------------------------------


def distance_percent(candidate: SegmentationScheme, truth: GroundTruth, n: int | None = None) -> float:
    """Normalized cut displacement between a candidate scheme and the truth.

    Requires the oracle-K protocol (equal cut counts); the sorted interior
    cuts are matched rank-wise and the summed absolute displacement is
    reported as a percentage of K*n.
    """
    n = truth.n if n is None else n
    cand = candidate.interior
    ref = truth.interior_cuts
    if len(cand) != len(ref):
        raise DataError(
            f"oracle-K protocol violated: candidate has {len(cand) + 1} segments, truth {len(ref) + 1}"
        )
    k = len(ref) + 1
    displacement = sum(abs(a - b) for a, b in zip(sorted(cand), sorted(ref)))
    return 100.0 * displacement / (k * n)


# ---------------------------------------------------------------------------
# Bottom-up baseline (piecewise linear approximation)
# ---------------------------------------------------------------------------


def bottom_up_segment(values: np.ndarray, k: int) -> SegmentationScheme:
    """Classic bottom-up merging to k segments by least-squares line fit cost.

    Starts from unit segments and repeatedly merges the adjacent pair whose
    merged linear fit has the smallest residual (the classic formulation);
    ties merge the leftmost. On an exactly piecewise-linear series the
    zero-residual within-piece merges are exhausted first, so the true cuts
    come back exactly.
    """
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if k < 1:
        raise DataError("k must be >= 1")
    if k > n - 1:
        raise DataError(f"k={k} exceeds the {n - 1} finest segments")

    x = np.arange(n, dtype=np.float64)
    cx = np.concatenate([[0.0], np.cumsum(x)])
    cxx = np.concatenate([[0.0], np.cumsum(x * x)])
    cy = np.concatenate([[0.0], np.cumsum(values)])
    cyy = np.concatenate([[0.0], np.cumsum(values * values)])
    cxy = np.concatenate([[0.0], np.cumsum(x * values)])

    def sse(i: int, j: int) -> float:
        # residual of the least-squares line over points i..j inclusive
        cnt = j - i + 1
        sx = cx[j + 1] - cx[i]
        sy = cy[j + 1] - cy[i]
        sxx = cxx[j + 1] - cxx[i]
        syy = cyy[j + 1] - cyy[i]
        sxy = cxy[j + 1] - cxy[i]
        sxx_c = sxx - sx * sx / cnt
        syy_c = syy - sy * sy / cnt
        sxy_c = sxy - sx * sy / cnt
        if sxx_c <= 0.0:
            return max(syy_c, 0.0)
        return max(syy_c - sxy_c * sxy_c / sxx_c, 0.0)

    bounds = list(range(n))  # all points are boundaries: n-1 unit segments

    def merge_cost(t: int) -> float:
        # fit error of the segment that merging t and t+1 would create
        return sse(bounds[t], bounds[t + 2])

    costs = [merge_cost(t) for t in range(len(bounds) - 2)]
    while len(bounds) - 1 > k:
        t = min(range(len(costs)), key=lambda idx: (costs[idx], idx))
        del bounds[t + 1]
        del costs[t]
        if t < len(costs):
            costs[t] = merge_cost(t)
        if t > 0:
            costs[t - 1] = merge_cost(t - 1)
    return SegmentationScheme(tuple(bounds), n)


# ---------------------------------------------------------------------------
# Ground-truth rank experiment over the eight variance metrics
# ---------------------------------------------------------------------------


def synthetic_cube(relation: Relation) -> SeriesCube:
    explanations = enumerate_explanations(relation, ["category"], beta_max=1)
    return materialize_cube(relation, AggSpec("sales", AggFunction.COUNT), explanations)


def sample_schemes(
    n: int, k: int, count: int, rng: np.random.Generator
) -> list[tuple[int, ...]]:
    """Uniform draws of K-segment cut sets (interior positions only)."""
    if k - 1 > n - 2:
        raise DataError(f"cannot place {k - 1} interior cuts on {n} points")
    interior = np.arange(1, n - 1)
    return [
        tuple(np.sort(rng.choice(interior, k - 1, replace=False)).tolist()) for _ in range(count)
    ]


def _objective(
    scorer: SegmentScorer, interior: tuple[int, ...], n: int, metric: str
) -> float:
    cuts = (0, *interior, n - 1)
    return sum(
        (b - a) * scorer.variance(a, b, metric) for a, b in zip(cuts, cuts[1:])
    )


def metric_rank_experiment(
    datasets: Sequence[tuple[Relation, GroundTruth]],
    metrics: Sequence[str] = VARIANCE_METRICS,
    sample_count: int = 10000,
    seed: int = 0,
    m: int = 3,
) -> dict:
    """Rank the ground truth's objective among random schemes, per metric.

    Output carries, per dataset, each metric's ground-truth rank (1 = lowest
    objective among truth plus samples) and the metrics' competition ranking;
    plus the mean metric rank per SNR level.
    """
    if sample_count < 1:
        raise DataError("sample_count must be >= 1")
    per_dataset = []
    for ds_index, (relation, truth) in enumerate(datasets):
        cube = synthetic_cube(relation)
        scorer = SegmentScorer(cube, m=m)
        n = cube.n
        rng = np.random.default_rng((seed, ds_index))
        schemes = sample_schemes(n, truth.k, sample_count, rng)

        needed: set[tuple[int, int]] = set()
        for interior in [truth.interior_cuts, *schemes]:
            cuts = (0, *interior, n - 1)
            needed.update(zip(cuts, cuts[1:]))
        for a, b in sorted(needed):
            scorer.variance_profile(a, b, metrics)

        gt_rank: dict[str, int] = {}
        for metric in metrics:
            truth_objective = _objective(scorer, truth.interior_cuts, n, metric)
            better = sum(
                1
                for interior in schemes
                if _objective(scorer, interior, n, metric) < truth_objective
            )
            gt_rank[metric] = 1 + better
        per_dataset.append(
            {
                "snr_db": truth.snr_db,
                "seed": truth.seed,
                "k": truth.k,
                "gt_rank": gt_rank,
                "metric_rank": _competition_rank(gt_rank),
            }
        )

    by_snr: dict[float | None, list[dict]] = {}
    for entry in per_dataset:
        by_snr.setdefault(entry["snr_db"], []).append(entry)
    mean_rank_by_snr = {
        snr: {
            metric: float(np.mean([e["metric_rank"][metric] for e in entries]))
            for metric in metrics
        }
        for snr, entries in by_snr.items()
    }
    return {"per_dataset": per_dataset, "mean_rank_by_snr": mean_rank_by_snr}


def _competition_rank(gt_rank: dict[str, int]) -> dict[str, int]:
    """1,1,3-style ranking: ties share the best rank, the next entry skips."""
    ordered = sorted(gt_rank.values())
    return {metric: 1 + ordered.index(value) for metric, value in gt_rank.items()}


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def export_dataset(relation: Relation, truth: GroundTruth, out_dir, stem: str) -> tuple[Path, Path]:
    """CSV (T,sales,category) plus a truth sidecar JSON; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("T,sales,category\n")
        t_col = relation.columns["T"]
        s_col = relation.columns["sales"]
        c_col = relation.columns["category"]
        for i in range(relation.row_count):
            fh.write(f"{t_col[i]},{s_col[i]},{c_col[i]}\n")
    truth_path = out_dir / f"{stem}.truth.json"
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "n": truth.n,
                "cuts": list(truth.interior_cuts),
                "per_category_cuts": {k: list(v) for k, v in truth.per_category_cuts.items()},
                "snr_db": truth.snr_db,
                "seed": truth.seed,
            },
            fh,
            indent=2,
        )
    return csv_path, truth_path
