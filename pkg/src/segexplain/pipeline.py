"""End-to-end explain pipeline: relation to evolving explanations.

Order of phases: materialize the cube, smooth, drop low-support candidates,
optionally nominate candidate cuts with the sketching pass, segment by
dynamic programming (picking K at the curve's elbow when requested), then
compute each final segment's top explanations from its endpoints.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from datetime import date
from typing import Sequence

import numpy as np

from .dataset import (
    AggSpec,
    DataError,
    Relation,
    SeriesCube,
    enumerate_explanations,
    materialize_cube,
)
from .diffs import filter_explanations
from .dp import (
    KVarianceCurve,
    SegmentationScheme,
    SketchParams,
    segmentation_tables,
    select_optimal_k,
    sketch_select,
)
from .metrics import VARIANCE_METRICS, SegmentScorer
from .topk import TopExplanations

RESULT_FORMAT_VERSION = 1


@dataclass
class ExplainOptions:
    filter_ratio: float = 0.001
    guess_verify: bool = True
    sketching: bool = True
    variance_metric: str = "tse"
    m_bar0: int = 30

    def validate(self) -> None:
        if not (0 <= self.filter_ratio < 1):
            raise DataError(f"filter_ratio must be in [0, 1), got {self.filter_ratio}")
        if self.variance_metric not in VARIANCE_METRICS:
            raise DataError(f"unknown variance metric {self.variance_metric!r}")


@dataclass
class ExplainRequest:
    time_attr: str
    agg: str
    explain_by: Sequence[str]
    measure: str | None = None
    m: int = 3
    beta_max: int = 3
    k: int | str = "auto"
    k_max: int = 20
    smooth_window: int = 1
    time_range: tuple | None = None
    opts: ExplainOptions = field(default_factory=ExplainOptions)

    def validate(self) -> None:
        if self.m < 1:
            raise DataError("m must be >= 1")
        if self.beta_max < 1:
            raise DataError("beta_max (max explanation order) must be >= 1")
        if self.k != "auto":
            if not isinstance(self.k, int) or self.k < 1:
                raise DataError(f"k must be 'auto' or a positive integer, got {self.k!r}")
        if self.k_max < 1:
            raise DataError("k_max must be >= 1")
        if self.smooth_window < 1:
            raise DataError("smooth_window must be >= 1")
        if not self.explain_by:
            raise DataError("explain_by must name at least one attribute")
        self.opts.validate()


@dataclass
class EvolvingExplanations:
    """Final result: the segmentation plus each period's top explanations."""

    scheme: SegmentationScheme
    per_segment: list[TopExplanations]
    curve: KVarianceCurve
    chosen_k: int
    total_variance: float
    timings_ms: dict[str, float]
    cube: SeriesCube
    k_was_auto: bool

    def to_dict(self, include_timings: bool = True) -> dict:
        stamps = self.cube.timestamps
        segments = []
        for seg, top in zip(self.scheme.segments(), self.per_segment):
            expl = []
            for s in top.ranked:
                row = self.cube.index_of(s.explanation)
                expl.append(
                    {
                        "predicates": [
                            {"attr": a, "value": _json_value(v)}
                            for a, v in s.explanation.predicates
                        ],
                        "gamma": s.gamma,
                        "tau": s.tau,
                        "effect_sign": 1 if s.tau == "+" else -1,
                        "series": self.cube.values[row, seg.start : seg.end + 1].tolist(),
                    }
                )
            segments.append(
                {
                    "start": _json_value(stamps[seg.start]),
                    "end": _json_value(stamps[seg.end]),
                    "explanations": expl,
                }
            )
        doc = {
            "version": RESULT_FORMAT_VERSION,
            "k": self.chosen_k,
            "cuts": [_json_value(stamps[c]) for c in self.scheme.cuts],
            "curve": [{"k": k, "variance": v} for k, v in self.curve.points],
            "segments": segments,
        }
        if include_timings:
            doc["timings_ms"] = self.timings_ms
        return doc

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), sort_keys=True)


def _json_value(v):
    if isinstance(v, date):
        return v.isoformat()
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def explain_evolving(relation: Relation, request: ExplainRequest) -> EvolvingExplanations:
    """Run the full pipeline; constituent errors are tagged with their phase."""
    request.validate()
    t_start = time.perf_counter()

    with _phase("precompute"):
        agg = AggSpec.parse(request.measure, request.agg)
        explanations = enumerate_explanations(relation, list(request.explain_by), request.beta_max)
        cube = materialize_cube(relation, agg, explanations, request.time_range)
        cube = cube.smoothed(request.smooth_window)
        cube = filter_explanations(cube, request.opts.filter_ratio)
        scorer = SegmentScorer(
            cube,
            m=request.m,
            guess_verify=request.opts.guess_verify,
            m_bar0=request.opts.m_bar0,
        )
    t_cube = time.perf_counter()

    n = cube.n
    metric = request.opts.variance_metric
    variance = lambda i, j: scorer.variance(i, j, metric)  # noqa: E731

    with _phase("segmentation"):
        ca_before = scorer.ca_seconds
        if request.opts.sketching:
            params = SketchParams.for_length(n)
            if n > params.size + 1:
                scorer.precompute_length_bands(params.max_segment_length, metric)
            positions = sketch_select(n, variance, params)
        else:
            positions = np.arange(n, dtype=np.int64)

        k_cap = min(len(positions) - 1, n - 1)
        if request.k == "auto":
            k_hi = min(request.k_max, k_cap)
        else:
            if request.k > k_cap:
                raise DataError(f"k={request.k} infeasible: at most {k_cap} segments available")
            k_hi = min(max(int(request.k), request.k_max), k_cap)
        tables = segmentation_tables(n, k_hi, variance, candidate_cuts=positions)
        curve = tables.curve()
        _check_monotone(curve)
        if request.k == "auto":
            chosen_k = select_optimal_k(curve, request.k_max) if len(curve.points) >= 3 else 1
        else:
            chosen_k = int(request.k)
        scheme = tables.scheme(chosen_k)
    t_seg = time.perf_counter()

    with _phase("ca"):
        per_segment = [scorer.scored_list(seg.start, seg.end) for seg in scheme.segments()]
    t_end = time.perf_counter()

    ca_ms = scorer.ca_seconds * 1000.0
    seg_ms = (t_seg - t_cube) * 1000.0 - (scorer.ca_seconds - ca_before) * 1000.0
    timings = {
        "precompute": round((t_cube - t_start) * 1000.0, 3),
        "ca": round(ca_ms, 3),
        "segmentation": round(max(seg_ms, 0.0), 3),
        "total": round((t_end - t_start) * 1000.0, 3),
    }
    return EvolvingExplanations(
        scheme=scheme,
        per_segment=per_segment,
        curve=curve,
        chosen_k=chosen_k,
        total_variance=tables.total_variance(chosen_k),
        timings_ms=timings,
        cube=cube,
        k_was_auto=request.k == "auto",
    )


class _phase:
    """Tags DataErrors with the pipeline phase they came from."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, DataError) and not str(exc).startswith("["):
            raise DataError(f"[{self.name}] {exc}") from exc
        return False


def _check_monotone(curve: KVarianceCurve) -> None:
    values = [v for _, v in curve.points]
    for a, b in zip(values, values[1:]):
        if b > a + 1e-9 * max(1.0, abs(a)):
            raise AssertionError(f"K-variance curve not non-increasing: {values}")
