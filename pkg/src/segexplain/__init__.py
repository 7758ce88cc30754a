"""Explain aggregated time series by segmenting them into periods of consistent top contributors."""

from .dataset import (
    AggFunction,
    AggSpec,
    AttributeSchema,
    DataError,
    Explanation,
    Relation,
    Series,
    SeriesCube,
    apply_derived_columns,
    complement_series,
    enumerate_explanations,
    load_csv,
    materialize_cube,
    overlaps,
    smooth,
)
from .diffs import (
    ScoredExplanation,
    ScoreTable,
    SegmentRef,
    filter_explanations,
    gamma_tau,
    precompute_scores,
)
from .dp import (
    KVarianceCurve,
    SegmentationScheme,
    SketchParams,
    k_segmentation_dp,
    select_optimal_k,
    sketch_select,
)
from .metrics import VARIANCE_METRICS, SegmentScorer, distance, variance
from .pipeline import EvolvingExplanations, ExplainOptions, ExplainRequest, explain_evolving
from .synthbench import (
    GroundTruth,
    SyntheticSpec,
    add_noise,
    bottom_up_segment,
    distance_percent,
    generate_synthetic,
    metric_rank_experiment,
)
from .topk import TopExplanations, brute_force_top_m, ca_top_m, guess_and_verify

__version__ = "0.1.0"

__all__ = [
    "AggFunction",
    "AggSpec",
    "AttributeSchema",
    "DataError",
    "Explanation",
    "EvolvingExplanations",
    "ExplainOptions",
    "ExplainRequest",
    "GroundTruth",
    "KVarianceCurve",
    "Relation",
    "ScoreTable",
    "ScoredExplanation",
    "SegmentRef",
    "SegmentScorer",
    "SegmentationScheme",
    "Series",
    "SeriesCube",
    "SketchParams",
    "SyntheticSpec",
    "TopExplanations",
    "VARIANCE_METRICS",
    "add_noise",
    "apply_derived_columns",
    "bottom_up_segment",
    "brute_force_top_m",
    "ca_top_m",
    "complement_series",
    "distance",
    "distance_percent",
    "enumerate_explanations",
    "explain_evolving",
    "filter_explanations",
    "gamma_tau",
    "generate_synthetic",
    "guess_and_verify",
    "k_segmentation_dp",
    "load_csv",
    "materialize_cube",
    "metric_rank_experiment",
    "overlaps",
    "precompute_scores",
    "select_optimal_k",
    "sketch_select",
    "smooth",
    "variance",
]
