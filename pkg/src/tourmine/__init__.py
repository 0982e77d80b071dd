"""Turn geo-located review logs into interest-based tourist-profile communities."""

__version__ = "0.1.0"

from .community import (
    ClusterAssignment,
    best_louvain,
    filter_clusters,
    louvain,
    matrix_to_weighted_graph,
    modularity,
    profile_report,
)
from .graph import (
    MainstreamSelection,
    MovementGraph,
    NodeInfo,
    build_graph,
    node_supports,
    select_mainstream,
    threshold_subgraph,
)
from .influence import (
    SimilarityMatrix,
    SphereOfInfluence,
    similarity_matrix,
    sphere_distance,
    sphere_of_influence,
)
from .ingest import Review, UserTimeline, build_timelines, parse_reviews
from .measures import MeasureVector, compute_measures, measure_rules, measure_table
from .pipeline import PipelineConfig, RunManifest, run_pipeline
from .rules import SequentialRule, brute_force_rules, mine_rules
from .synth import SynthConfig, generate_synthetic, planted_assignment
from .trips import (
    SequenceDataset,
    Trip,
    build_sequence_dataset,
    merge_trips,
    segment_trips,
)

__all__ = [
    "ClusterAssignment",
    "MainstreamSelection",
    "MeasureVector",
    "MovementGraph",
    "NodeInfo",
    "PipelineConfig",
    "Review",
    "RunManifest",
    "SequenceDataset",
    "SequentialRule",
    "SimilarityMatrix",
    "SphereOfInfluence",
    "SynthConfig",
    "Trip",
    "UserTimeline",
    "best_louvain",
    "brute_force_rules",
    "build_graph",
    "build_sequence_dataset",
    "build_timelines",
    "compute_measures",
    "filter_clusters",
    "generate_synthetic",
    "louvain",
    "matrix_to_weighted_graph",
    "measure_rules",
    "measure_table",
    "merge_trips",
    "mine_rules",
    "modularity",
    "node_supports",
    "parse_reviews",
    "planted_assignment",
    "profile_report",
    "run_pipeline",
    "segment_trips",
    "select_mainstream",
    "similarity_matrix",
    "sphere_distance",
    "sphere_of_influence",
    "threshold_subgraph",
]
