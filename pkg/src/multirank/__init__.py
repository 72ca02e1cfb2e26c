"""Multilayer network influence features for loan portfolios.

The package builds bipartite multilayer networks from loan records, runs
personalized PageRank over the coupled layers, and turns the scores plus
neighbourhood degree counts into a per-borrower feature table suitable for
default prediction.
"""
from .errors import (
    AreaDistrictConflictError,
    BadDateError,
    BorrowerNotInTailError,
    DegenerateLabelsError,
    DuplicateNodeIdError,
    EdgeEndpointMissingError,
    EmptyNetworkError,
    EmptySourceSetError,
    InvalidConfigError,
    MalformedRowError,
    MissingColumnError,
    MissingScenarioRunError,
    MultirankError,
    NegativeStickinessError,
    NonPositiveWeightError,
    NotStochasticError,
    SourceNotCommonNodeError,
    SpanTooShortError,
    ValidationError,
)
from .features import (
    AGGREGATE_COLUMN,
    DEGREE_COLUMNS,
    FEATURE_COLUMNS,
    SCORE_COLUMNS,
    DegreeIndex,
    FeatureRow,
    PruneResult,
    correlation_prune,
    degree_features,
    score_features,
    univariate_auc,
)
from .graph import (
    Edge,
    Layer,
    MultilayerNetwork,
    NodeKind,
    NodeRef,
    SupraMatrix,
    aggregate_network,
    build_network,
    largest_component_fraction,
    read_layer_csv,
    supra_adjacency,
    supra_transition,
    write_layer_csv,
)
from .ingest import (
    LoanRecord,
    WindowSpec,
    build_window_network,
    defaulter_set,
    format_month,
    load_loans,
    parse_loans,
    parse_month,
    write_loans_csv,
)
from .pipeline import (
    PipelineConfig,
    RunResult,
    SweepEntry,
    WindowStats,
    load_config_file,
    run_rolling,
    tune_sweep,
    window_feature_rows,
    write_feature_table,
    write_sweep_table,
)
from .propagation import (
    RESTART_MODES,
    SCENARIOS,
    InfluenceSpec,
    RankResult,
    build_influence_matrix,
    flat_personalized_pagerank,
    multilayer_pagerank,
    personalized_pagerank,
    write_node_scores,
    write_state_scores,
)
from .synth import SynthConfig, generate_loans

__version__ = "0.1.0"

__all__ = [
    "AGGREGATE_COLUMN",
    "AreaDistrictConflictError",
    "BadDateError",
    "BorrowerNotInTailError",
    "DEGREE_COLUMNS",
    "DegenerateLabelsError",
    "DegreeIndex",
    "DuplicateNodeIdError",
    "Edge",
    "EdgeEndpointMissingError",
    "EmptyNetworkError",
    "EmptySourceSetError",
    "FEATURE_COLUMNS",
    "FeatureRow",
    "InfluenceSpec",
    "InvalidConfigError",
    "Layer",
    "LoanRecord",
    "MalformedRowError",
    "MissingColumnError",
    "MissingScenarioRunError",
    "MultilayerNetwork",
    "MultirankError",
    "NegativeStickinessError",
    "NodeKind",
    "NodeRef",
    "NonPositiveWeightError",
    "NotStochasticError",
    "PipelineConfig",
    "PruneResult",
    "RESTART_MODES",
    "RankResult",
    "RunResult",
    "SCENARIOS",
    "SCORE_COLUMNS",
    "SourceNotCommonNodeError",
    "SpanTooShortError",
    "SupraMatrix",
    "SweepEntry",
    "SynthConfig",
    "ValidationError",
    "WindowSpec",
    "WindowStats",
    "aggregate_network",
    "build_influence_matrix",
    "build_network",
    "build_window_network",
    "correlation_prune",
    "defaulter_set",
    "degree_features",
    "flat_personalized_pagerank",
    "format_month",
    "generate_loans",
    "largest_component_fraction",
    "load_config_file",
    "load_loans",
    "multilayer_pagerank",
    "parse_loans",
    "parse_month",
    "personalized_pagerank",
    "read_layer_csv",
    "run_rolling",
    "score_features",
    "supra_adjacency",
    "supra_transition",
    "tune_sweep",
    "univariate_auc",
    "window_feature_rows",
    "write_feature_table",
    "write_layer_csv",
    "write_loans_csv",
    "write_node_scores",
    "write_state_scores",
    "write_sweep_table",
]
