"""Hybrid semantic-social recommender engine."""

__version__ = "0.1.0"

from .config import EngineConfig, load_config
from .errors import (
    ConfigError,
    EmptyNeighborhoodError,
    GraphError,
    LookupFailure,
    NoOverlapError,
    ParseError,
    SemrecError,
    UnannotatedItemError,
    ValidationError,
)
from .evaluation import (
    EvaluationReport,
    GroundTruth,
    holdout_split,
    mean_absolute_error,
    precision,
    recall,
    run_benchmark,
)
from .graph import (
    CentralityScores,
    SocialGraph,
    betweenness_centrality,
    build_co_rating_graph,
    closeness_centrality,
    degree_centrality,
    density,
    influence_ranking,
)
from .ingest import ConceptCatalog, RatingRecord, RatingScale, RatingsStore, parse_concepts, parse_ratings, validate
from .profile import SemanticUserProfile, build_user_profile, profile_product_similarity
from .recommend import (
    RatingPrediction,
    RecommendationQuery,
    RecommendationResult,
    baseline_cf_recommend,
    pearson_user_similarity,
    recommend_customers,
)
from .similarity import (
    AttributeWeights,
    HybridWeights,
    attribute_item_similarity,
    hybrid_similarity,
    multi_attribute_similarity,
    semantic_item_similarity,
)
from .synthetic import generate_synthetic

__all__ = [
    "AttributeWeights",
    "CentralityScores",
    "ConceptCatalog",
    "ConfigError",
    "EmptyNeighborhoodError",
    "EngineConfig",
    "EvaluationReport",
    "GraphError",
    "GroundTruth",
    "HybridWeights",
    "LookupFailure",
    "NoOverlapError",
    "ParseError",
    "RatingPrediction",
    "RatingRecord",
    "RatingScale",
    "RatingsStore",
    "RecommendationQuery",
    "RecommendationResult",
    "SemanticUserProfile",
    "SemrecError",
    "SocialGraph",
    "UnannotatedItemError",
    "ValidationError",
    "attribute_item_similarity",
    "baseline_cf_recommend",
    "betweenness_centrality",
    "build_co_rating_graph",
    "build_user_profile",
    "closeness_centrality",
    "degree_centrality",
    "density",
    "generate_synthetic",
    "holdout_split",
    "hybrid_similarity",
    "influence_ranking",
    "load_config",
    "mean_absolute_error",
    "multi_attribute_similarity",
    "parse_concepts",
    "parse_ratings",
    "pearson_user_similarity",
    "precision",
    "profile_product_similarity",
    "recall",
    "recommend_customers",
    "run_benchmark",
    "semantic_item_similarity",
    "validate",
]
