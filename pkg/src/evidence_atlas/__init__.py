"""Compile structured evidence cards into a queryable atlas of canonical estimands."""

from .atlas import Atlas, AtlasEdge, GraphStats, build_atlas, graph_stats, hub_ranking, node_roles
from .bucketing import Bucket, BucketKey, bucket_key, comparable, partition, poolable
from .canonicalize import CanonicalClaim, canonicalize, reconstruct
from .compile import compile_corpus
from .config import BuildConfig, load_config
from .conflict import ConflictAnnotation, HeterogeneityConfig, detect_conflicts
from .horizon import AlignmentConfig, CanonicalHorizonClass, align, extended_align
from .quality import QualityConfig, quality_score, select_default
from .query import AnswerObject, QueryConstraints, QuerySpec, run_query

__all__ = [
    "AlignmentConfig",
    "AnswerObject",
    "Atlas",
    "AtlasEdge",
    "Bucket",
    "BucketKey",
    "BuildConfig",
    "CanonicalClaim",
    "CanonicalHorizonClass",
    "ConflictAnnotation",
    "GraphStats",
    "HeterogeneityConfig",
    "QualityConfig",
    "QueryConstraints",
    "QuerySpec",
    "align",
    "bucket_key",
    "build_atlas",
    "canonicalize",
    "comparable",
    "compile_corpus",
    "detect_conflicts",
    "extended_align",
    "graph_stats",
    "hub_ranking",
    "load_config",
    "node_roles",
    "partition",
    "poolable",
    "quality_score",
    "reconstruct",
    "run_query",
    "select_default",
]
