"""Prioritized rule sets ("rulebooks") for ranking vehicle trajectories."""

from .core import Rule, Rulebook, Verdict, ViolationProfile, compare, induced_leq, lex_rank, minimal_set, profile
from .dsl import build_rulebook, load_rulebook, parse_rulebook, serialize_rulebook
from .errors import (
    EvaluationError,
    GeometryError,
    NotAChainError,
    OperationError,
    ProfileError,
    RulebookError,
    TransportError,
    UnknownIdError,
)
from .ops import (
    LinearPositive,
    Max,
    RefinementCertificate,
    aggregate,
    augment,
    certify_strict_refinement,
    forbidden_op_demos,
    priority_refine,
    validate_aggregator,
)
from .planner import CandidateSet, RankingReport, rank, select
from .preorder import OrderMap, PreorderedSet, is_embedding, refines
from .scenario import load_scenario, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "CandidateSet",
    "EvaluationError",
    "GeometryError",
    "LinearPositive",
    "Max",
    "NotAChainError",
    "OperationError",
    "OrderMap",
    "PreorderedSet",
    "ProfileError",
    "RankingReport",
    "RefinementCertificate",
    "Rule",
    "Rulebook",
    "RulebookError",
    "TransportError",
    "UnknownIdError",
    "Verdict",
    "ViolationProfile",
    "aggregate",
    "augment",
    "build_rulebook",
    "certify_strict_refinement",
    "compare",
    "forbidden_op_demos",
    "induced_leq",
    "is_embedding",
    "lex_rank",
    "load_rulebook",
    "load_scenario",
    "minimal_set",
    "parse_rulebook",
    "parse_scenario",
    "priority_refine",
    "profile",
    "rank",
    "refines",
    "select",
    "serialize_rulebook",
    "validate_aggregator",
]
