"""Amortized equity-of-attention reranking.

Rankings are reordered online so that the attention subjects accumulate over
a stream of rankings tracks the relevance they accumulate, while each
ranking keeps its NDCG-quality above a floor.
"""

from .attention import AttentionModel, position_weights
from .data import SyntheticShape, generate, load_listings, load_querylog
from .ledger import Ledger, UnknownSubjectError
from .metrics import dcg_at_k, ndcg_quality, unfairness
from .reranker import (
    ILPPolicy,
    IterationRecord,
    ObjectivePolicy,
    RankingRequest,
    RelevancePolicy,
    prefilter_candidates,
    rerank_ilp,
    rerank_objective,
    rerank_relevance,
    step,
)
from .solver import AssignmentProblem, SolveResult, brute_force, solve_exact

__all__ = [
    "AssignmentProblem",
    "AttentionModel",
    "ILPPolicy",
    "IterationRecord",
    "Ledger",
    "ObjectivePolicy",
    "RankingRequest",
    "RelevancePolicy",
    "SolveResult",
    "SyntheticShape",
    "UnknownSubjectError",
    "brute_force",
    "dcg_at_k",
    "generate",
    "load_listings",
    "load_querylog",
    "ndcg_quality",
    "position_weights",
    "prefilter_candidates",
    "rerank_ilp",
    "rerank_objective",
    "rerank_relevance",
    "solve_exact",
    "step",
    "unfairness",
]
