"""Ranking policies and the per-iteration amortization step."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .attention import AttentionModel, position_weights
from .ledger import Ledger, SubjectId
from .metrics import dcg_at_k, discounts, gains, ndcg_quality, unfairness
from .solver import FEASIBILITY_TOL, AssignmentProblem, SolveResult, solve_exact

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RankingRequest:
    """One query's subjects in relevance order, with sum-normalized relevance."""

    query_id: str
    subject_ids: tuple[SubjectId, ...]
    relevances: np.ndarray

    def __post_init__(self) -> None:
        ids = tuple(self.subject_ids)
        rel = np.array(self.relevances, dtype=float)
        if rel.shape != (len(ids),):
            raise ValueError("need exactly one relevance per subject")
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate subjects in request {self.query_id!r}")
        if not all(ids):
            raise ValueError("subject ids must be non-empty")
        if not np.isfinite(rel).all() or (rel < 0).any() or (rel > 1).any():
            raise ValueError("relevances must lie in [0, 1]")
        if (np.diff(rel) > 0).any():
            raise ValueError("request entries must be sorted by non-increasing relevance")
        if ids and abs(rel.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"relevances sum to {rel.sum()!r}, not 1")
        rel.flags.writeable = False
        object.__setattr__(self, "subject_ids", ids)
        object.__setattr__(self, "relevances", rel)

    @classmethod
    def from_scores(
        cls, query_id: str, subject_ids: Sequence[SubjectId], scores: Sequence[float]
    ) -> "RankingRequest":
        """Normalize raw nonnegative scores to sum 1 and sort (score desc, id asc)."""
        raw = np.asarray(scores, dtype=float)
        if raw.shape != (len(subject_ids),):
            raise ValueError("need exactly one score per subject")
        if not np.isfinite(raw).all() or (raw < 0).any():
            raise ValueError("scores must be finite and nonnegative")
        total = raw.sum()
        if len(raw) and total <= 0:
            raise ValueError(f"scores of request {query_id!r} sum to zero")
        order = sorted(range(len(raw)), key=lambda i: (-raw[i], subject_ids[i]))
        return cls(query_id, tuple(subject_ids[i] for i in order), raw[order] / total if len(raw) else raw)

    def __len__(self) -> int:
        return len(self.subject_ids)

    @cached_property
    def relevance_map(self) -> dict[SubjectId, float]:
        return dict(zip(self.subject_ids, self.relevances.tolist()))

    @cached_property
    def _id_rank(self) -> np.ndarray:
        rank = np.empty(len(self), dtype=np.intp)
        rank[sorted(range(len(self)), key=self.subject_ids.__getitem__)] = np.arange(len(self))
        return rank


@dataclass(frozen=True)
class RelevancePolicy:
    name = "relevance"


@dataclass(frozen=True)
class ObjectivePolicy:
    name = "objective"


@dataclass(frozen=True)
class ILPPolicy:
    """Constrained reranking of a prefiltered candidate set.

    ``candidates`` is the candidate-set size and ``quality_rank`` the depth at
    which NDCG-quality must stay above ``theta``.
    """

    theta: float
    candidates: int = 100
    quality_rank: int = 1
    feasibility_tol: float = FEASIBILITY_TOL
    name: str = field(default="ilp", init=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if self.quality_rank < 1:
            raise ValueError("quality_rank must be positive")
        if self.candidates < self.quality_rank:
            raise ValueError(
                f"candidate set size {self.candidates} is smaller than quality rank {self.quality_rank}"
            )


RerankPolicy = Union[RelevancePolicy, ObjectivePolicy, ILPPolicy]


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    unfairness: float
    ndcg_quality: float
    solver_feasible: bool
    solve_time: float  # seconds


# ----------------------------------------------------------------------------
# policies


def rerank_relevance(request: RankingRequest) -> list[SubjectId]:
    return list(request.subject_ids)


def _deficits(request: RankingRequest, ledger: Ledger, idx: np.ndarray | None = None) -> np.ndarray:
    if idx is None:
        idx = ledger.indices(request.subject_ids)
    a, r = ledger.totals(idx)
    return a - (r + request.relevances)


def _objective_order(request: RankingRequest, deficits: np.ndarray) -> np.ndarray:
    """Request positions sorted by deficit, then relevance desc, then id."""
    return np.lexsort((request._id_rank, -request.relevances, deficits))


def rerank_objective(request: RankingRequest, ledger: Ledger) -> list[SubjectId]:
    """Most underserved subjects first (ascending ``A - R - r``)."""
    order = _objective_order(request, _deficits(request, ledger))
    return [request.subject_ids[i] for i in order]


def _prefilter(request: RankingRequest, deficits: np.ndarray, t: int, k: int) -> np.ndarray:
    n = len(request)
    if n <= t:
        return np.arange(n)
    top = np.arange(min(k, n))
    rest = _objective_order(request, deficits)
    rest = rest[rest >= top.size][: t - top.size]
    return np.sort(np.concatenate([top, rest]))


def prefilter_candidates(request: RankingRequest, ledger: Ledger, t: int, k: int) -> list[SubjectId]:
    """Top-``k`` by relevance plus the lowest-deficit others, ``min(t, n)`` in all.

    Candidates are returned in request (relevance) order.
    """
    if t < k:
        raise ValueError(f"candidate set size {t} is smaller than quality rank {k}")
    picked = _prefilter(request, _deficits(request, ledger), t, k)
    return [request.subject_ids[i] for i in picked]


def build_problem(
    request: RankingRequest,
    ledger: Ledger,
    weights: np.ndarray,
    candidates: np.ndarray,
    policy: ILPPolicy,
) -> AssignmentProblem:
    """Assignment instance placing ``candidates`` (request positions) on the top slots.

    The side tolerance is scaled by the ideal DCG so that the emitted
    ranking's NDCG-quality, not its raw DCG, stays within
    ``policy.feasibility_tol`` of ``theta``.
    """
    m = len(candidates)
    idx = ledger.indices([request.subject_ids[i] for i in candidates])
    a, r = ledger.totals(idx)
    rel = request.relevances[candidates]
    w = np.asarray(weights, dtype=float)[:m]
    cost = np.abs((a[:, None] + w[None, :]) - (r + rel)[:, None])

    k = min(policy.quality_rank, m)
    side = np.zeros((m, m))
    side[:, :k] = gains(rel)[:, None] / discounts(k)[None, :]
    ideal = dcg_at_k(request.relevances, policy.quality_rank)
    tol = policy.feasibility_tol * ideal if ideal > 0 else policy.feasibility_tol
    return AssignmentProblem(cost, side, policy.theta * ideal, tol)


def _rerank_ilp(
    request: RankingRequest,
    ledger: Ledger,
    weights: np.ndarray,
    policy: ILPPolicy,
    idx: np.ndarray | None = None,
) -> tuple[np.ndarray, SolveResult]:
    n = len(request)
    if n == 0:
        return np.arange(0), SolveResult((), 0.0, True)
    deficits = _deficits(request, ledger, idx)
    cands = _prefilter(request, deficits, policy.candidates, policy.quality_rank)
    result = solve_exact(build_problem(request, ledger, weights, cands, policy))
    placed = np.empty(len(cands), dtype=np.intp)
    if result.feasible:
        placed[list(result.assignment)] = cands
    else:
        placed[:] = cands
    chosen = np.zeros(n, dtype=bool)
    chosen[cands] = True
    return np.concatenate([placed, np.flatnonzero(~chosen)]), result


def rerank_ilp(
    request: RankingRequest, ledger: Ledger, weights: np.ndarray, policy: ILPPolicy
) -> list[SubjectId]:
    """Fairness-optimal reordering under the NDCG-quality floor ``policy.theta``.

    Candidates fill the top ``min(t, n)`` positions as the solver assigns
    them; everyone else follows in relevance order. If the solver finds no
    feasible assignment the candidates stay in relevance order.
    """
    if len(weights) != len(request):
        raise ValueError("need one position weight per subject")
    order, _ = _rerank_ilp(request, ledger, np.asarray(weights, dtype=float), policy)
    return [request.subject_ids[i] for i in order]


# ----------------------------------------------------------------------------
# one amortization step


def step(
    ledger: Ledger,
    request: RankingRequest,
    policy: RerankPolicy,
    model: AttentionModel,
    quality_rank: int | None = None,
) -> tuple[list[SubjectId], IterationRecord, Ledger]:
    """Rerank ``request`` under ``policy``, credit the ledger, and record metrics.

    ``quality_rank`` defaults to the ILP policy's rank, else to the attention
    model's default. Unfairness is measured after the ledger update.
    """
    if quality_rank is None:
        quality_rank = policy.quality_rank if isinstance(policy, ILPPolicy) else model.default_quality_rank
    ledger.ensure_subjects(request.subject_ids)
    idx = ledger.indices(request.subject_ids)
    n = len(request)
    weights = position_weights(model, n) if n else np.zeros(0)

    feasible = True
    start = time.perf_counter()
    if isinstance(policy, RelevancePolicy):
        order = np.arange(n)
    elif isinstance(policy, ObjectivePolicy):
        order = _objective_order(request, _deficits(request, ledger, idx))
    elif isinstance(policy, ILPPolicy):
        order, result = _rerank_ilp(request, ledger, weights, policy, idx)
        feasible = result.feasible
    else:
        raise TypeError(f"unknown policy {policy!r}")
    elapsed = time.perf_counter() - start

    ledger.apply_indices(idx[order], weights, request.relevances[order])
    quality = ndcg_quality(request.relevances, request.relevances[order], quality_rank) if n else 1.0
    record = IterationRecord(
        iteration=ledger.iterations_processed,
        unfairness=unfairness(ledger),
        ndcg_quality=quality,
        solver_feasible=feasible,
        solve_time=elapsed,
    )
    return [request.subject_ids[i] for i in order], record, ledger
