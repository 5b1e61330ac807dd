"""Unfairness and ranking-quality measures."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .ledger import Ledger


def gains(relevances: Sequence[float] | np.ndarray) -> np.ndarray:
    """Exponential DCG gain ``2**r - 1``."""
    return np.exp2(np.asarray(relevances, dtype=float)) - 1.0


def discounts(k: int) -> np.ndarray:
    """Logarithmic discounts ``log2(j + 1)`` for positions ``j = 1..k``."""
    return np.log2(np.arange(2, k + 2, dtype=float))


def unfairness(ledger: Ledger) -> float:
    """L1 distance between cumulative attention and cumulative relevance."""
    a, r = ledger.arrays()
    return float(np.abs(a - r).sum())


def dcg_at_k(relevances_in_display_order: Sequence[float] | np.ndarray, k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    top = np.asarray(relevances_in_display_order, dtype=float)[:k]
    if top.size == 0:
        return 0.0
    return float(np.sum(gains(top) / discounts(top.size)))


def ndcg_quality(
    original_order_relevances: Sequence[float] | np.ndarray,
    reordered_relevances: Sequence[float] | np.ndarray,
    k: int,
) -> float:
    """DCG@k of the reordered ranking relative to the original one.

    The original ranking is taken as ground truth, so it should be sorted by
    decreasing relevance. Returns 1.0 when the original DCG@k is zero.

    Raises:
        ValueError: if the two rankings do not hold the same scores.
    """
    orig = np.asarray(original_order_relevances, dtype=float)
    new = np.asarray(reordered_relevances, dtype=float)
    if orig.shape != new.shape or not np.array_equal(np.sort(orig), np.sort(new)):
        raise ValueError("reordered ranking is not a permutation of the original scores")
    ideal = dcg_at_k(orig, k)
    if ideal == 0.0:
        return 1.0
    return dcg_at_k(new, k) / ideal
