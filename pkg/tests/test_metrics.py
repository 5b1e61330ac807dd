import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from amortized_fairness.ledger import Ledger
from amortized_fairness.metrics import dcg_at_k, ndcg_quality, unfairness


def _dcg_oracle(rels, k):
    return math.fsum((2.0**r - 1.0) / math.log2(i + 2) for i, r in enumerate(rels[:k]))


def test_unfairness_examples():
    assert unfairness(Ledger.from_entries({"a": (0.5, 0.5), "b": (0.25, 0.25)})) == 0.0
    assert unfairness(Ledger.from_entries({"u1": (1, 0.5), "u2": (0, 0.5)})) == 1.0
    assert unfairness(Ledger.from_entries({"u1": (2, 1), "u2": (0, 1)})) == 2.0
    assert unfairness(Ledger()) == 0.0


def test_dcg_examples():
    assert dcg_at_k([1.0, 0.5], 2) == pytest.approx(1.0 + (2**0.5 - 1) / math.log2(3), rel=1e-15)
    assert dcg_at_k([1.0, 0.5], 2) == pytest.approx(1.26134, abs=5e-6)
    assert dcg_at_k([0, 0, 0], 2) == 0.0
    assert dcg_at_k([1.0], 3) == 1.0


def test_dcg_rejects_nonpositive_k():
    with pytest.raises(ValueError):
        dcg_at_k([1.0], 0)


def test_ndcg_examples():
    assert ndcg_quality([0.5, 0.3, 0.2], [0.5, 0.3, 0.2], 2) == 1.0
    assert ndcg_quality([0.4, 0.4, 0.2], [0.4, 0.4, 0.2], 1) == 1.0
    assert ndcg_quality([1.0, 0.0], [0.0, 1.0], 2) == pytest.approx(1 / math.log2(3), rel=1e-15)
    assert ndcg_quality([1.0, 0.0], [0.0, 1.0], 2) == pytest.approx(0.63093, abs=5e-6)


def test_ndcg_all_zero_is_one():
    assert ndcg_quality([0.0, 0.0], [0.0, 0.0], 2) == 1.0


def test_ndcg_multiset_mismatch():
    with pytest.raises(ValueError):
        ndcg_quality([0.6, 0.4], [0.6, 0.3], 2)


rel_lists = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=20)


@given(rel_lists, st.integers(1, 25))
def test_dcg_matches_oracle_and_grows_with_k(rels, k):
    assert dcg_at_k(rels, k) == pytest.approx(_dcg_oracle(rels, k), rel=1e-12, abs=1e-15)
    assert dcg_at_k(rels, k + 1) >= dcg_at_k(rels, k)


@given(rel_lists, st.integers(1, 25))
def test_ndcg_of_itself_is_one(rels, k):
    ordered = sorted(rels, reverse=True)
    assert ndcg_quality(ordered, ordered, k) == 1.0


@given(rel_lists, st.integers(1, 10), st.randoms(use_true_random=False))
def test_ndcg_ignores_order_below_k(rels, k, rnd):
    original = sorted(rels, reverse=True)
    head, tail = original[:k], original[k:]
    shuffled_head = head[:]
    rnd.shuffle(shuffled_head)
    shuffled_tail = tail[:]
    rnd.shuffle(shuffled_tail)
    base = ndcg_quality(original, shuffled_head + tail, k)
    assert ndcg_quality(original, shuffled_head + shuffled_tail, k) == base
    assert 0.0 <= base <= 1.0 + 1e-12


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=1, max_size=10))
def test_unfairness_symmetric_and_nonnegative(pairs):
    forward = Ledger.from_entries({f"s{i}": p for i, p in enumerate(pairs)})
    backward = Ledger.from_entries({f"s{i}": (r, a) for i, (a, r) in enumerate(pairs)})
    value = unfairness(forward)
    assert value >= 0
    assert value == unfairness(backward)
    assert (value == 0) == all(a == r for a, r in pairs)
