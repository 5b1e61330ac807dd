"""Cumulative attention and relevance per subject across a ranking stream."""

from __future__ import annotations

import csv
import os
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

SubjectId = str


class UnknownSubjectError(KeyError):
    """A subject was referenced before being registered in the ledger."""


class Ledger:
    """Running totals ``A_i`` (attention) and ``R_i`` (relevance) per subject.

    Subjects are registered with :meth:`ensure_subjects` and never expire.
    Updates mutate the ledger in place; the mutating methods also return it
    so calls can be chained.
    """

    def __init__(self) -> None:
        self._index: dict[SubjectId, int] = {}
        self._ids: list[SubjectId] = []
        self._attention = np.zeros(16)
        self._relevance = np.zeros(16)
        self.iterations_processed = 0

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, subject: object) -> bool:
        return subject in self._index

    def __iter__(self) -> Iterator[SubjectId]:
        return iter(self._ids)

    def __getitem__(self, subject: SubjectId) -> tuple[float, float]:
        i = self._lookup(subject)
        return float(self._attention[i]), float(self._relevance[i])

    def __repr__(self) -> str:
        return f"Ledger(subjects={len(self)}, iterations={self.iterations_processed})"

    @classmethod
    def from_entries(
        cls, entries: Mapping[SubjectId, tuple[float, float]], iterations: int = 0
    ) -> "Ledger":
        ledger = cls()
        ledger.ensure_subjects(list(entries))
        for subject, (a, r) in entries.items():
            if a < 0 or r < 0:
                raise ValueError(f"negative ledger entry for {subject!r}")
            i = ledger._index[subject]
            ledger._attention[i] = a
            ledger._relevance[i] = r
        ledger.iterations_processed = iterations
        return ledger

    def _lookup(self, subject: SubjectId) -> int:
        try:
            return self._index[subject]
        except KeyError:
            raise UnknownSubjectError(subject) from None

    def _grow(self, size: int) -> None:
        cap = self._attention.size
        if size <= cap:
            return
        while cap < size:
            cap *= 2
        for name in ("_attention", "_relevance"):
            old = getattr(self, name)
            new = np.zeros(cap)
            new[: old.size] = old
            setattr(self, name, new)

    def ensure_subjects(self, ids: Iterable[SubjectId]) -> "Ledger":
        """Register unseen subjects with zero attention and relevance."""
        for subject in ids:
            if subject in self._index:
                continue
            if not subject:
                raise ValueError("subject ids must be non-empty")
            self._grow(len(self._ids) + 1)
            self._index[subject] = len(self._ids)
            self._ids.append(subject)
        return self

    def indices(self, ids: Sequence[SubjectId]) -> np.ndarray:
        return np.fromiter((self._lookup(s) for s in ids), dtype=np.intp, count=len(ids))

    def apply_ranking(
        self,
        display_order: Sequence[SubjectId],
        weights: Sequence[float] | np.ndarray,
        relevances: Mapping[SubjectId, float],
    ) -> "Ledger":
        """Credit position weight and current relevance to each displayed subject."""
        if len(display_order) != len(weights):
            raise ValueError(
                f"{len(display_order)} subjects displayed but {len(weights)} position weights"
            )
        if len(set(display_order)) != len(display_order):
            raise ValueError("display order contains duplicate subjects")
        idx = self.indices(display_order)
        rel = np.fromiter((relevances[s] for s in display_order), dtype=float, count=len(idx))
        self.apply_indices(idx, np.asarray(weights, dtype=float), rel)
        return self

    def apply_indices(self, idx: np.ndarray, weights: np.ndarray, relevances: np.ndarray) -> None:
        """Array form of :meth:`apply_ranking`; ``idx`` must be distinct ledger slots."""
        self._attention[idx] += weights
        self._relevance[idx] += relevances
        self.iterations_processed += 1

    def deficit(self, subject: SubjectId, current_relevance: float) -> float:
        """``A - (R + r)``; the more negative, the more attention the subject is owed."""
        i = self._lookup(subject)
        return float(self._attention[i] - (self._relevance[i] + current_relevance))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Views of the attention and relevance totals, in registration order."""
        n = len(self._ids)
        return self._attention[:n], self._relevance[:n]

    def totals(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._attention[idx], self._relevance[idx]

    def copy(self) -> "Ledger":
        other = Ledger()
        other._index = dict(self._index)
        other._ids = list(self._ids)
        other._attention = self._attention.copy()
        other._relevance = self._relevance.copy()
        other.iterations_processed = self.iterations_processed
        return other

    def write_csv(self, path: str | os.PathLike) -> None:
        a, r = self.arrays()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subject_id", "cum_attention", "cum_relevance"])
            for subject, att, rel in zip(self._ids, a.tolist(), r.tolist()):
                writer.writerow([subject, repr(att), repr(rel)])
