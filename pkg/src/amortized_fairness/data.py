"""Synthetic relevance profiles and CSV ingestion into ranking requests."""

from __future__ import annotations

import csv
import math
import os
import sys
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .reranker import RankingRequest

UNIFORM = "uniform"
LINEAR = "linear"
EXPONENTIAL = "exponential"

# rating attributes of the multi-query listing workload
REVIEW_SCORE_COLUMNS = (
    "review_scores_rating",
    "review_scores_accuracy",
    "review_scores_cleanliness",
    "review_scores_checkin",
    "review_scores_communication",
    "review_scores_location",
    "review_scores_value",
)
QUERYLOG_HEADER = ("query_id", "subject_id", "score")

# listing exports carry long free-text fields
csv.field_size_limit(min(sys.maxsize, 2**31 - 1))


@dataclass(frozen=True)
class SyntheticShape:
    kind: str
    n: int = 100
    decay: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in (UNIFORM, LINEAR, EXPONENTIAL):
            raise ValueError(f"unknown synthetic shape {self.kind!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"number of subjects must be a positive integer, got {self.n}")
        if self.kind == EXPONENTIAL and not 0.0 < self.decay < 1.0:
            raise ValueError(f"exponential decay must lie in (0, 1), got {self.decay}")


def generate(shape: SyntheticShape) -> RankingRequest:
    """Subjects ``u1..un`` with uniform, linearly or exponentially decaying scores.

    Ids are zero-padded to a common width so that id order matches rank order.
    """
    n = int(shape.n)
    i = np.arange(1, n + 1, dtype=float)
    if shape.kind == UNIFORM:
        raw = np.ones(n)
    elif shape.kind == LINEAR:
        raw = n - i + 1
    else:
        raw = shape.decay ** (i - 1)
    width = len(str(n))
    ids = [f"u{j:0{width}d}" for j in range(1, n + 1)]
    return RankingRequest.from_scores(f"synthetic-{shape.kind}", ids, raw)


def _parse_score(text: str | None) -> float | None:
    if text is None:
        return None
    text = text.strip().rstrip("%")
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        return None
    if not math.isfinite(value) or value < 0:
        return None
    return value


def load_listings(
    path: str | os.PathLike,
    id_column: str = "id",
    rating_columns: Sequence[str] = ("review_scores_rating",),
) -> list[RankingRequest]:
    """One request per rating column, keyed by ``id_column``.

    Rows whose rating is missing or unparseable are dropped from that column's
    request. Ratings are divided by the column maximum and then normalized to
    sum 1.
    """
    if not rating_columns:
        raise ValueError("need at least one rating column")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in (id_column, *rating_columns) if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        columns: dict[str, tuple[list[str], list[float]]] = {c: ([], []) for c in rating_columns}
        for row in reader:
            subject = (row.get(id_column) or "").strip()
            if not subject:
                continue
            for c in rating_columns:
                score = _parse_score(row.get(c))
                if score is not None:
                    columns[c][0].append(subject)
                    columns[c][1].append(score)

    requests = []
    for c in rating_columns:
        ids, scores = columns[c]
        raw = np.asarray(scores, dtype=float)
        if raw.size == 0 or raw.max() <= 0:
            raise ValueError(f"{path}: no usable ratings in column {c!r}")
        requests.append(RankingRequest.from_scores(c, ids, raw / raw.max()))
    return requests


def iter_querylog(path: str | os.PathLike) -> Iterator[RankingRequest]:
    """Stream requests from a ``query_id,subject_id,score`` log.

    Each contiguous block of rows sharing a query id is one request, so a
    query that recurs later in the log yields another request.
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != QUERYLOG_HEADER:
            raise ValueError(f"{path}: expected header {','.join(QUERYLOG_HEADER)}, got {header}")
        current: str | None = None
        ids: list[str] = []
        scores: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            query, subject, text = (cell.strip() for cell in row)
            score = _parse_score(text)
            if score is None:
                raise ValueError(f"{path}:{lineno}: invalid score {text!r}")
            if query != current:
                if current is not None:
                    yield _query_request(path, current, ids, scores)
                current, ids, scores = query, [], []
            ids.append(subject)
            scores.append(score)
        if current is not None:
            yield _query_request(path, current, ids, scores)


def _query_request(path, query: str, ids: list[str], scores: list[float]) -> RankingRequest:
    if len(set(ids)) != len(ids):
        dup = next(s for s in ids if ids.count(s) > 1)
        raise ValueError(f"{path}: subject {dup!r} appears twice in query {query!r}")
    return RankingRequest.from_scores(query, ids, scores)


def load_querylog(path: str | os.PathLike) -> list[RankingRequest]:
    return list(iter_querylog(path))
