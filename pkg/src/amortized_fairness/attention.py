"""Position-bias models: how searcher attention splits over ranking positions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SINGULAR = "singular"
GEOMETRIC = "geometric"


@dataclass(frozen=True)
class AttentionModel:
    """A position-bias model.

    ``kind`` is ``"singular"`` (the top position gets everything) or
    ``"geometric"`` (weight ``p * (1 - p) ** (j - 1)`` for the first
    ``cutoff`` positions, zero below).
    """

    kind: str = GEOMETRIC
    p: float = 0.5
    cutoff: int = 5

    def __post_init__(self) -> None:
        if self.kind not in (SINGULAR, GEOMETRIC):
            raise ValueError(f"unknown attention model {self.kind!r}")
        if self.kind == GEOMETRIC:
            if not 0.0 < self.p <= 1.0:
                raise ValueError(f"geometric attention needs 0 < p <= 1, got {self.p}")
            if int(self.cutoff) != self.cutoff or self.cutoff < 1:
                raise ValueError(f"attention cutoff must be a positive integer, got {self.cutoff}")

    @classmethod
    def singular(cls) -> "AttentionModel":
        return cls(kind=SINGULAR, p=1.0, cutoff=1)

    @classmethod
    def geometric(cls, p: float = 0.5, cutoff: int = 5) -> "AttentionModel":
        return cls(kind=GEOMETRIC, p=p, cutoff=cutoff)

    @property
    def default_quality_rank(self) -> int:
        """Depth at which quality is constrained when none is configured."""
        return 1 if self.kind == SINGULAR else int(self.cutoff)


def position_weights(model: AttentionModel, n: int) -> np.ndarray:
    """Attention fraction for each of ``n`` display positions, summing to 1."""
    if n < 1:
        raise ValueError(f"need at least one position, got n={n}")
    w = np.zeros(n)
    if model.kind == SINGULAR:
        w[0] = 1.0
        return w
    # series truncated at n when the cutoff runs past the ranking
    depth = min(int(model.cutoff), n)
    j = np.arange(depth)
    w[:depth] = model.p * (1.0 - model.p) ** j
    return w / w.sum()
