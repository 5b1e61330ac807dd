"""Config-driven experiment runs and multi-policy comparisons."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

import yaml

from .attention import GEOMETRIC, SINGULAR, AttentionModel
from .data import (
    REVIEW_SCORE_COLUMNS,
    SyntheticShape,
    generate,
    iter_querylog,
    load_listings,
)
from .ledger import Ledger
from .reranker import (
    ILPPolicy,
    IterationRecord,
    ObjectivePolicy,
    RankingRequest,
    RelevancePolicy,
    RerankPolicy,
    step,
)
from .solver import FEASIBILITY_TOL

log = logging.getLogger(__name__)

SINGLE_QUERY = "single_query"
MULTI_QUERY = "multi_query"
STREAM = "stream"

ITERATION_COLUMNS = ("iteration", "unfairness", "ndcg_quality", "feasible", "solve_ms")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment. Field names are the config-file keys."""

    dataset: str
    shape: str = "uniform"
    subjects: int = 100
    decay: float = 0.5
    path: str | None = None
    id_column: str = "id"
    rating_columns: tuple[str, ...] | None = None
    mode: str = SINGLE_QUERY
    iterations: int = 20000
    repeats: int | None = None
    policy: str = "relevance"
    theta: float | None = None
    candidates: int = 100
    attention: str = SINGULAR
    p: float = 0.5
    cutoff: int = 5
    quality_rank: int | None = None
    feasibility_tol: float = FEASIBILITY_TOL
    output: str = "results"
    label: str | None = None
    timing: bool = True

    def __post_init__(self) -> None:
        if self.dataset not in ("synthetic", "listings", "querylog"):
            raise ConfigError(f"dataset must be synthetic, listings or querylog, got {self.dataset!r}")
        if self.dataset != "synthetic" and not self.path:
            raise ConfigError(f"dataset {self.dataset!r} needs a path")
        if self.mode not in (SINGLE_QUERY, MULTI_QUERY, STREAM):
            raise ConfigError(f"mode must be single_query, multi_query or stream, got {self.mode!r}")
        if self.iterations < 1:
            raise ConfigError("iterations must be at least 1")
        if self.repeats is not None and self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.policy not in ("relevance", "objective", "ilp"):
            raise ConfigError(f"policy must be relevance, objective or ilp, got {self.policy!r}")
        if self.policy == "ilp":
            if self.theta is None:
                raise ConfigError("policy ilp needs theta")
            if self.candidates < self.rank:
                raise ConfigError(f"candidates ({self.candidates}) must be >= quality_rank ({self.rank})")
        if self.theta is not None and not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta}")
        if self.quality_rank is not None and self.quality_rank < 1:
            raise ConfigError("quality_rank must be positive")
        try:
            self.attention_model()
            if self.dataset == "synthetic":
                self.synthetic_shape()
            self.make_policy()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ExperimentConfig":
        unknown = sorted(set(values) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "dataset" not in values:
            raise ConfigError("config needs a dataset key")
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name in values:
                kwargs[f.name] = _coerce(f.name, values[f.name], f.type)
        return cls(**kwargs)

    def replace(self, **changes: Any) -> "ExperimentConfig":
        merged = {k: getattr(self, k) for k in self.field_names()}
        merged.update(changes)
        return type(self).from_mapping({k: v for k, v in merged.items() if v is not None})

    # derived objects -------------------------------------------------------

    @property
    def rank(self) -> int:
        if self.quality_rank is not None:
            return self.quality_rank
        return 1 if self.attention == SINGULAR else self.cutoff

    def attention_model(self) -> AttentionModel:
        if self.attention == SINGULAR:
            return AttentionModel.singular()
        if self.attention == GEOMETRIC:
            return AttentionModel.geometric(self.p, self.cutoff)
        raise ValueError(f"attention must be singular or geometric, got {self.attention!r}")

    def synthetic_shape(self) -> SyntheticShape:
        return SyntheticShape(self.shape, self.subjects, self.decay)

    def make_policy(self) -> RerankPolicy:
        if self.policy == "relevance":
            return RelevancePolicy()
        if self.policy == "objective":
            return ObjectivePolicy()
        return ILPPolicy(self.theta, self.candidates, self.rank, self.feasibility_tol)

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.policy == "ilp":
            return f"ilp_theta={self.theta:g}"
        return self.policy

    def dataset_key(self) -> tuple:
        """Fields that must agree for two runs to be comparable."""
        return (
            self.dataset, self.shape, self.subjects, self.decay, self.path, self.id_column,
            self.resolved_rating_columns(), self.mode, self.iterations, self.resolved_repeats(),
            self.attention, self.p, self.cutoff,
        )

    def resolved_rating_columns(self) -> tuple[str, ...] | None:
        if self.dataset != "listings":
            return None
        if self.rating_columns:
            return tuple(self.rating_columns)
        return REVIEW_SCORE_COLUMNS if self.mode == MULTI_QUERY else REVIEW_SCORE_COLUMNS[:1]

    def resolved_repeats(self) -> int:
        if self.repeats is not None:
            return self.repeats
        return 3000 if self.mode == MULTI_QUERY else 1


def _coerce(key: str, value: Any, annotation: str) -> Any:
    try:
        if value is None:
            return None
        if "tuple" in annotation:
            if isinstance(value, str):
                value = [v.strip() for v in value.split(",") if v.strip()]
            if not isinstance(value, (list, tuple)):
                raise TypeError
            return tuple(str(v) for v in value)
        if annotation.startswith("bool"):
            if isinstance(value, str):
                lowered = value.strip().lower()
                if lowered not in ("true", "false", "yes", "no", "1", "0"):
                    raise TypeError
                return lowered in ("true", "yes", "1")
            if not isinstance(value, bool):
                raise TypeError
            return value
        if annotation.startswith("int"):
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise TypeError
            return int(float(value))
        if annotation.startswith("float"):
            if isinstance(value, bool):
                raise TypeError
            value = float(value)
            if not math.isfinite(value):
                raise TypeError
            return value
        if isinstance(value, (list, dict)):
            raise TypeError
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {value!r}") from None


def load_config(path: str | os.PathLike, overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Read a flat YAML mapping of config keys; ``overrides`` win over the file."""
    try:
        with open(path, encoding="utf-8") as fh:
            values = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if values is None:
        values = {}
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: expected a key-value mapping")
    for key, value in values.items():
        if isinstance(value, dict):
            raise ConfigError(f"{path}: nested value under {key!r}; the config is flat")
    values = {str(k): v for k, v in values.items()}
    values.update(overrides or {})
    return ExperimentConfig.from_mapping(values)


# ----------------------------------------------------------------------------
# running


def load_requests(config: ExperimentConfig) -> list[RankingRequest]:
    if config.dataset == "synthetic":
        return [generate(config.synthetic_shape())]
    if config.dataset == "listings":
        return load_listings(config.path, config.id_column, config.resolved_rating_columns())
    return list(iter_querylog(config.path))


def request_stream(config: ExperimentConfig, requests: Sequence[RankingRequest]) -> Iterator[RankingRequest]:
    """The sequence of rankings an experiment processes."""
    if not requests:
        raise ConfigError("dataset produced no rankings")
    if config.mode == SINGLE_QUERY:
        for _ in range(config.iterations):
            yield requests[0]
        return
    for _ in range(config.resolved_repeats()):
        yield from requests


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[IterationRecord]
    ledger: Ledger
    runtime: float
    orders: list[list[str]] | None = None

    @property
    def unfairness(self) -> list[float]:
        return [r.unfairness for r in self.records]

    def summary(self) -> dict[str, Any]:
        quality = [r.ndcg_quality for r in self.records]
        return {
            "label": self.config.name,
            "iterations": len(self.records),
            "subjects": len(self.ledger),
            "final_unfairness": self.records[-1].unfairness if self.records else 0.0,
            "mean_unfairness": sum(self.unfairness) / len(self.records) if self.records else 0.0,
            "min_quality": min(quality, default=1.0),
            "max_quality": max(quality, default=1.0),
            "infeasible_iterations": sum(not r.solver_feasible for r in self.records),
            "total_runtime_s": self.runtime,
        }


def simulate(
    config: ExperimentConfig,
    requests: Sequence[RankingRequest] | None = None,
    keep_orders: bool = False,
) -> RunResult:
    """Run the iteration loop in memory."""
    if requests is None:
        requests = load_requests(config)
    policy = config.make_policy()
    model = config.attention_model()
    ledger = Ledger()
    records = []
    orders = [] if keep_orders else None
    start = time.perf_counter()
    for request in request_stream(config, requests):
        order, record, _ = step(ledger, request, policy, model, config.rank)
        records.append(record)
        if orders is not None:
            orders.append(order)
    runtime = time.perf_counter() - start
    return RunResult(config, records, ledger, runtime, orders)


def write_iterations(path: str | os.PathLike, records: Iterable[IterationRecord], timing: bool = True) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ITERATION_COLUMNS)
        for r in records:
            ms = f"{r.solve_time * 1e3:.3f}" if timing else "0"
            writer.writerow([r.iteration, repr(r.unfairness), repr(r.ndcg_quality), str(r.solver_feasible).lower(), ms])


def run(config: ExperimentConfig) -> RunResult:
    """Simulate and write ``iterations.csv``, ``ledger.csv`` and ``summary.json``."""
    result = simulate(config)
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    write_iterations(out / "iterations.csv", result.records, config.timing)
    result.ledger.write_csv(out / "ledger.csv")
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(result.summary(), fh, indent=2)
        fh.write("\n")
    log.info("%s: %d iterations in %.1fs -> %s", config.name, len(result.records), result.runtime, out)
    return result


def expand_grid(
    base: ExperimentConfig, thetas: Sequence[float] = (), baselines: bool = False
) -> list[ExperimentConfig]:
    """ILP configs for each theta, plus the Relevance and Objective baselines."""
    configs = []
    if baselines:
        configs += [base.replace(policy="relevance", label=None), base.replace(policy="objective", label=None)]
    configs += [base.replace(policy="ilp", theta=t, label=None) for t in thetas]
    return configs


def _simulate_unfairness(config: ExperimentConfig) -> list[float]:
    return simulate(config).unfairness


def compare(configs: Sequence[ExperimentConfig], jobs: int = 1) -> tuple[list[str], list[list]]:
    """Unfairness curves of several runs on one dataset, one column per run."""
    if not configs:
        raise ConfigError("nothing to compare")
    key = configs[0].dataset_key()
    for c in configs[1:]:
        if c.dataset_key() != key:
            raise ConfigError(f"{c.name} does not share the dataset and attention model of {configs[0].name}")
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate column labels: {names}; set distinct label keys")
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            curves = list(pool.map(_simulate_unfairness, configs))
    else:
        curves = [_simulate_unfairness(c) for c in configs]
    header = ["iteration", *names]
    length = max(len(c) for c in curves)
    rows = []
    for i in range(length):
        rows.append([i + 1, *(repr(c[i]) if i < len(c) else "" for c in curves)])
    return header, rows


def write_table(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
