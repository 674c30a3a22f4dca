"""Ground-truth-driven configuration search: grid search, the four samplers,
the trial loop, and F1-/runtime-ratio reporting."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .datamodel import CLUSTERING_ALGORITHMS, GroundTruth, PipelineConfig
from .embed import EmbedderRegistry
from .errors import EmptyGroundTruthError
from .ingest import DatasetBundle
from .pipeline import PipelineExecutor
from .samplers import CatDim, Dimension, FloatDim, IntDim, contains, make_sampler

DEFAULT_THRESHOLD_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class SearchSpace:
    """The 4-parameter configuration space.

    Samplers treat the threshold as continuous on [threshold_low,
    threshold_high]; grid search uses the discrete threshold grid.
    """

    embedders: tuple[str, ...]
    k_min: int = 1
    k_max: int = 100
    clusterings: tuple[str, ...] = CLUSTERING_ALGORITHMS
    threshold_low: float = 0.0
    threshold_high: float = 1.0
    threshold_grid: tuple[float, ...] = DEFAULT_THRESHOLD_GRID

    def __post_init__(self) -> None:
        if not self.embedders:
            raise ValueError("search space needs at least one embedder")
        if self.k_min < 1 or self.k_max < self.k_min:
            raise ValueError(f"bad k range [{self.k_min}, {self.k_max}]")

    def dims(self) -> list[Dimension]:
        return [
            CatDim("embedder", tuple(self.embedders)),
            IntDim("k", self.k_min, self.k_max),
            CatDim("clustering", tuple(self.clusterings)),
            FloatDim("threshold", self.threshold_low, self.threshold_high),
        ]

    @property
    def grid_size(self) -> int:
        return (
            len(self.embedders)
            * (self.k_max - self.k_min + 1)
            * len(self.clusterings)
            * len(self.threshold_grid)
        )

    def grid_points(self) -> Iterator[PipelineConfig]:
        for embedder in self.embedders:
            for k in range(self.k_min, self.k_max + 1):
                for clustering in self.clusterings:
                    for threshold in self.threshold_grid:
                        yield PipelineConfig(embedder, k, clustering, threshold)

    def contains_config(self, cfg: PipelineConfig) -> bool:
        return (
            cfg.embedder in self.embedders
            and self.k_min <= cfg.k <= self.k_max
            and cfg.clustering in self.clusterings
            and self.threshold_low <= cfg.threshold <= self.threshold_high
        )


@dataclass(frozen=True)
class Trial:
    number: int
    config: PipelineConfig
    f1: float
    runtime_s: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "config": self.config.to_dict(),
            "f1": self.f1,
            "runtime_s": self.runtime_s,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trial":
        return cls(
            number=int(d["number"]),
            config=PipelineConfig.from_dict(d["config"]),
            f1=float(d["f1"]),
            runtime_s=float(d["runtime_s"]),
            seed=int(d["seed"]),
        )


@dataclass
class TrialLog:
    sampler: str
    budget: int
    dataset: str
    seed: int
    trials: list[Trial] = field(default_factory=list)

    def append(self, trial: Trial) -> None:
        expected = len(self.trials) + 1
        if trial.number != expected:
            raise ValueError(f"trial numbers must be consecutive; expected {expected}, got {trial.number}")
        self.trials.append(trial)

    def best(self) -> Trial:
        if not self.trials:
            raise ValueError("empty trial log")
        best = self.trials[0]
        for t in self.trials[1:]:
            if t.f1 > best.f1:  # ties keep the earliest trial
                best = t
        return best

    @property
    def total_runtime_s(self) -> float:
        return sum(t.runtime_s for t in self.trials)

    def cumulative_best_f1(self) -> list[float]:
        out: list[float] = []
        best = -np.inf
        for t in self.trials:
            best = max(best, t.f1)
            out.append(best)
        return out

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            header = {
                "sampler": self.sampler,
                "budget": self.budget,
                "dataset": self.dataset,
                "seed": self.seed,
            }
            fh.write(json.dumps({"meta": header}, sort_keys=True) + "\n")
            for t in self.trials:
                fh.write(json.dumps(t.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "TrialLog":
        with open(path, encoding="utf-8") as fh:
            meta = json.loads(fh.readline())["meta"]
            log = cls(
                sampler=meta["sampler"],
                budget=int(meta["budget"]),
                dataset=meta["dataset"],
                seed=int(meta["seed"]),
            )
            for line in fh:
                line = line.strip()
                if line:
                    log.append(Trial.from_dict(json.loads(line)))
        return log


def _values_to_config(values: dict) -> PipelineConfig:
    return PipelineConfig(
        embedder=values["embedder"],
        k=int(values["k"]),
        clustering=values["clustering"],
        threshold=float(values["threshold"]),
    )


def _subsample_gt(gt: GroundTruth, ratio: float, seed: int) -> GroundTruth:
    """Pick a fixed fraction of the ground truth once per study."""
    pairs = sorted(gt.pairs)
    n_keep = max(1, int(round(ratio * len(pairs))))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(pairs), size=n_keep, replace=False)
    return GroundTruth(pairs=frozenset(pairs[i] for i in sorted(chosen)))


def _require_gt(b: DatasetBundle) -> None:
    if b.gt is None or len(b.gt) == 0:
        raise EmptyGroundTruthError(f"dataset {b.name!r} has no ground truth to tune against")


def grid_search(
    b: DatasetBundle,
    space: SearchSpace,
    registry: EmbedderRegistry,
    executor: Optional[PipelineExecutor] = None,
) -> TrialLog:
    """Evaluate every grid point; the best config is the argmax-F1 trial
    (ties go to the first encountered)."""
    _require_gt(b)
    executor = executor or PipelineExecutor(b, registry)
    log = TrialLog(sampler="grid", budget=space.grid_size, dataset=b.name, seed=0)
    for number, cfg in enumerate(space.grid_points(), start=1):
        t0 = time.perf_counter()
        result = executor.run(cfg)
        elapsed = time.perf_counter() - t0
        log.append(Trial(number=number, config=cfg, f1=result.metrics.f1, runtime_s=elapsed, seed=0))
    return log


def tune(
    b: DatasetBundle,
    space: SearchSpace,
    sampler: str,
    budget: int,
    seed: int,
    registry: EmbedderRegistry,
    executor: Optional[PipelineExecutor] = None,
    gt_subsample: float = 1.0,
    sampler_kwargs: Optional[dict] = None,
) -> tuple[TrialLog, Trial]:
    """Run ``budget`` sequential trials of the named sampler and return the
    log plus the best trial (argmax F1, earliest on ties)."""
    _require_gt(b)
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if not 0.0 < gt_subsample <= 1.0:
        raise ValueError(f"gt_subsample must be in (0, 1], got {gt_subsample}")
    if gt_subsample < 1.0:
        gt = _subsample_gt(b.gt, gt_subsample, seed)
        b = DatasetBundle(e1=b.e1, e2=b.e2, gt=gt, name=b.name)
        executor = None  # the executor must evaluate against the subsampled truth
    executor = executor or PipelineExecutor(b, registry)
    sampler_obj = make_sampler(sampler, space.dims(), seed=seed, **(sampler_kwargs or {}))
    dims = {d.name: d for d in space.dims()}
    log = TrialLog(sampler=sampler, budget=budget, dataset=b.name, seed=seed)
    history: list[tuple[dict, float]] = []
    for number in range(1, budget + 1):
        t0 = time.perf_counter()
        values = sampler_obj.suggest(history)
        for name, value in values.items():
            assert contains(dims[name], value), f"suggested {name}={value!r} is outside the space"
        cfg = _values_to_config(values)
        result = executor.run(cfg)
        elapsed = time.perf_counter() - t0
        f1 = result.metrics.f1
        history.append((values, f1))
        log.append(Trial(number=number, config=cfg, f1=f1, runtime_s=elapsed, seed=seed))
    return log, log.best()


def f1_ratio(log: TrialLog, grid_best_f1: float) -> list[float]:
    """Cumulative-best F1 after each trial divided by the grid-search best.

    May exceed 1: samplers explore continuous thresholds the grid does not.
    """
    if grid_best_f1 <= 0:
        raise ZeroDivisionError("grid best F1 must be positive")
    return [best / grid_best_f1 for best in log.cumulative_best_f1()]


def runtime_ratio(sampler_total_s: float, grid_total_s: float) -> float:
    """Sampler wall time over grid-search wall time for the same dataset."""
    if grid_total_s <= 0:
        raise ZeroDivisionError("grid runtime must be positive")
    return sampler_total_s / grid_total_s
