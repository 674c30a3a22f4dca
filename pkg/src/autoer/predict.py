"""Configuration recommendation without ground truth.

Labelled (dataset features ++ config features) -> F1 instances are generated
from datasets that do have a ground truth, a random-forest regressor is tuned
and fitted on them, and the candidate config with the highest predicted F1 is
recommended for the target dataset. Evaluation follows the leave-one-dataset-
out protocol.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from .datamodel import CLUSTERING_ALGORITHMS, PipelineConfig
from .embed import EmbedderRegistry
from .errors import DegenerateDataError
from .ingest import DatasetBundle
from .pipeline import PipelineExecutor
from .profiling import FEATURE_NAMES, DatasetFeatures, profile_dataset
from .samplers import CatDim, IntDim, TPESampler
from .tune import SearchSpace, tune


@dataclass(frozen=True)
class ConfigEncoder:
    """Numeric encoding of a pipeline config: one-hot embedder, raw k, one-hot
    clustering, raw threshold (trees are scale-invariant, so k and threshold
    stay unscaled)."""

    embedders: tuple[str, ...]
    clusterings: tuple[str, ...] = CLUSTERING_ALGORITHMS

    @property
    def width(self) -> int:
        return len(self.embedders) + 1 + len(self.clusterings) + 1

    def feature_names(self) -> tuple[str, ...]:
        return (
            tuple(f"emb={e}" for e in self.embedders)
            + ("k",)
            + tuple(f"clust={c}" for c in self.clusterings)
            + ("threshold",)
        )

    def encode(self, cfg: PipelineConfig) -> np.ndarray:
        if cfg.embedder not in self.embedders:
            raise ValueError(f"embedder {cfg.embedder!r} not in encoder domain {self.embedders}")
        row = np.zeros(self.width)
        row[self.embedders.index(cfg.embedder)] = 1.0
        row[len(self.embedders)] = float(cfg.k)
        row[len(self.embedders) + 1 + self.clusterings.index(cfg.clustering)] = 1.0
        row[-1] = cfg.threshold
        return row

    def decode(self, row: np.ndarray) -> PipelineConfig:
        n_e = len(self.embedders)
        n_c = len(self.clusterings)
        return PipelineConfig(
            embedder=self.embedders[int(np.argmax(row[:n_e]))],
            k=int(round(row[n_e])),
            clustering=self.clusterings[int(np.argmax(row[n_e + 1 : n_e + 1 + n_c]))],
            threshold=float(row[-1]),
        )


@dataclass(frozen=True)
class Instance:
    """One training row: a dataset profile, a config, and the achieved F1."""

    dataset: str
    features: DatasetFeatures
    config: PipelineConfig
    f1: float


@dataclass
class InstanceSet:
    encoder: ConfigEncoder
    instances: list[Instance] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.instances)

    def datasets(self) -> tuple[str, ...]:
        seen: list[str] = []
        for inst in self.instances:
            if inst.dataset not in seen:
                seen.append(inst.dataset)
        return tuple(seen)

    def excluding(self, dataset: str) -> "InstanceSet":
        return InstanceSet(
            encoder=self.encoder,
            instances=[i for i in self.instances if i.dataset != dataset],
        )

    def only(self, dataset: str) -> "InstanceSet":
        return InstanceSet(
            encoder=self.encoder,
            instances=[i for i in self.instances if i.dataset == dataset],
        )

    def feature_names(self) -> tuple[str, ...]:
        return FEATURE_NAMES + self.encoder.feature_names()

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        X = np.stack(
            [np.concatenate([i.features.vector(), self.encoder.encode(i.config)]) for i in self.instances]
        )
        y = np.array([i.f1 for i in self.instances])
        return X, y

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", *FEATURE_NAMES, "embedder", "k", "clustering", "threshold", "f1"])
            for i in self.instances:
                writer.writerow(
                    [i.dataset, *[repr(v) for v in i.features.vector()],
                     i.config.embedder, i.config.k, i.config.clustering,
                     repr(i.config.threshold), repr(i.f1)]
                )

    @classmethod
    def from_csv(cls, path: str | Path, embedders: Optional[Sequence[str]] = None) -> "InstanceSet":
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                rows.append(row)
        if embedders is None:
            # inferred domain is sorted so the encoder is row-order independent
            embedders = tuple(sorted({r["embedder"] for r in rows}))
        out = cls(encoder=ConfigEncoder(embedders=tuple(embedders)))
        for r in rows:
            features = DatasetFeatures(**{name: float(r[name]) for name in FEATURE_NAMES})
            cfg = PipelineConfig(r["embedder"], int(r["k"]), r["clustering"], float(r["threshold"]))
            out.instances.append(Instance(r["dataset"], features, cfg, float(r["f1"])))
        return out


def generate_instances(
    bundles: Sequence[DatasetBundle],
    mode: str,
    registry: EmbedderRegistry,
    space: SearchSpace,
    budget: int = 100,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    samplers: Sequence[str] = ("random", "qmc", "tpe", "gp"),
) -> InstanceSet:
    """Evaluate configurations on every bundle and collect labelled instances.

    ``grid`` evaluates every grid point, ``sampling`` runs each sampler for
    ``budget`` trials per seed, and ``all`` merges both. Zero-F1 instances and
    duplicate (dataset, config) rows are dropped.
    """
    if mode not in ("grid", "sampling", "all"):
        raise ValueError(f"mode must be grid|sampling|all, got {mode!r}")
    out = InstanceSet(encoder=ConfigEncoder(embedders=tuple(space.embedders)))
    seen: set[tuple] = set()
    for bundle in bundles:
        if bundle.gt is None or len(bundle.gt) == 0:
            raise DegenerateDataError(f"bundle {bundle.name!r} has no ground truth")
        features = profile_dataset(bundle.e1, bundle.e2)
        executor = PipelineExecutor(bundle, registry)

        def record(cfg: PipelineConfig, f1: float) -> None:
            key = (bundle.name, cfg.key())
            if f1 <= 0.0 or key in seen:
                return
            seen.add(key)
            out.instances.append(Instance(bundle.name, features, cfg, f1))

        if mode in ("grid", "all"):
            for cfg in space.grid_points():
                record(cfg, executor.run(cfg).metrics.f1)
        if mode in ("sampling", "all"):
            for sampler in samplers:
                for seed in seeds:
                    log, _ = tune(
                        bundle, space, sampler, budget, seed, registry, executor=executor
                    )
                    for trial in log.trials:
                        record(trial.config, trial.f1)
    return out


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 300
    max_depth: int = 10
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str = "sqrt"

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestParams":
        return cls(
            n_estimators=int(d["n_estimators"]),
            max_depth=int(d["max_depth"]),
            min_samples_split=int(d["min_samples_split"]),
            min_samples_leaf=int(d["min_samples_leaf"]),
            max_features=str(d["max_features"]),
        )


@dataclass
class ForestModel:
    """A fitted regression forest stored as plain arrays.

    Prediction is the unweighted mean over trees; importances are the
    normalized mean impurity (variance) reductions. The model is
    self-describing: hyperparameters, feature order, and serialized trees all
    persist to JSON.
    """

    params: ForestParams
    feature_names: tuple[str, ...]
    encoder: ConfigEncoder
    trees: list[dict]
    importances: np.ndarray
    seed: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros(len(X))
        for tree in self.trees:
            total += _tree_predict(tree, X)
        return total / len(self.trees)

    def feature_importances(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(self.feature_names, self.importances)}

    def to_json(self, path: str | Path) -> None:
        payload = {
            "params": self.params.to_dict(),
            "feature_names": list(self.feature_names),
            "encoder": {
                "embedders": list(self.encoder.embedders),
                "clusterings": list(self.encoder.clusterings),
            },
            "importances": [float(v) for v in self.importances],
            "seed": self.seed,
            "trees": [
                {key: np.asarray(arr).tolist() for key, arr in tree.items()}
                for tree in self.trees
            ],
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "ForestModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        trees = [
            {
                "children_left": np.array(t["children_left"], dtype=np.int64),
                "children_right": np.array(t["children_right"], dtype=np.int64),
                "feature": np.array(t["feature"], dtype=np.int64),
                "threshold": np.array(t["threshold"], dtype=np.float64),
                "value": np.array(t["value"], dtype=np.float64),
            }
            for t in payload["trees"]
        ]
        return cls(
            params=ForestParams.from_dict(payload["params"]),
            feature_names=tuple(payload["feature_names"]),
            encoder=ConfigEncoder(
                embedders=tuple(payload["encoder"]["embedders"]),
                clusterings=tuple(payload["encoder"]["clusterings"]),
            ),
            trees=trees,
            importances=np.array(payload["importances"]),
            seed=int(payload["seed"]),
        )


def _tree_predict(tree: dict, X: np.ndarray) -> np.ndarray:
    left = tree["children_left"]
    right = tree["children_right"]
    feature = tree["feature"]
    threshold = tree["threshold"]
    value = tree["value"]
    node = np.zeros(len(X), dtype=np.int64)
    while True:
        at_leaf = left[node] == -1
        if at_leaf.all():
            break
        go_left = X[np.arange(len(X)), np.maximum(feature[node], 0)] <= threshold[node]
        step = np.where(go_left, left[node], right[node])
        node = np.where(at_leaf, node, step)
    return value[node]


def _fit_sklearn(X: np.ndarray, y: np.ndarray, hp: ForestParams, seed: int, n_jobs: int = 1):
    forest = RandomForestRegressor(
        n_estimators=hp.n_estimators,
        max_depth=hp.max_depth,
        min_samples_split=hp.min_samples_split,
        min_samples_leaf=hp.min_samples_leaf,
        max_features=hp.max_features,
        criterion="squared_error",
        bootstrap=True,
        random_state=seed,
        n_jobs=n_jobs,
    )
    forest.fit(X, y)
    return forest


def fit_forest(train: InstanceSet, hp: ForestParams, seed: int = 0, n_jobs: int = 1) -> ForestModel:
    """Fit the regression forest on all training instances."""
    X, y = train.matrix()
    if len(train) < hp.min_samples_split:
        raise DegenerateDataError(
            f"{len(train)} instances < min_samples_split={hp.min_samples_split}"
        )
    forest = _fit_sklearn(X, y, hp, seed, n_jobs=n_jobs)
    trees = []
    for est in forest.estimators_:
        t = est.tree_
        trees.append(
            {
                "children_left": t.children_left.copy(),
                "children_right": t.children_right.copy(),
                "feature": t.feature.copy(),
                "threshold": t.threshold.copy(),
                "value": t.value.reshape(-1).copy(),
            }
        )
    return ForestModel(
        params=hp,
        feature_names=train.feature_names(),
        encoder=train.encoder,
        trees=trees,
        importances=forest.feature_importances_.copy(),
        seed=seed,
    )


# Hyperparameter domains for forest tuning.
_FOREST_DIMS = [
    IntDim("n_estimators", 100, 1000),
    IntDim("max_depth", 3, 10),
    IntDim("min_samples_split", 2, 20),
    IntDim("min_samples_leaf", 1, 20),
    CatDim("max_features", ("sqrt", "log2")),
]


def tune_forest(
    train: InstanceSet,
    seed: int = 0,
    n_trials: int = 50,
    n_jobs: int = 1,
) -> ForestParams:
    """Pick near-optimal forest hyperparameters within ``n_trials`` TPE trials.

    A validation split holds out 10% of the instances of each known dataset
    (stratified); trials minimize validation MSE.
    """
    datasets = train.datasets()
    if len(datasets) < 2:
        raise DegenerateDataError(
            "forest tuning needs instances from >= 2 datasets for the stratified split"
        )
    rng = np.random.default_rng(seed)
    val_idx: list[int] = []
    for dataset in datasets:
        idx = [i for i, inst in enumerate(train.instances) if inst.dataset == dataset]
        n_val = max(1, int(round(0.1 * len(idx))))
        chosen = rng.choice(len(idx), size=n_val, replace=False)
        val_idx.extend(idx[c] for c in sorted(chosen))
    val_mask = np.zeros(len(train), dtype=bool)
    val_mask[val_idx] = True
    X, y = train.matrix()
    X_train, y_train = X[~val_mask], y[~val_mask]
    X_val, y_val = X[val_mask], y[val_mask]

    sampler = TPESampler(_FOREST_DIMS, seed=seed)
    history: list[tuple[dict, float]] = []
    best_mse = np.inf
    best_params = ForestParams()
    for _ in range(n_trials):
        values = sampler.suggest(history)
        hp = ForestParams(
            n_estimators=int(values["n_estimators"]),
            max_depth=int(values["max_depth"]),
            min_samples_split=int(values["min_samples_split"]),
            min_samples_leaf=int(values["min_samples_leaf"]),
            max_features=values["max_features"],
        )
        forest = _fit_sklearn(X_train, y_train, hp, seed, n_jobs=n_jobs)
        mse = float(np.mean((forest.predict(X_val) - y_val) ** 2))
        history.append((values, -mse))  # sampler maximizes
        if mse < best_mse:
            best_mse = mse
            best_params = hp
    return best_params


def recommend(
    model: ForestModel,
    target_features: DatasetFeatures,
    candidates: Sequence[PipelineConfig],
) -> PipelineConfig:
    """Return the candidate with the highest predicted F1 for the target
    dataset (ties go to the lexicographically smallest encoded vector)."""
    if not candidates:
        raise ValueError("candidate list must be non-empty")
    base = np.array(target_features.vector())
    X = np.stack([np.concatenate([base, model.encoder.encode(c)]) for c in candidates])
    preds = model.predict(X)
    top = np.flatnonzero(preds == preds.max())
    winner = min(top, key=lambda i: tuple(X[i]))
    return candidates[int(winner)]


def feature_importances(model: ForestModel) -> dict[str, float]:
    """Normalized mean impurity-reduction importance per feature (sums to 1)."""
    return model.feature_importances()


@dataclass
class LodoReport:
    dataset: str
    config: PipelineConfig
    predicted_f1: float
    actual_f1: float
    train_s: float
    predict_s: float
    pipeline_s: float
    params: ForestParams

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "config": self.config.to_dict(),
            "predicted_f1": self.predicted_f1,
            "actual_f1": self.actual_f1,
            "train_s": self.train_s,
            "predict_s": self.predict_s,
            "pipeline_s": self.pipeline_s,
            "params": self.params.to_dict(),
        }


def lodo_evaluate(
    bundles: Sequence[DatasetBundle],
    mode: str,
    registry: EmbedderRegistry,
    space: SearchSpace,
    seed: int = 0,
    budget: int = 100,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    tune_trials: int = 50,
    instances: Optional[InstanceSet] = None,
    n_jobs: int = 1,
) -> list[LodoReport]:
    """Leave-one-dataset-out recommendation over every bundle.

    Each target is recommended a config from a model trained (with forest
    hyperparameter tuning) on all other bundles' instances; the recommended
    pipeline then runs on the target to measure the actual F1.
    """
    if len(bundles) < 2:
        raise DegenerateDataError("leave-one-dataset-out needs >= 2 bundles")
    if instances is None:
        instances = generate_instances(bundles, mode, registry, space, budget=budget, seeds=seeds)
    by_name = {b.name: b for b in bundles}
    reports: list[LodoReport] = []
    for target in instances.datasets():
        train = instances.excluding(target)
        t0 = time.perf_counter()
        params = tune_forest(train, seed=seed, n_trials=tune_trials, n_jobs=n_jobs)
        model = fit_forest(train, params, seed=seed, n_jobs=n_jobs)
        train_s = time.perf_counter() - t0

        bundle = by_name[target]
        target_features = profile_dataset(bundle.e1, bundle.e2)
        candidates = [inst.config for inst in instances.only(target).instances]
        t0 = time.perf_counter()
        chosen = recommend(model, target_features, candidates)
        row = np.concatenate([np.array(target_features.vector()), model.encoder.encode(chosen)])
        predicted = float(model.predict(row[None, :])[0])
        predict_s = time.perf_counter() - t0

        t0 = time.perf_counter()
        result = PipelineExecutor(bundle, registry).run(chosen)
        pipeline_s = time.perf_counter() - t0
        reports.append(
            LodoReport(
                dataset=target,
                config=chosen,
                predicted_f1=predicted,
                actual_f1=result.metrics.f1 if result.metrics else float("nan"),
                train_s=train_s,
                predict_s=predict_s,
                pipeline_s=pipeline_s,
                params=params,
            )
        )
    return reports
