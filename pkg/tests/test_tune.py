import pytest

from autoer.datamodel import PipelineConfig
from autoer.errors import EmptyGroundTruthError
from autoer.ingest import DatasetBundle
from autoer.synth import easy_bundle
from autoer.tune import (
    DEFAULT_THRESHOLD_GRID,
    SearchSpace,
    Trial,
    TrialLog,
    f1_ratio,
    grid_search,
    runtime_ratio,
    tune,
)


def test_threshold_grid():
    assert DEFAULT_THRESHOLD_GRID[0] == 0.05
    assert DEFAULT_THRESHOLD_GRID[-1] == 0.95
    assert len(DEFAULT_THRESHOLD_GRID) == 19


def test_grid_size_counts():
    two = SearchSpace(embedders=("a", "b"))
    assert two.grid_size == 11400
    seven = SearchSpace(embedders=tuple("abcdefg"))
    assert seven.grid_size == 39900
    one = SearchSpace(embedders=("a",), k_min=1, k_max=1, clusterings=("UMC",), threshold_grid=(0.5,))
    assert one.grid_size == 1


def test_grid_points_order_and_membership():
    space = SearchSpace(embedders=("a",), k_min=1, k_max=2, threshold_grid=(0.1, 0.2))
    points = list(space.grid_points())
    assert len(points) == space.grid_size
    assert points[0] == PipelineConfig("a", 1, "UMC", 0.1)
    assert all(space.contains_config(p) for p in points)


def test_trial_log_numbering():
    log = TrialLog(sampler="random", budget=2, dataset="d", seed=0)
    cfg = PipelineConfig("a", 1, "UMC", 0.5)
    log.append(Trial(1, cfg, 0.5, 0.1, 0))
    with pytest.raises(ValueError):
        log.append(Trial(3, cfg, 0.6, 0.1, 0))


def test_trial_log_best_earliest_tie():
    log = TrialLog(sampler="random", budget=3, dataset="d", seed=0)
    cfg1 = PipelineConfig("a", 1, "UMC", 0.5)
    cfg2 = PipelineConfig("a", 2, "UMC", 0.5)
    log.append(Trial(1, cfg1, 0.7, 0.1, 0))
    log.append(Trial(2, cfg2, 0.7, 0.1, 0))
    assert log.best().number == 1


def test_trial_log_jsonl_round_trip(tmp_path):
    log = TrialLog(sampler="tpe", budget=2, dataset="d", seed=3)
    log.append(Trial(1, PipelineConfig("a", 1, "UMC", 0.5), 0.5, 0.01, 3))
    log.append(Trial(2, PipelineConfig("a", 2, "KC", 0.25), 0.75, 0.02, 3))
    p = tmp_path / "log.jsonl"
    log.to_jsonl(p)
    loaded = TrialLog.from_jsonl(p)
    assert loaded.trials == log.trials
    assert (loaded.sampler, loaded.budget, loaded.dataset, loaded.seed) == ("tpe", 2, "d", 3)


def test_f1_ratio_monotone_and_can_exceed_one():
    log = TrialLog(sampler="tpe", budget=3, dataset="d", seed=0)
    cfg = PipelineConfig("a", 1, "UMC", 0.5)
    for i, f1 in enumerate([0.5, 0.7843, 0.6], start=1):
        log.append(Trial(i, cfg, f1, 0.1, 0))
    series = f1_ratio(log, grid_best_f1=0.7553)
    assert series == sorted(series)
    assert series[-1] > 1.0
    with pytest.raises(ZeroDivisionError):
        f1_ratio(log, 0.0)


def test_runtime_ratio():
    assert runtime_ratio(10.0, 10.0) == 1.0
    assert abs(runtime_ratio(30.0, 41 * 3600) - 2.03e-4) < 1e-5
    with pytest.raises(ZeroDivisionError):
        runtime_ratio(1.0, 0.0)


def _small_bundle():
    return easy_bundle(n=30, seed=7, name="small")


def _small_space():
    return SearchSpace(embedders=("hash3",), k_min=1, k_max=5, threshold_grid=(0.2, 0.5))


def test_grid_search_one_point_space(registry):
    space = SearchSpace(
        embedders=("hash3",), k_min=2, k_max=2, clusterings=("UMC",), threshold_grid=(0.3,)
    )
    log = grid_search(_small_bundle(), space, registry)
    assert len(log.trials) == 1
    assert log.best() == log.trials[0]


def test_tune_requires_gt(registry):
    b = _small_bundle()
    b = DatasetBundle(e1=b.e1, e2=b.e2, gt=None, name="small")
    with pytest.raises(EmptyGroundTruthError):
        tune(b, _small_space(), "random", 3, 0, registry)


def test_tune_budget_one(registry):
    log, best = tune(_small_bundle(), _small_space(), "random", 1, 0, registry)
    assert len(log.trials) == 1
    assert best == log.trials[0]


def test_tune_reproducible(registry):
    b = _small_bundle()
    log1, _ = tune(b, _small_space(), "tpe", 15, 4, registry)
    log2, _ = tune(b, _small_space(), "tpe", 15, 4, registry)
    assert [t.config for t in log1.trials] == [t.config for t in log2.trials]
    assert [t.f1 for t in log1.trials] == [t.f1 for t in log2.trials]


def test_tune_suggestions_inside_space(registry):
    space = _small_space()
    log, _ = tune(_small_bundle(), space, "qmc", 20, 1, registry)
    assert all(space.contains_config(t.config) for t in log.trials)


def test_tune_gt_subsample(registry):
    log1, _ = tune(_small_bundle(), _small_space(), "random", 5, 0, registry, gt_subsample=0.5)
    log2, _ = tune(_small_bundle(), _small_space(), "random", 5, 0, registry, gt_subsample=0.5)
    assert [t.f1 for t in log1.trials] == [t.f1 for t in log2.trials]
    with pytest.raises(ValueError):
        tune(_small_bundle(), _small_space(), "random", 5, 0, registry, gt_subsample=0.0)
