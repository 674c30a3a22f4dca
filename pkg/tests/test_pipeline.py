import json

import pytest

from autoer.datamodel import (
    ClusterSet,
    EntityCollection,
    EntityProfile,
    GroundTruth,
    PipelineConfig,
)
from autoer.embed import default_registry
from autoer.errors import EmptyGroundTruthError
from autoer.ingest import DatasetBundle
from autoer.pipeline import (
    PipelineExecutor,
    evaluate,
    pairs_from_clusters,
    run_pipeline,
)


def _clusters(*groups):
    return ClusterSet(clusters=tuple(frozenset(g) for g in groups))


def test_pairs_from_clusters_simple():
    cs = _clusters({("E1", "a"), ("E2", "x")})
    assert pairs_from_clusters(cs) == {("a", "x")}


def test_pairs_from_clusters_cross_product():
    cs = _clusters({("E1", "a"), ("E1", "b"), ("E2", "x")})
    assert pairs_from_clusters(cs) == {("a", "x"), ("b", "x")}


def test_pairs_from_clusters_singletons():
    cs = _clusters({("E1", "a")}, {("E2", "x")})
    assert pairs_from_clusters(cs) == set()


def test_evaluate_perfect():
    cs = _clusters({("E1", "a"), ("E2", "x")}, {("E1", "b"), ("E2", "y")})
    gt = GroundTruth(pairs=frozenset({("a", "x"), ("b", "y")}))
    m = evaluate(cs, gt)
    assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)


def test_evaluate_disjoint():
    cs = _clusters({("E1", "a"), ("E2", "x")})
    gt = GroundTruth(pairs=frozenset({("a", "y")}))
    m = evaluate(cs, gt)
    assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)


def test_evaluate_hand_example():
    # |D| = 4, found = 5 of which 3 correct: P = 0.6, R = 0.75, F1 = 2/3
    gt = GroundTruth(pairs=frozenset({("a", "w"), ("b", "x"), ("c", "y"), ("d", "z")}))
    cs = _clusters(
        {("E1", "a"), ("E2", "w")},
        {("E1", "b"), ("E2", "x")},
        {("E1", "c"), ("E2", "y")},
        {("E1", "e"), ("E2", "z")},
        {("E1", "f"), ("E2", "v")},
    )
    m = evaluate(cs, gt)
    assert abs(m.precision - 0.6) <= 1e-12
    assert abs(m.recall - 0.75) <= 1e-12
    assert abs(m.f1 - (2 * 0.6 * 0.75 / 1.35)) <= 1e-12


def test_evaluate_empty_gt():
    with pytest.raises(EmptyGroundTruthError):
        evaluate(_clusters(), GroundTruth(pairs=frozenset()))


def _tiny_bundle():
    e1 = EntityCollection(
        source_id="E1",
        entities=(
            EntityProfile(id="a", attributes=(("t", "alpha beta gamma"),)),
            EntityProfile(id="b", attributes=(("t", "delta epsilon zeta"),)),
        ),
    )
    e2 = EntityCollection(
        source_id="E2",
        entities=(
            EntityProfile(id="x", attributes=(("t", "alpha beta gamma"),)),
            EntityProfile(id="y", attributes=(("t", "delta epsilon zeta"),)),
        ),
    )
    gt = GroundTruth(pairs=frozenset({("a", "x"), ("b", "y")}))
    return DatasetBundle(e1=e1, e2=e2, gt=gt, name="tiny")


def test_run_pipeline_identical_text_perfect():
    cfg = PipelineConfig("hash3", 1, "UMC", 0.0)
    result = run_pipeline(_tiny_bundle(), cfg, default_registry())
    assert result.metrics.f1 == 1.0
    result.clusters.validate(["a", "b"], ["x", "y"])


def test_run_pipeline_threshold_one_overprunes():
    b = _tiny_bundle()
    # perturb rights so no similarity reaches 1.0
    e2 = EntityCollection(
        source_id="E2",
        entities=(
            EntityProfile(id="x", attributes=(("t", "alpha beta gamm"),)),
            EntityProfile(id="y", attributes=(("t", "delta epsilon zet"),)),
        ),
    )
    b = DatasetBundle(e1=b.e1, e2=e2, gt=b.gt, name="tiny")
    cfg = PipelineConfig("hash3", 2, "UMC", 1.0)
    result = run_pipeline(b, cfg, default_registry())
    assert result.metrics.f1 == 0.0


def test_run_pipeline_no_gt_no_metrics():
    b = _tiny_bundle()
    b = DatasetBundle(e1=b.e1, e2=b.e2, gt=None, name="tiny")
    result = run_pipeline(b, PipelineConfig("hash3", 1, "UMC", 0.5), default_registry())
    assert result.metrics is None
    payload = json.loads(result.to_json())
    assert payload["metrics"] is None
    assert payload["config"]["k"] == 1


def test_executor_caching_consistent(easy, registry):
    executor = PipelineExecutor(easy, registry)
    cfg = PipelineConfig("hash3", 7, "UMC", 0.4)
    first = executor.run(cfg)
    again = executor.run(cfg)
    assert first.metrics == again.metrics
    fresh = PipelineExecutor(easy, registry).run(cfg)
    assert first.metrics == fresh.metrics
    # cached reruns do not re-embed
    assert again.timings.embed_s == 0.0


def test_executor_swap_direction(easy, registry):
    cfg = PipelineConfig("hash3", 3, "UMC", 0.3)
    swapped = PipelineExecutor(easy, registry, swap=True).run(cfg)
    swapped.clusters.validate(easy.e1.ids, easy.e2.ids)
    assert swapped.metrics.f1 > 0.9


def test_recall_monotone_in_k(easy, registry):
    executor = PipelineExecutor(easy, registry)
    prev = -1.0
    for k in (1, 2, 5, 10, 25):
        m = executor.run(PipelineConfig("hash3", k, "CCC", 0.0)).metrics
        assert m.recall >= prev
        prev = m.recall


def test_metric_bounds(easy, registry):
    executor = PipelineExecutor(easy, registry)
    for k in (1, 10):
        for t in (0.2, 0.6):
            m = executor.run(PipelineConfig("hash4", k, "KC", t)).metrics
            assert 0.0 <= m.precision <= 1.0
            assert 0.0 <= m.recall <= 1.0
            if m.precision > 0 and m.recall > 0:
                assert min(m.precision, m.recall) <= m.f1 <= max(m.precision, m.recall)


def test_timings_total_covers_parts(easy, registry):
    result = PipelineExecutor(easy, registry).run(PipelineConfig("hash3", 5, "UMC", 0.5))
    t = result.timings
    assert t.total_s >= t.embed_s + t.index_s + t.query_s + t.cluster_s - 1e-6
