"""Shared fixtures: synthetic datasets and the precomputed grid oracle.

The 300+300 fixture and its 11,400-point grid log are expensive, so they are
built once per session and shared by the convergence and runtime tests.
"""
from __future__ import annotations

import pytest

from autoer.embed import default_registry
from autoer.pipeline import PipelineExecutor
from autoer.synth import easy_bundle, tiered_suite
from autoer.tune import SearchSpace, grid_search


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def easy():
    return easy_bundle(n=300, seed=0)


@pytest.fixture(scope="session")
def easy_space():
    return SearchSpace(embedders=("hash3", "hash4"))


@pytest.fixture(scope="session")
def easy_executor(easy, registry):
    return PipelineExecutor(easy, registry)


@pytest.fixture(scope="session")
def easy_grid(easy, easy_space, registry, easy_executor):
    """Full 11,400-point grid log over the easy fixture (the sampler oracle)."""
    return grid_search(easy, easy_space, registry, executor=easy_executor)


@pytest.fixture(scope="session")
def tiered_bundles():
    return tiered_suite()
