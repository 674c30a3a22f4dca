"""Exact top-k cosine retrieval over unit-norm embedding matrices.

An exhaustive dot-product scan is exact and fast enough at desk scale; the
index is immutable after build and queries are thread-safe.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embed import EmbeddingMatrix
from .errors import DimensionMismatchError, EmptyCollectionError


@dataclass(frozen=True)
class VectorIndex:
    """Immutable exact-cosine index over the rows of one embedding matrix."""

    matrix: EmbeddingMatrix

    @property
    def ids(self) -> tuple[str, ...]:
        return self.matrix.ids

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def __len__(self) -> int:
        return len(self.matrix.ids)


@dataclass(frozen=True)
class Candidates:
    """Per-query top-k neighbor lists, sorted by descending similarity.

    ``neighbor_idx``/``neighbor_sim`` are (n_queries, k) arrays referring to
    index rows; ``rows()`` yields (id, similarity) pairs.
    """

    query_ids: tuple[str, ...]
    index_ids: tuple[str, ...]
    neighbor_idx: np.ndarray
    neighbor_sim: np.ndarray

    @property
    def k(self) -> int:
        return self.neighbor_idx.shape[1]

    def row(self, i: int) -> list[tuple[str, float]]:
        return [
            (self.index_ids[j], float(s))
            for j, s in zip(self.neighbor_idx[i], self.neighbor_sim[i])
        ]

    def rows(self) -> list[tuple[str, list[tuple[str, float]]]]:
        return [(qid, self.row(i)) for i, qid in enumerate(self.query_ids)]

    def prefix(self, k: int) -> "Candidates":
        """Restrict every neighbor list to its first ``k`` entries.

        Valid because stable descending sort makes top-k a prefix of top-K.
        """
        k = min(k, self.k)
        return Candidates(
            query_ids=self.query_ids,
            index_ids=self.index_ids,
            neighbor_idx=self.neighbor_idx[:, :k],
            neighbor_sim=self.neighbor_sim[:, :k],
        )


def build_index(m: EmbeddingMatrix) -> VectorIndex:
    if len(m.ids) == 0:
        raise EmptyCollectionError("cannot index an empty embedding matrix")
    return VectorIndex(matrix=m)


def _topk_order(sims: np.ndarray, k: int) -> np.ndarray:
    # stable sort on -sims: ties broken by ascending insertion order
    return np.argsort(-sims, axis=-1, kind="stable")[..., :k]


def query_topk(idx: VectorIndex, q: np.ndarray, k: int) -> list[tuple[str, float]]:
    """Exact cosine top-k for one query vector.

    Returns min(k, |index|) (id, similarity) pairs in descending similarity,
    ties broken by insertion order. A zero query yields all-zero similarities.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (idx.dim,):
        raise DimensionMismatchError(f"query has shape {q.shape}, index dim is {idx.dim}")
    sims = idx.matrix.vectors @ q
    order = _topk_order(sims, min(k, len(idx)))
    return [(idx.ids[i], float(sims[i])) for i in order]


def batch_query(idx: VectorIndex, queries: EmbeddingMatrix, k: int) -> Candidates:
    """Row-wise :func:`query_topk` over a whole query matrix.

    Deterministic and exactly equal to the sequential per-row loop.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if queries.dim != idx.dim:
        raise DimensionMismatchError(f"queries dim {queries.dim} != index dim {idx.dim}")
    sims = queries.vectors @ idx.matrix.vectors.T
    order = _topk_order(sims, min(k, len(idx)))
    return Candidates(
        query_ids=queries.ids,
        index_ids=idx.ids,
        neighbor_idx=order,
        neighbor_sim=np.take_along_axis(sims, order, axis=1),
    )
