"""Bipartite similarity graph plus the three clustering algorithms.

Clustering is deterministic: ties are always broken lexicographically on
entity ids so that repeated runs yield identical partitions.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _sparse_cc

from .datamodel import ClusterSet
from .knn import Candidates


@dataclass(frozen=True)
class SimilarityGraph:
    """Weighted bipartite candidate graph.

    At most one edge per (e1_id, e2_id); weights are cosine similarities
    clamped to [0, 1]. Node sets cover all entities, including isolated ones.
    """

    edges: tuple[tuple[str, str, float], ...]
    left_nodes: frozenset[str]
    right_nodes: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "left_nodes", frozenset(self.left_nodes))
        object.__setattr__(self, "right_nodes", frozenset(self.right_nodes))

    def __len__(self) -> int:
        return len(self.edges)


def make_graph(
    edges: Iterable[tuple[str, str, float]],
    left_nodes: Iterable[str] = (),
    right_nodes: Iterable[str] = (),
) -> SimilarityGraph:
    """Build a graph from raw (e1, e2, similarity) triples.

    Negative similarities clamp to 0, values above 1 clamp to 1, and duplicate
    pairs keep the maximum weight. Node sets are the given ones extended by
    every endpoint seen in the edges.
    """
    best: dict[tuple[str, str], float] = {}
    lefts = set(left_nodes)
    rights = set(right_nodes)
    for e1, e2, w in edges:
        w = min(max(float(w), 0.0), 1.0)
        key = (e1, e2)
        if key not in best or w > best[key]:
            best[key] = w
        lefts.add(e1)
        rights.add(e2)
    triples = tuple((e1, e2, w) for (e1, e2), w in sorted(best.items()))
    return SimilarityGraph(edges=triples, left_nodes=frozenset(lefts), right_nodes=frozenset(rights))


def build_graph(c: Candidates, queries_are_left: bool = False) -> SimilarityGraph:
    """Turn top-k candidates into a similarity graph (one edge per pair).

    Queries are E2 entities by default; pass ``queries_are_left=True`` when the
    query direction was swapped. Candidate lists never repeat a pair, so the
    generic dedup of :func:`make_graph` is skipped in favor of a vectorized
    clamp + lexicographic sort.
    """
    n_queries, k = c.neighbor_idx.shape
    sims = np.clip(c.neighbor_sim, 0.0, 1.0).ravel()
    neighbor_flat = c.neighbor_idx.ravel()
    query_flat = np.repeat(np.arange(n_queries), k)
    # lexicographic rank of each id, so edge order matches sorted (e1, e2)
    index_rank = np.empty(len(c.index_ids), dtype=np.int64)
    index_rank[np.argsort(np.array(c.index_ids, dtype=object), kind="stable")] = np.arange(len(c.index_ids))
    query_rank = np.empty(len(c.query_ids), dtype=np.int64)
    query_rank[np.argsort(np.array(c.query_ids, dtype=object), kind="stable")] = np.arange(len(c.query_ids))
    if queries_are_left:
        order = np.lexsort((index_rank[neighbor_flat], query_rank[query_flat]))
        e1s = [c.query_ids[i] for i in query_flat[order]]
        e2s = [c.index_ids[i] for i in neighbor_flat[order]]
        lefts: Iterable[str] = c.query_ids
        rights: Iterable[str] = c.index_ids
    else:
        order = np.lexsort((query_rank[query_flat], index_rank[neighbor_flat]))
        e1s = [c.index_ids[i] for i in neighbor_flat[order]]
        e2s = [c.query_ids[i] for i in query_flat[order]]
        lefts, rights = c.index_ids, c.query_ids
    triples = tuple(zip(e1s, e2s, sims[order].tolist()))
    return SimilarityGraph(
        edges=triples, left_nodes=frozenset(lefts), right_nodes=frozenset(rights)
    )


def merge_graphs(a: SimilarityGraph, b: SimilarityGraph) -> SimilarityGraph:
    """Union of two graphs; duplicate pairs keep the maximum weight."""
    return make_graph(
        list(a.edges) + list(b.edges),
        left_nodes=a.left_nodes | b.left_nodes,
        right_nodes=a.right_nodes | b.right_nodes,
    )


def prune(g: SimilarityGraph, threshold: float) -> SimilarityGraph:
    """Keep edges with weight >= threshold (closed lower bound)."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    kept = tuple(e for e in g.edges if e[2] >= threshold)
    return SimilarityGraph(edges=kept, left_nodes=g.left_nodes, right_nodes=g.right_nodes)


def write_graph_csv(g: SimilarityGraph, path) -> None:
    """Dump edges as CSV (e1,e2,weight) for debugging."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("e1,e2,weight\n")
        for e1, e2, w in g.edges:
            fh.write(f"{e1},{e2},{w!r}\n")


def _node_list(g: SimilarityGraph) -> list[tuple[str, str]]:
    return [("E1", i) for i in sorted(g.left_nodes)] + [("E2", i) for i in sorted(g.right_nodes)]


def _matching_to_clusters(
    g: SimilarityGraph, matched: dict[str, str]
) -> ClusterSet:
    """Matched (left -> right) pairs become 2-clusters; the rest singletons."""
    clusters = []
    matched_rights = set(matched.values())
    for left in sorted(g.left_nodes):
        if left in matched:
            clusters.append(frozenset({("E1", left), ("E2", matched[left])}))
        else:
            clusters.append(frozenset({("E1", left)}))
    for right in sorted(g.right_nodes):
        if right not in matched_rights:
            clusters.append(frozenset({("E2", right)}))
    return ClusterSet(clusters=tuple(clusters))


def connected_components(g: SimilarityGraph) -> ClusterSet:
    """Transitive closure: each connected component becomes one cluster."""
    nodes = _node_list(g)
    index = {node: i for i, node in enumerate(nodes)}
    if g.edges:
        rows = np.array([index[("E1", e1)] for e1, _, _ in g.edges])
        cols = np.array([index[("E2", e2)] for _, e2, _ in g.edges])
        data = np.ones(len(g.edges))
        adj = coo_matrix((data, (rows, cols)), shape=(len(nodes), len(nodes)))
        _, labels = _sparse_cc(adj, directed=False)
    else:
        labels = np.arange(len(nodes))
    groups: dict[int, set[tuple[str, str]]] = {}
    for node, label in zip(nodes, labels):
        groups.setdefault(int(label), set()).add(node)
    clusters = tuple(frozenset(c) for _, c in sorted(groups.items()))
    return ClusterSet(clusters=clusters)


def unique_mapping(g: SimilarityGraph) -> ClusterSet:
    """Greedy one-to-one matching: scan edges in descending weight (ties by
    (e1, e2) lexicographic); accept an edge iff both endpoints are free."""
    matched: dict[str, str] = {}
    taken_rights: set[str] = set()
    for e1, e2, _ in sorted(g.edges, key=lambda e: (-e[2], e[0], e[1])):
        if e1 not in matched and e2 not in taken_rights:
            matched[e1] = e2
            taken_rights.add(e2)
    return _matching_to_clusters(g, matched)


def kiraly(g: SimilarityGraph) -> ClusterSet:
    """Proposal-based approximate maximum bipartite matching.

    Each left entity proposes along its preference list (descending weight,
    ties by right id). A left entity that exhausts its list while unmatched is
    promoted once and traverses the list a second time. Right entities accept
    the best standing proposal: higher weight wins, promotion breaks ties,
    then the smaller left id.
    """
    weight: dict[tuple[str, str], float] = {}
    prefs: dict[str, list[str]] = {l: [] for l in g.left_nodes}
    for e1, e2, w in g.edges:
        weight[(e1, e2)] = w
        prefs[e1].append(e2)
    for left in prefs:
        prefs[left].sort(key=lambda r, l=left: (-weight[(l, r)], r))

    ptr: dict[str, int] = {l: 0 for l in g.left_nodes}
    promoted: dict[str, bool] = {l: False for l in g.left_nodes}
    match_left: dict[str, str] = {}
    match_right: dict[str, str] = {}
    queue = deque(l for l in sorted(g.left_nodes) if prefs[l])

    def accepts(right: str, left: str) -> bool:
        holder = match_right[right]
        w_new = weight[(left, right)]
        w_old = weight[(holder, right)]
        if w_new != w_old:
            return w_new > w_old
        if promoted[left] != promoted[holder]:
            return promoted[left]
        return left < holder

    while queue:
        left = queue.popleft()
        if left in match_left:
            continue
        placed = False
        while ptr[left] < len(prefs[left]):
            right = prefs[left][ptr[left]]
            ptr[left] += 1
            if right not in match_right:
                match_right[right] = left
                match_left[left] = right
                placed = True
                break
            if accepts(right, left):
                bumped = match_right[right]
                del match_left[bumped]
                match_right[right] = left
                match_left[left] = right
                queue.append(bumped)
                placed = True
                break
        if not placed and not promoted[left]:
            promoted[left] = True
            ptr[left] = 0
            queue.append(left)
    return _matching_to_clusters(g, match_left)


CLUSTERERS = {
    "UMC": unique_mapping,
    "KC": kiraly,
    "CCC": connected_components,
}
