"""Core domain types: entity profiles, collections, configs, and clusters.

All types are immutable after construction and safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import DuplicateIdError

CLUSTERING_ALGORITHMS = ("UMC", "KC", "CCC")

# Model names that only resolve once an external embedding file has been
# registered for them ("st5" is accepted as an alias of "S-GTR-T5").
EXTERNAL_EMBEDDER_NAMES = (
    "smpnet",
    "S-GTR-T5",
    "st5",
    "sdistilroberta",
    "sminilm",
    "sent_glove",
    "fasttext",
    "word2vec",
)


@dataclass(frozen=True)
class EntityProfile:
    """One entity description: a source-unique id plus ordered attribute-value pairs.

    Attribute names may repeat and values may be empty strings (empty values
    count as missing information).
    """

    id: str
    attributes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("entity id must be non-empty")
        object.__setattr__(self, "attributes", tuple((str(n), str(v)) for n, v in self.attributes))


@dataclass(frozen=True)
class EntityCollection:
    """An ordered, duplicate-free set of entity profiles from one source."""

    source_id: str
    entities: tuple[EntityProfile, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entities", tuple(self.entities))
        if not self.entities:
            raise ValueError(f"collection {self.source_id!r} must be non-empty")
        seen: set[str] = set()
        for e in self.entities:
            if e.id in seen:
                raise DuplicateIdError(f"duplicate entity id {e.id!r} in collection {self.source_id!r}")
            seen.add(e.id)

    def __len__(self) -> int:
        return len(self.entities)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.entities)

    def id_set(self) -> frozenset[str]:
        return frozenset(e.id for e in self.entities)


@dataclass(frozen=True)
class GroundTruth:
    """Known matching pairs (id in E1, id in E2).

    ``duplicates_dropped`` counts repeated input pairs collapsed by set
    semantics; it is bookkeeping, not part of the ground truth identity.
    """

    pairs: frozenset[tuple[str, str]]
    duplicates_dropped: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", frozenset(tuple(p) for p in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class PipelineConfig:
    """The four tunable pipeline parameters: embedder, k, clustering, threshold."""

    embedder: str
    k: int
    clustering: str
    threshold: float

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.clustering not in CLUSTERING_ALGORITHMS:
            raise ValueError(
                f"unknown clustering {self.clustering!r}; expected one of {CLUSTERING_ALGORITHMS}"
            )

    def key(self) -> tuple:
        return (self.embedder, self.k, self.clustering, self.threshold)

    def to_dict(self) -> dict:
        return {
            "embedder": self.embedder,
            "k": self.k,
            "clustering": self.clustering,
            "threshold": self.threshold,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return cls(
            embedder=d["embedder"],
            k=int(d["k"]),
            clustering=d["clustering"],
            threshold=float(d["threshold"]),
        )


DEFAULT_CONFIG = PipelineConfig(embedder="st5", k=10, clustering="UMC", threshold=0.5)


@dataclass(frozen=True)
class ClusterSet:
    """Disjoint clusters of (source_id, entity_id) elements covering E1 and E2."""

    clusters: tuple[frozenset[tuple[str, str]], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "clusters", tuple(frozenset(c) for c in self.clusters))

    def __len__(self) -> int:
        return len(self.clusters)

    def validate(self, e1_ids: Iterable[str], e2_ids: Iterable[str]) -> None:
        """Check disjointness and coverage of E1 union E2; raise ValueError otherwise."""
        expected = {("E1", i) for i in e1_ids} | {("E2", i) for i in e2_ids}
        seen: set[tuple[str, str]] = set()
        for c in self.clusters:
            overlap = seen & c
            if overlap:
                raise ValueError(f"clusters are not disjoint: {sorted(overlap)[:3]}")
            seen |= c
        if seen != expected:
            missing = expected - seen
            extra = seen - expected
            raise ValueError(
                f"cluster coverage mismatch: missing={sorted(missing)[:3]} extra={sorted(extra)[:3]}"
            )


def serialize_entity(e: EntityProfile) -> str:
    """Concatenate all attribute values (names excluded) into one sentence.

    Values are joined by a single space in attribute order; empty values are
    dropped; leading/trailing whitespace of the result is trimmed while
    whitespace inside values is preserved as read.
    """
    parts = [v for _, v in e.attributes if v != ""]
    return " ".join(parts).strip()
