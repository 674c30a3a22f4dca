"""Embedders: turn serialized entities into unit-length vectors.

Two kinds of embedder are available: a deterministic hashed character-n-gram
embedder (self-contained, no model files) and externally computed vectors
loaded from a file and keyed by entity id. Both are accessed through an
:class:`EmbedderRegistry`.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .datamodel import EXTERNAL_EMBEDDER_NAMES, EntityCollection, serialize_entity
from .errors import (
    DimensionMismatchError,
    MissingVectorError,
    ParseError,
    UnknownEmbedderError,
)

BINARY_MAGIC = b"AEEB"


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row-major matrix of unit-norm (or all-zero) vectors, one row per id."""

    ids: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(self.ids):
            raise ValueError("vectors must be a 2-D array with one row per id")
        norms = np.linalg.norm(vectors, axis=1)
        bad = ~(np.isclose(norms, 1.0, atol=1e-6) | (norms == 0.0))
        if bad.any():
            raise ValueError(f"rows must be unit-norm or zero; offending norms {norms[bad][:3]}")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)


def _normalize_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return vectors / safe


def embed_hashed_ngrams(text: str, dim: int = 256, n: int = 3, seed: int = 0) -> np.ndarray:
    """Signed-hash character n-grams of the lowercased text into ``dim`` buckets.

    TF weights, then L2 normalization; empty text yields the zero vector.
    Texts shorter than ``n`` contribute a single n-gram (the whole text).
    """
    if dim < 8:
        raise ValueError(f"dim must be >= 8, got {dim}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    vec = np.zeros(dim, dtype=np.float64)
    text = text.lower()
    if not text:
        return vec
    key = seed.to_bytes(8, "little", signed=True)
    grams = [text[i : i + n] for i in range(len(text) - n + 1)] or [text]
    for gram in grams:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8, key=key).digest()
        h = int.from_bytes(digest, "little")
        bucket = h % dim
        sign = 1.0 if (h >> 63) & 1 else -1.0
        vec[bucket] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


class HashedNgramEmbedder:
    """Built-in deterministic embedder over serialized entity text."""

    def __init__(self, dim: int = 256, n: int = 3, seed: int = 0) -> None:
        if dim < 8:
            raise ValueError(f"dim must be >= 8, got {dim}")
        if n < 2:
            raise ValueError(f"n must be >= 2, got {n}")
        self.dim = dim
        self.n = n
        self.seed = seed

    def embed_collection(self, collection: EntityCollection) -> EmbeddingMatrix:
        rows = np.empty((len(collection), self.dim), dtype=np.float64)
        for i, entity in enumerate(collection.entities):
            rows[i] = embed_hashed_ngrams(serialize_entity(entity), self.dim, self.n, self.seed)
        return EmbeddingMatrix(ids=collection.ids, vectors=rows)


class ExternalEmbedder:
    """Vectors computed offline, looked up by entity id."""

    def __init__(self, vectors: Mapping[str, np.ndarray], dim: int) -> None:
        self.dim = dim
        self._vectors = dict(vectors)

    def embed_collection(self, collection: EntityCollection) -> EmbeddingMatrix:
        rows = np.empty((len(collection), self.dim), dtype=np.float64)
        for i, entity in enumerate(collection.entities):
            if entity.id not in self._vectors:
                raise MissingVectorError(f"no external vector for id {entity.id!r}")
            rows[i] = self._vectors[entity.id]
        return EmbeddingMatrix(ids=collection.ids, vectors=_normalize_rows(rows))


class EmbedderRegistry:
    """Name -> embedder map; read-only after setup."""

    def __init__(self) -> None:
        self._embedders: dict[str, object] = {}

    def register(self, name: str, embedder) -> None:
        if name in self._embedders:
            raise ValueError(f"embedder {name!r} already registered")
        self._embedders[name] = embedder

    def register_hashed(self, name: str, dim: int = 256, n: int = 3, seed: int = 0) -> None:
        self.register(name, HashedNgramEmbedder(dim=dim, n=n, seed=seed))

    def names(self) -> tuple[str, ...]:
        return tuple(self._embedders)

    def __contains__(self, name: str) -> bool:
        return name in self._embedders

    def get(self, name: str):
        try:
            return self._embedders[name]
        except KeyError:
            if name in EXTERNAL_EMBEDDER_NAMES:
                raise UnknownEmbedderError(
                    f"embedder {name!r} is a pre-trained model name; register an external "
                    f"embedding file for it first (see load_external_embeddings)"
                ) from None
            raise UnknownEmbedderError(
                f"unknown embedder {name!r}; registered: {sorted(self._embedders)}"
            ) from None


def default_registry() -> EmbedderRegistry:
    """Registry with the built-in hashed n-gram embedders (hash3, hash4)."""
    registry = EmbedderRegistry()
    registry.register_hashed("hash3", dim=256, n=3, seed=0)
    registry.register_hashed("hash4", dim=256, n=4, seed=0)
    return registry


def embed_collection(registry: EmbedderRegistry, name: str, collection: EntityCollection) -> EmbeddingMatrix:
    """Embed every entity of the collection, in order, with the named embedder."""
    return registry.get(name).embed_collection(collection)


def _parse_text_embeddings(path: Path) -> dict[str, np.ndarray]:
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("dim="):
            raise ParseError(f"{path}: expected header 'dim=<d>', got {header!r}")
        try:
            dim = int(header[4:])
        except ValueError as exc:
            raise ParseError(f"{path}: bad dimension in header {header!r}") from exc
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            eid, values = parts[0], parts[1:]
            if len(values) != dim:
                raise DimensionMismatchError(
                    f"{path}:{lineno}: id {eid!r} has {len(values)} values, expected {dim}"
                )
            try:
                vectors[eid] = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-numeric value") from exc
    return vectors


def _parse_binary_embeddings(path: Path) -> dict[str, np.ndarray]:
    vectors: dict[str, np.ndarray] = {}
    data = path.read_bytes()
    if data[:4] != BINARY_MAGIC:
        raise ParseError(f"{path}: bad magic bytes {data[:4]!r}, expected {BINARY_MAGIC!r}")
    (dim,) = struct.unpack_from("<I", data, 4)
    offset = 8
    while offset < len(data):
        (id_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        eid = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(np.float64)
        offset += 4 * dim
        vectors[eid] = vec
    return vectors


def load_external_embeddings(
    path: str | Path,
    name: str,
    ids: Iterable[str],
    registry: EmbedderRegistry | None = None,
) -> EmbeddingMatrix:
    """Load external vectors, re-normalize rows to unit L2, and register them.

    Text format: header ``dim=<d>`` then ``<id> <f1> ... <fd>`` per line.
    Binary (``.bin``): magic ``AEEB``, little-endian u32 dim, then records of
    u32 id length, utf-8 id bytes, and ``d`` float32 values.
    """
    path = Path(path)
    ids = tuple(ids)
    if path.suffix == ".bin":
        vectors = _parse_binary_embeddings(path)
    else:
        vectors = _parse_text_embeddings(path)
    missing = [i for i in ids if i not in vectors]
    if missing:
        raise MissingVectorError(f"{path}: missing vector(s) for id(s) {missing[:5]}")
    dims = {v.shape[0] for v in vectors.values()}
    if len(dims) > 1:
        raise DimensionMismatchError(f"{path}: mixed vector dimensions {sorted(dims)}")
    dim = dims.pop()
    rows = _normalize_rows(np.stack([vectors[i] for i in ids]))
    matrix = EmbeddingMatrix(ids=ids, vectors=rows)
    if registry is not None:
        normalized = {i: rows[j] for j, i in enumerate(ids)}
        # keep vectors for ids beyond the requested ones available too
        for eid, vec in vectors.items():
            if eid not in normalized:
                norm = np.linalg.norm(vec)
                normalized[eid] = vec / norm if norm > 0 else vec
        registry.register(name, ExternalEmbedder(normalized, dim))
    return matrix


def write_text_embeddings(path: str | Path, vectors: Mapping[str, np.ndarray]) -> None:
    dims = {np.asarray(v).shape[0] for v in vectors.values()}
    if len(dims) != 1:
        raise DimensionMismatchError(f"mixed vector dimensions {sorted(dims)}")
    dim = dims.pop()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim={dim}\n")
        for eid, vec in vectors.items():
            fh.write(eid + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def write_binary_embeddings(path: str | Path, vectors: Mapping[str, np.ndarray]) -> None:
    dims = {np.asarray(v).shape[0] for v in vectors.values()}
    if len(dims) != 1:
        raise DimensionMismatchError(f"mixed vector dimensions {sorted(dims)}")
    dim = dims.pop()
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<I", dim))
        for eid, vec in vectors.items():
            raw = eid.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(np.asarray(vec, dtype="<f4").tobytes())
