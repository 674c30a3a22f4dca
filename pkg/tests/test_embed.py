import numpy as np
import pytest

from autoer.datamodel import EntityCollection, EntityProfile
from autoer.embed import (
    EmbeddingMatrix,
    default_registry,
    embed_collection,
    embed_hashed_ngrams,
    load_external_embeddings,
    write_binary_embeddings,
    write_text_embeddings,
)
from autoer.errors import (
    DimensionMismatchError,
    MissingVectorError,
    ParseError,
    UnknownEmbedderError,
)


def test_empty_text_is_zero_vector():
    v = embed_hashed_ngrams("", dim=64)
    assert np.all(v == 0.0)


def test_hashed_determinism():
    a = embed_hashed_ngrams("nobu ny", dim=256, n=3, seed=0)
    b = embed_hashed_ngrams("nobu ny", dim=256, n=3, seed=0)
    assert np.array_equal(a, b)


def test_hashed_unit_norm():
    v = embed_hashed_ngrams("some text here", dim=256)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-9


def test_hashed_similarity_ordering():
    # near-duplicates must be closer than unrelated strings
    a = embed_hashed_ngrams("alpha beta gamma", dim=256, n=3)
    b = embed_hashed_ngrams("alpha beta gamm", dim=256, n=3)
    c = embed_hashed_ngrams("uvw xyz qrs", dim=256, n=3)
    assert float(a @ b) < 1.0
    assert float(a @ b) > float(a @ c)


def test_hashed_short_text_uses_whole_text():
    v = embed_hashed_ngrams("ab", dim=64, n=3)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-9


def test_matrix_rejects_non_unit_rows():
    with pytest.raises(ValueError):
        EmbeddingMatrix(ids=("a",), vectors=np.array([[2.0, 0.0]]))


def test_matrix_accepts_zero_rows():
    m = EmbeddingMatrix(ids=("a",), vectors=np.zeros((1, 4)))
    assert m.dim == 4


def test_embed_collection_order_and_empty_profile():
    c = EntityCollection(
        source_id="E1",
        entities=(
            EntityProfile(id="a", attributes=(("t", "hello world"),)),
            EntityProfile(id="b"),
        ),
    )
    m = embed_collection(default_registry(), "hash3", c)
    assert m.ids == ("a", "b")
    assert np.linalg.norm(m.vectors[1]) == 0.0


def test_unknown_embedder_guidance():
    with pytest.raises(UnknownEmbedderError, match="external"):
        embed_collection(
            default_registry(),
            "st5",
            EntityCollection(source_id="E1", entities=(EntityProfile(id="a"),)),
        )


def test_text_embeddings_round_trip(tmp_path):
    vectors = {"a": np.array([3.0, 4.0]), "b": np.array([1.0, 0.0])}
    p = tmp_path / "vecs.txt"
    write_text_embeddings(p, vectors)
    m = load_external_embeddings(p, "ext", ["a", "b"])
    assert m.dim == 2
    # norm-2 row renormalized to unit
    assert np.allclose(m.vectors[0], [0.6, 0.8])


def test_binary_embeddings_round_trip(tmp_path):
    vectors = {"a": np.array([1.0, 2.0, 2.0]), "b": np.array([0.0, 1.0, 0.0])}
    p = tmp_path / "vecs.bin"
    write_binary_embeddings(p, vectors)
    m = load_external_embeddings(p, "ext", ["a", "b"])
    assert np.allclose(m.vectors[0], np.array([1.0, 2.0, 2.0]) / 3.0, atol=1e-6)


def test_external_missing_id(tmp_path):
    p = tmp_path / "vecs.txt"
    write_text_embeddings(p, {"a": np.array([1.0, 0.0])})
    with pytest.raises(MissingVectorError, match="b"):
        load_external_embeddings(p, "ext", ["a", "b"])


def test_external_dimension_mismatch(tmp_path):
    p = tmp_path / "vecs.txt"
    p.write_text("dim=2\na 1.0 0.0\nb 1.0 0.0 0.0\n", encoding="utf-8")
    with pytest.raises(DimensionMismatchError):
        load_external_embeddings(p, "ext", ["a", "b"])


def test_external_bad_header(tmp_path):
    p = tmp_path / "vecs.txt"
    p.write_text("nodim\na 1.0\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_external_embeddings(p, "ext", ["a"])


def test_external_registration(tmp_path):
    registry = default_registry()
    p = tmp_path / "vecs.txt"
    write_text_embeddings(p, {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])})
    load_external_embeddings(p, "st5", ["a", "b"], registry=registry)
    c = EntityCollection(
        source_id="E1",
        entities=(EntityProfile(id="b"), EntityProfile(id="a")),
    )
    m = embed_collection(registry, "st5", c)
    assert m.ids == ("b", "a")
    assert np.allclose(m.vectors[0], [0.0, 1.0])


def test_cosine_equals_dot_for_unit_rows():
    rng = np.random.default_rng(0)
    raw = rng.normal(size=(10, 16))
    rows = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    for i in range(10):
        for j in range(10):
            dot = float(rows[i] @ rows[j])
            cosine = dot / (np.linalg.norm(rows[i]) * np.linalg.norm(rows[j]))
            assert abs(dot - cosine) <= 1e-9
