from hypothesis import given
from hypothesis import strategies as st

from autoer.datamodel import EntityCollection, EntityProfile
from autoer.profiling import FEATURE_NAMES, profile_dataset


def _collection(source, *entities):
    return EntityCollection(source_id=source, entities=tuple(entities))


def hand_dataset():
    e1 = _collection("E1", EntityProfile(id="1", attributes=(("a", "x"),)))
    e2 = _collection("E2", EntityProfile(id="2", attributes=(("a", "x"),)))
    return e1, e2


def test_hand_dataset_all_features():
    f = profile_dataset(*hand_dataset())
    assert f.f1_entities == 2
    assert f.f2_attributes == 1
    assert f.f3_distinct_values == 1
    assert f.f4_av_pairs == 2
    assert f.f5_mean_profile_size == 1
    assert f.f6_mean_attribute_size == 2
    assert f.f7_mean_distinct_entity_values == 0.5
    assert f.f8_mean_distinct_attribute_values == 1
    assert f.f9_max_profile_size == 1
    assert f.f10_missing_information == -1  # 2 * 0.5 - 2
    assert f.f11_mean_value_tokens == 1
    assert f.f12_mean_value_length == 1


def test_alt_f10():
    f = profile_dataset(*hand_dataset())
    # alternate sparsity reading: F1 * F2 - F4
    assert f.alt_f10_missing_information == 0.0
    d = f.to_dict(include_alt_f10=True)
    assert d["alt_f10_missing_information"] == 0.0
    assert "alt_f10_missing_information" not in f.to_dict(include_alt_f10=False)


def test_global_value_distinctness():
    e1 = _collection(
        "E1", EntityProfile(id="1", attributes=(("a", "x"), ("b", "x")))
    )
    e2 = _collection("E2", EntityProfile(id="2", attributes=(("c", "x"),)))
    f = profile_dataset(e1, e2)
    assert f.f3_distinct_values == 1
    assert f.f2_attributes == 3


def test_empty_values_excluded():
    e1 = _collection(
        "E1", EntityProfile(id="1", attributes=(("a", "x"), ("b", "")))
    )
    e2 = _collection("E2", EntityProfile(id="2", attributes=(("a", "y"),)))
    f = profile_dataset(e1, e2)
    assert f.f4_av_pairs == 2  # the empty value is missing information
    assert f.f2_attributes == 2  # but its attribute name still counts


def test_identity_relations():
    e1 = _collection(
        "E1",
        EntityProfile(id="1", attributes=(("a", "foo bar"), ("b", "baz"))),
        EntityProfile(id="2", attributes=(("a", "qux"),)),
    )
    e2 = _collection("E2", EntityProfile(id="3", attributes=(("c", "foo bar"),)))
    f = profile_dataset(e1, e2)
    assert f.f5_mean_profile_size == f.f4_av_pairs / f.f1_entities
    assert f.f6_mean_attribute_size == f.f4_av_pairs / f.f2_attributes
    assert f.f7_mean_distinct_entity_values == f.f3_distinct_values / f.f1_entities
    assert f.f8_mean_distinct_attribute_values == f.f3_distinct_values / f.f2_attributes
    assert f.f9_max_profile_size >= f.f5_mean_profile_size
    assert f.f10_missing_information == f.f3_distinct_values - f.f4_av_pairs
    assert len(f.vector()) == len(FEATURE_NAMES) == 12


_value = st.text(alphabet="abc ", min_size=1, max_size=5).filter(lambda s: s.strip())


@given(
    st.lists(
        st.lists(st.tuples(st.sampled_from("pqr"), _value), min_size=1, max_size=3),
        min_size=2,
        max_size=5,
    ),
    st.randoms(),
)
def test_permutation_invariance(profiles, rnd):
    entities = [
        EntityProfile(id=str(i), attributes=tuple(attrs))
        for i, attrs in enumerate(profiles)
    ]
    e2 = _collection("E2", EntityProfile(id="z", attributes=(("p", "w"),)))
    f1 = profile_dataset(_collection("E1", *entities), e2)
    shuffled = list(entities)
    rnd.shuffle(shuffled)
    f2 = profile_dataset(_collection("E1", *shuffled), e2)
    assert f1 == f2


def test_adding_pair_increments_f4():
    e1 = _collection("E1", EntityProfile(id="1", attributes=(("a", "x"),)))
    e1_bigger = _collection(
        "E1", EntityProfile(id="1", attributes=(("a", "x"), ("b", "y")))
    )
    e2 = _collection("E2", EntityProfile(id="2", attributes=(("a", "x"),)))
    before = profile_dataset(e1, e2)
    after = profile_dataset(e1_bigger, e2)
    assert after.f4_av_pairs == before.f4_av_pairs + 1
    assert after.f9_max_profile_size >= before.f9_max_profile_size
