"""Dataset profiling: the 12 features that describe a Record Linkage dataset.

Features are computed over the union of both collections in one pass.
Attribute-value pairs with an empty value count as missing information and are
excluded from the pair/value counts.
"""
from __future__ import annotations

from dataclasses import dataclass

from .datamodel import EntityCollection, serialize_entity
from .errors import EmptyCollectionError

FEATURE_NAMES = (
    "f1_entities",
    "f2_attributes",
    "f3_distinct_values",
    "f4_av_pairs",
    "f5_mean_profile_size",
    "f6_mean_attribute_size",
    "f7_mean_distinct_entity_values",
    "f8_mean_distinct_attribute_values",
    "f9_max_profile_size",
    "f10_missing_information",
    "f11_mean_value_tokens",
    "f12_mean_value_length",
)


@dataclass(frozen=True)
class DatasetFeatures:
    f1_entities: float
    f2_attributes: float
    f3_distinct_values: float
    f4_av_pairs: float
    f5_mean_profile_size: float
    f6_mean_attribute_size: float
    f7_mean_distinct_entity_values: float
    f8_mean_distinct_attribute_values: float
    f9_max_profile_size: float
    f10_missing_information: float
    f11_mean_value_tokens: float
    f12_mean_value_length: float

    def vector(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)

    @property
    def alt_f10_missing_information(self) -> float:
        """Alternate sparsity estimate: full grid of pairs minus present pairs
        (F1 x F2 - F4). The primary f10 field keeps the verbatim F1 x F7 - F4
        formula, which reduces to F3 - F4 and is typically negative."""
        return self.f1_entities * self.f2_attributes - self.f4_av_pairs

    def to_dict(self, include_alt_f10: bool = True) -> dict:
        out = {name: getattr(self, name) for name in FEATURE_NAMES}
        if include_alt_f10:
            out["alt_f10_missing_information"] = self.alt_f10_missing_information
        return out


def profile_dataset(e1: EntityCollection, e2: EntityCollection) -> DatasetFeatures:
    """Compute all 12 features over both collections in one O(pairs) pass."""
    if len(e1) == 0 or len(e2) == 0:
        raise EmptyCollectionError("profiling requires two non-empty collections")
    attribute_names: set[str] = set()
    distinct_values: set[str] = set()
    pair_count = 0
    max_profile_size = 0
    token_total = 0
    length_total = 0
    n_entities = 0
    for collection in (e1, e2):
        for entity in collection.entities:
            n_entities += 1
            present = 0
            for name, value in entity.attributes:
                attribute_names.add(name)
                if value == "":
                    continue  # empty values are missing information
                present += 1
                distinct_values.add(value)
            pair_count += present
            max_profile_size = max(max_profile_size, present)
            text = serialize_entity(entity)
            token_total += len(text.split())
            length_total += len(text)

    f1 = float(n_entities)
    f2 = float(len(attribute_names))
    f3 = float(len(distinct_values))
    f4 = float(pair_count)
    f7 = f3 / f1
    return DatasetFeatures(
        f1_entities=f1,
        f2_attributes=f2,
        f3_distinct_values=f3,
        f4_av_pairs=f4,
        f5_mean_profile_size=f4 / f1,
        f6_mean_attribute_size=f4 / f2 if f2 else 0.0,
        f7_mean_distinct_entity_values=f7,
        f8_mean_distinct_attribute_values=f3 / f2 if f2 else 0.0,
        f9_max_profile_size=float(max_profile_size),
        f10_missing_information=f1 * f7 - f4,
        f11_mean_value_tokens=token_total / f1,
        f12_mean_value_length=length_total / f1,
    )
