"""Synthetic Clean-Clean datasets with known structure.

``easy_bundle`` builds a dataset with a wide plateau of near-perfect
configurations, useful for benchmarking samplers against grid search.
``tiered_bundle`` builds a dataset whose matches are planted at controlled
neighbor ranks, so the smallest sufficient top-k grows with the tier depth.
"""
from __future__ import annotations

import numpy as np

from .datamodel import EntityCollection, EntityProfile, GroundTruth
from .ingest import DatasetBundle

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def _token(rng: np.random.Generator, length: int = 6) -> str:
    return "".join(_ALPHABET[i] for i in rng.integers(0, 26, size=length))


def _perturb_token(rng: np.random.Generator, token: str) -> str:
    """Change one character so the token stays a near-duplicate."""
    pos = int(rng.integers(0, len(token)))
    old = token[pos]
    new = old
    while new == old:
        new = _ALPHABET[int(rng.integers(0, 26))]
    return token[:pos] + new + token[pos + 1 :]


def easy_bundle(n: int = 300, seed: int = 0, name: str = "easy") -> DatasetBundle:
    """One-to-one matches where each right entity drops one token from its
    left counterpart. Non-matching texts share no tokens, so most of the
    config grid scores near-perfect F1."""
    rng = np.random.default_rng(seed)
    lefts: list[EntityProfile] = []
    rights: list[EntityProfile] = []
    pairs: set[tuple[str, str]] = set()
    for i in range(n):
        title = [_token(rng) for _ in range(3)]
        desc = [_token(rng) for _ in range(5)]
        code = _token(rng, length=8)
        left_id, right_id = f"L{i}", f"R{i}"
        lefts.append(
            EntityProfile(
                id=left_id,
                attributes=(
                    ("title", " ".join(title)),
                    ("description", " ".join(desc)),
                    ("code", code),
                ),
            )
        )
        drop = int(rng.integers(0, len(desc)))
        short_desc = [t for j, t in enumerate(desc) if j != drop]
        rights.append(
            EntityProfile(
                id=right_id,
                attributes=(
                    ("title", " ".join(title)),
                    ("description", " ".join(short_desc)),
                    ("code", code),
                ),
            )
        )
        pairs.add((left_id, right_id))
    return DatasetBundle(
        e1=EntityCollection(source_id="E1", entities=tuple(lefts)),
        e2=EntityCollection(source_id="E2", entities=tuple(rights)),
        gt=GroundTruth(pairs=frozenset(pairs)),
        name=name,
    )


def tiered_bundle(
    n_groups: int = 18,
    group_size: int = 4,
    seed: int = 0,
    name: str | None = None,
    base_tokens: int = 12,
) -> DatasetBundle:
    """Matches planted at neighbor ranks 1..group_size.

    Each group shares a base text. Right entity t keeps the full base plus a
    unique token; its true left match corrupts t-1 base tokens, so for query t
    the true match sits at rank t among the group's lefts. Resolving every
    pair therefore needs top-k >= group_size, and F1 as a function of k rises
    until k reaches the group size.
    """
    if name is None:
        name = f"tiered{group_size}"
    rng = np.random.default_rng(seed)
    lefts: list[EntityProfile] = []
    rights: list[EntityProfile] = []
    pairs: set[tuple[str, str]] = set()
    for g in range(n_groups):
        base = [_token(rng) for _ in range(base_tokens)]
        for t in range(1, group_size + 1):
            unique = _token(rng)
            left_id = f"L{g}_{t}"
            right_id = f"R{g}_{t}"
            corrupted = list(base)
            for pos in rng.choice(base_tokens, size=t - 1, replace=False):
                corrupted[int(pos)] = _token(rng)
            left_text = " ".join(corrupted + [_perturb_token(rng, unique)])
            right_text = " ".join(base + [unique])
            lefts.append(EntityProfile(id=left_id, attributes=(("text", left_text),)))
            rights.append(EntityProfile(id=right_id, attributes=(("text", right_text),)))
            pairs.add((left_id, right_id))
    return DatasetBundle(
        e1=EntityCollection(source_id="E1", entities=tuple(lefts)),
        e2=EntityCollection(source_id="E2", entities=tuple(rights)),
        gt=GroundTruth(pairs=frozenset(pairs)),
        name=name,
    )


def tiered_suite(
    group_sizes: tuple[int, ...] = (3, 4, 5, 6),
    n_groups: int = 18,
    seed: int = 0,
) -> list[DatasetBundle]:
    """A family of tiered datasets whose best minimal top-k tracks dataset
    size, for exercising config recommendation across datasets."""
    return [
        tiered_bundle(n_groups=n_groups, group_size=g, seed=seed + g)
        for g in group_sizes
    ]
