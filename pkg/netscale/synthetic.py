"""Synthetic item pools with planted community structure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from netscale.core.errors import InputError
from netscale.core.types import EmbeddingMatrix, Item, ItemPool, Provenance


@dataclass
class PlantedData:
    """A planted pool, its embeddings and the planted anomalies."""
    pool: ItemPool
    embeddings: EmbeddingMatrix
    duplicates: List[Tuple[str, str]] = field(default_factory=list)  # (original, copy)
    bridges: List[str] = field(default_factory=list)


def planted_embeddings(
    k: int = 4,
    m: int = 15,
    dims: int = 256,
    r: float = 0.6,
    duplicates: float = 0.0,
    bridges: int = 0,
    seed: int = 0,
    types: int = 1,
    type_r: float = 0.0,
    duplicate_noise: float = 0.05,
) -> PlantedData:
    """Block-structured embeddings: `types` types x k attributes x m items.

    An item of attribute b in type t is
    sqrt(type_r) * g_t + sqrt(r) * f_tb + sqrt(1 - r - type_r) * e,
    so items of one attribute correlate at about r + type_r.

    Args:
        k: Attributes per type
        m: Items per attribute
        dims: Embedding dimensions
        r: Attribute-factor variance share
        duplicates: Fraction of base items that get a near-identical copy
            (same statement, column plus small noise)
        bridges: Items per type loading equally on two attributes
        seed: RNG seed
        types: Number of item types
        type_r: Type-factor variance share
        duplicate_noise: Noise scale added to duplicate columns

    Returns:
        PlantedData
    """
    if k < 1 or m < 1 or dims < 2 or types < 1:
        raise InputError("k, m and types must be >= 1 and dims >= 2")
    if not (0.0 <= r and 0.0 <= type_r and r + type_r < 1.0):
        raise InputError("need r >= 0, type_r >= 0 and r + type_r < 1")
    if bridges and k < 2:
        raise InputError("bridge items need at least two attributes")

    rng = np.random.default_rng(seed)
    noise_share = np.sqrt(1.0 - r - type_r)
    columns: List[np.ndarray] = []
    items: List[Item] = []
    planted_dups: List[Tuple[str, str]] = []
    planted_bridges: List[str] = []

    def add(vec: np.ndarray, statement: str, attribute: str, item_type: str) -> str:
        item_id = str(len(items) + 1)
        columns.append(vec)
        items.append(Item(item_id, statement, attribute, item_type))
        return item_id

    for t in range(types):
        item_type = "construct" if types == 1 else f"type_{t + 1}"
        g = rng.standard_normal(dims)
        factors = rng.standard_normal((k, dims))
        base: List[Tuple[str, np.ndarray, str, str]] = []
        for b in range(k):
            attribute = f"attr_{b + 1}"
            for j in range(m):
                vec = np.sqrt(type_r) * g + np.sqrt(r) * factors[b] + noise_share * rng.standard_normal(dims)
                statement = f"{item_type} {attribute} statement {j + 1}"
                item_id = add(vec, statement, attribute, item_type)
                base.append((item_id, vec, statement, attribute))

        n_dup = int(round(duplicates * len(base)))
        for idx in sorted(rng.choice(len(base), size=n_dup, replace=False).tolist()):
            orig_id, vec, statement, attribute = base[idx]
            copy = vec + duplicate_noise * rng.standard_normal(dims)
            planted_dups.append((orig_id, add(copy, statement, attribute, item_type)))

        for j in range(bridges):
            a, b = (2 * j) % k, (2 * j + 1) % k
            vec = (
                np.sqrt(type_r) * g
                + np.sqrt(r / 2.0) * (factors[a] + factors[b])
                + noise_share * rng.standard_normal(dims)
            )
            planted_bridges.append(
                add(vec, f"{item_type} bridge statement {j + 1}", f"attr_{a + 1}", item_type)
            )

    emb = EmbeddingMatrix(np.column_stack(columns), [i.id for i in items])
    return PlantedData(ItemPool(items, Provenance.USER_SUPPLIED), emb, planted_dups, planted_bridges)


def orthogonal_blocks(
    k: int = 2, m: int = 4, dims: int = 256, rho: float = 0.4, seed: int = 0
) -> PlantedData:
    """k attributes x m items whose blocks live on disjoint coordinate ranges.

    Items of one block correlate at about rho; items of different blocks
    share no nonzero coordinate, so their correlation is near zero.
    """
    if dims < 4 * k:
        raise InputError("dims must be at least 4k")
    if not 0.0 < rho < 1.0:
        raise InputError("rho must be in (0, 1)")
    rng = np.random.default_rng(seed)
    width = dims // k
    columns = []
    items = []
    for b in range(k):
        span = slice(b * width, (b + 1) * width)
        factor = rng.standard_normal(width)
        for j in range(m):
            vec = np.zeros(dims)
            vec[span] = np.sqrt(rho) * factor + np.sqrt(1.0 - rho) * rng.standard_normal(width)
            item_id = str(len(items) + 1)
            columns.append(vec)
            items.append(
                Item(item_id, f"block {b + 1} statement {j + 1}", f"attr_{b + 1}", "construct")
            )
    emb = EmbeddingMatrix(np.column_stack(columns), [i.id for i in items])
    return PlantedData(ItemPool(items), emb)
