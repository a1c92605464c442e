"""Shared fixtures: small planted-structure pools and embeddings."""

import pytest

from netscale.core.types import AttributeSpec, Item, ItemPool
from netscale.synthetic import orthogonal_blocks, planted_embeddings


@pytest.fixture
def two_block():
    """2 attributes x 6 items, clean structure, no anomalies."""
    return planted_embeddings(k=2, m=6, dims=128, r=0.6, seed=3)


@pytest.fixture
def orthogonal():
    """8 items in 2 attributes on disjoint coordinates."""
    return orthogonal_blocks(k=2, m=4, dims=256, rho=0.4, seed=1)


@pytest.fixture
def small_pool():
    items = [
        Item("1", "I enjoy new ideas", "curious", "openness"),
        Item("2", "I make art", "creative", "openness"),
        Item("3", "I keep my desk tidy", "organized", "conscientiousness"),
        Item("4", "I finish what I start", "disciplined", "conscientiousness"),
    ]
    return ItemPool(items)


@pytest.fixture
def small_spec():
    return AttributeSpec({
        "openness": ["curious", "creative"],
        "conscientiousness": ["organized", "disciplined"],
    })


@pytest.fixture
def typed():
    """Two item types, each with two attributes on their own coordinate block."""
    data = orthogonal_blocks(k=4, m=4, dims=512, rho=0.5, seed=2)
    items = []
    for item in data.pool.items:
        block = int(item.attribute.split("_")[1]) - 1
        items.append(Item(
            item.id, item.statement, f"attr_{block % 2 + 1}", f"type_{block // 2 + 1}",
        ))
    return ItemPool(items), data.embeddings
