"""Item model, pool I/O, errors and the reduction pipeline."""

from netscale.core.errors import NetscaleError
from netscale.core.types import (
    AttributeSpec,
    EmbeddingKind,
    EmbeddingMatrix,
    Item,
    ItemPool,
    Network,
    NetworkMethod,
    Partition,
    Provenance,
)

__all__ = [
    "NetscaleError",
    "AttributeSpec",
    "EmbeddingKind",
    "EmbeddingMatrix",
    "Item",
    "ItemPool",
    "Network",
    "NetworkMethod",
    "Partition",
    "Provenance",
]
