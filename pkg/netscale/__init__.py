"""
netscale: LLM item generation and network-based scale reduction

Generates candidate scale items with a chat model, embeds them, and reduces
the pool with exploratory graph analysis, redundancy analysis and bootstrap
stability pruning.
"""

__version__ = "0.1.0"

from netscale.core.kernel import (
    GenieResult,
    PipelineOptions,
    TypeResult,
    run_aigenie,
    run_genie,
    run_reduction,
)
from netscale.core.pool import load_embeddings, load_pool, validate_pool, write_pool
from netscale.core.types import AttributeSpec, EmbeddingMatrix, Item, ItemPool, Partition

__all__ = [
    "run_aigenie",
    "run_genie",
    "run_reduction",
    "PipelineOptions",
    "GenieResult",
    "TypeResult",
    "AttributeSpec",
    "EmbeddingMatrix",
    "Item",
    "ItemPool",
    "Partition",
    "load_pool",
    "load_embeddings",
    "validate_pool",
    "write_pool",
]
