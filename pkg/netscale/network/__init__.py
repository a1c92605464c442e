"""Network estimation (EBICglasso, TMFG), community detection and EGA."""

from netscale.network.community import nmi, walktrap
from netscale.network.correlation import (
    ensure_positive_definite,
    item_correlations,
    sparsify_embeddings,
)
from netscale.network.ega import EgaResult, estimate_network, run_ega
from netscale.network.glasso import ebic_glasso
from netscale.network.tmfg import tmfg

__all__ = [
    "ebic_glasso",
    "tmfg",
    "walktrap",
    "nmi",
    "item_correlations",
    "sparsify_embeddings",
    "ensure_positive_definite",
    "EgaResult",
    "estimate_network",
    "run_ega",
]
