"""Exploratory graph analysis: network estimation plus community detection."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

from netscale.core.config import WALKTRAP_STEPS
from netscale.core.types import EmbeddingMatrix, Network, NetworkMethod, NmiScore, Partition
from netscale.network.community import nmi, walktrap
from netscale.network.correlation import ensure_positive_definite, item_correlations
from netscale.network.glasso import ebic_glasso
from netscale.network.tmfg import tmfg

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EgaResult:
    """Network, detected communities and their agreement with the truth labels."""
    network: Network
    partition: Partition
    method: NetworkMethod
    n_obs: int
    nmi: Optional[NmiScore] = None

    @property
    def n_communities(self) -> int:
        return self.partition.n_communities

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method.value,
            "n_obs": self.n_obs,
            "n_communities": self.n_communities,
            "n_edges": self.network.n_edges,
            "NMI": None if self.nmi is None else round(self.nmi.value, 10),
            "NMI_normalization": None if self.nmi is None else self.nmi.normalization,
            "lambda": self.network.metadata.get("lambda"),
            "communities": self.partition.as_dict(),
            "edges": [
                {"from": a, "to": b, "weight": round(w, 12)} for a, b, w in self.network.edges()
            ],
        }


def estimate_network(emb: EmbeddingMatrix, method: NetworkMethod | str) -> Network:
    """Correlate item columns and estimate a network with the given method."""
    method = NetworkMethod(method)
    corr = item_correlations(emb)
    if method is NetworkMethod.TMFG:
        return tmfg(corr)
    return ebic_glasso(ensure_positive_definite(corr), n_obs=emb.n_dims)


def run_ega(
    emb: EmbeddingMatrix,
    method: NetworkMethod | str,
    truth: Optional[Partition] = None,
    steps: int = WALKTRAP_STEPS,
) -> EgaResult:
    """Estimate a network, detect communities and score them against truth.

    Args:
        emb: Embedding matrix (full or sparse)
        method: glasso or tmfg
        truth: Intended structure; NMI is skipped when None
        steps: Walktrap random-walk length

    Returns:
        EgaResult
    """
    method = NetworkMethod(method)
    network = estimate_network(emb, method)
    partition = walktrap(network, steps=steps)
    score = nmi(partition, truth.restrict(partition.item_ids)) if truth is not None else None
    logger.debug(
        "EGA (%s, %s): %d communities%s",
        method.value, emb.kind.value, partition.n_communities,
        "" if score is None else f", NMI {score}",
    )
    return EgaResult(network, partition, method, emb.n_dims, score)
