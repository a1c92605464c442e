"""Unique variable analysis: redundancy removal via weighted topological overlap."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from netscale.core.config import MIN_STAGE_POOL, UVA_CUTOFF
from netscale.core.errors import InputError
from netscale.core.types import EmbeddingMatrix, ItemPool, Network, NetworkMethod
from netscale.network.ega import estimate_network

logger = logging.getLogger(__name__)


def wto_matrix(net: Network) -> NDArray[np.float64]:
    """Weighted topological overlap of a network's absolute weights; zero diagonal."""
    a = np.clip(np.abs(net.weights), 0.0, 1.0)
    np.fill_diagonal(a, 0.0)
    k = a.sum(axis=1)
    shared = a @ a + a
    denom = np.minimum.outer(k, k) + 1.0 - a
    omega = shared / denom
    omega = (omega + omega.T) / 2.0
    np.fill_diagonal(omega, 0.0)
    return omega


@dataclass(frozen=True)
class RedundancyDecision:
    """One redundancy cluster resolved in a sweep."""
    sweep: int
    cluster_id: int
    items: Tuple[str, ...]
    kept: str
    removed: Tuple[str, ...]
    wto_max: float


@dataclass
class UvaReport:
    """Audit log of a UVA run."""
    n_removed: int = 0
    n_sweeps: int = 0
    redundant_pairs: List[RedundancyDecision] = field(default_factory=list)
    sweep_lambdas: List[Optional[float]] = field(default_factory=list)
    truncated: bool = False
    cutoff: float = UVA_CUTOFF
    method: str = NetworkMethod.GLASSO.value
    sweep_matrices: Dict[int, Tuple[Tuple[str, ...], NDArray[np.float64]]] = field(
        default_factory=dict, repr=False
    )

    def removed_ids(self) -> List[str]:
        return [i for d in self.redundant_pairs for i in d.removed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_removed": self.n_removed,
            "n_sweeps": self.n_sweeps,
            "truncated": self.truncated,
            "cutoff": self.cutoff,
            "method": self.method,
            "sweep_lambdas": self.sweep_lambdas,
            "redundant_pairs": [
                {
                    "sweep": d.sweep,
                    "cluster_id": d.cluster_id,
                    "items": list(d.items),
                    "kept": d.kept,
                    "removed": list(d.removed),
                    "wto_max": round(d.wto_max, 12),
                }
                for d in self.redundant_pairs
            ],
        }


def redundancy_clusters(omega: NDArray[np.float64], cutoff: float) -> List[List[int]]:
    """Connected components of the graph of pairs with wTO >= cutoff.

    Components are returned in order of their smallest member, members sorted.
    """
    graph = nx.Graph()
    rows, cols = np.nonzero(np.triu(omega >= cutoff, k=1))
    graph.add_edges_from(zip(rows.tolist(), cols.tolist()))
    clusters = [sorted(comp) for comp in nx.connected_components(graph)]
    return sorted(clusters, key=lambda comp: comp[0])


def keep_rule(omega: NDArray[np.float64], cluster: List[int], ids: Tuple[str, ...]) -> int:
    """Index of the cluster member with the lowest mean wTO to the rest of the pool.

    Ties go to the lexicographically smallest id.
    """
    p = omega.shape[0]
    means = omega.sum(axis=1) / max(p - 1, 1)
    return min(cluster, key=lambda i: (round(float(means[i]), 12), ids[i]))


def uva_reduce(
    pool: ItemPool,
    emb: EmbeddingMatrix,
    network_method: NetworkMethod | str = NetworkMethod.GLASSO,
    cutoff: float = UVA_CUTOFF,
    min_pool: int = MIN_STAGE_POOL,
) -> Tuple[ItemPool, UvaReport]:
    """Iteratively remove redundant items until a sweep finds none.

    Each sweep re-estimates the network on the surviving columns (no new
    embedding calls). A sweep that would leave fewer than min_pool items is
    not applied and the report is marked truncated.

    Raises:
        InputError: pool smaller than min_pool
    """
    method = NetworkMethod(network_method)
    if len(pool) < min_pool:
        raise InputError(f"UVA needs at least {min_pool} items, got {len(pool)}")

    report = UvaReport(cutoff=cutoff, method=method.value)
    current = pool
    sweep = 0
    while True:
        sweep += 1
        cur_emb = emb.subset(current.ids)
        network = estimate_network(cur_emb, method)
        omega = wto_matrix(network)
        ids = cur_emb.item_ids
        report.sweep_lambdas.append(network.metadata.get("lambda"))
        report.sweep_matrices[sweep] = (ids, omega)

        clusters = redundancy_clusters(omega, cutoff)
        decisions = []
        for cluster_id, cluster in enumerate(clusters, start=1):
            kept = keep_rule(omega, cluster, ids)
            sub = omega[np.ix_(cluster, cluster)]
            decisions.append(RedundancyDecision(
                sweep=sweep,
                cluster_id=cluster_id,
                items=tuple(ids[i] for i in cluster),
                kept=ids[kept],
                removed=tuple(ids[i] for i in cluster if i != kept),
                wto_max=float(sub.max()),
            ))
            logger.debug(
                "UVA sweep %d cluster %d: kept %s, removed %s",
                sweep, cluster_id, ids[kept], [ids[i] for i in cluster if i != kept],
            )

        to_remove = {i for d in decisions for i in d.removed}
        if not to_remove:
            logger.info("UVA sweep %d: no redundancies among %d items", sweep, len(current))
            break
        if len(current) - len(to_remove) < min_pool:
            logger.warning(
                "UVA sweep %d would leave %d items (< %d); stopping early",
                sweep, len(current) - len(to_remove), min_pool,
            )
            report.truncated = True
            break

        report.redundant_pairs.extend(decisions)
        report.n_removed += len(to_remove)
        current = current.subset([i for i in current.ids if i not in to_remove])
        logger.info("UVA sweep %d: removed %d item(s), %d remain", sweep, len(to_remove), len(current))

    report.n_sweeps = sweep
    return current, report
