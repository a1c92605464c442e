"""Walktrap community detection and partition agreement (NMI)."""

from __future__ import annotations

import logging
from typing import Dict, List, Tuple

import numpy as np
from numpy.typing import NDArray
from sklearn.metrics import normalized_mutual_info_score

from netscale.core.config import WALKTRAP_STEPS
from netscale.core.errors import InputError
from netscale.core.types import Network, NmiScore, Partition

logger = logging.getLogger(__name__)


def _transition_powers(adj: NDArray[np.float64], steps: int) -> Tuple[NDArray, NDArray]:
    """Degree vector and P^t for the loop-augmented graph."""
    a = adj.copy()
    n_neighbors = np.count_nonzero(a, axis=1)
    row_sum = a.sum(axis=1)
    # Each vertex gets a self-loop of its mean incident weight (1 when isolated)
    loops = np.where(n_neighbors > 0, row_sum / np.maximum(n_neighbors, 1), 1.0)
    a[np.diag_indices_from(a)] = loops
    degree = a.sum(axis=1)
    transition = a / degree[:, None]
    return degree, np.linalg.matrix_power(transition, steps)


def walktrap_levels(net: Network, steps: int = WALKTRAP_STEPS) -> List[Tuple[List[int], float]]:
    """Every dendrogram level as (membership, weighted modularity).

    Level 0 is all singletons; each following level merges the adjacent pair
    of communities with the smallest increase in mean squared walk distance.
    Modularity is updated per merge from the weight between the two merged
    communities and their strengths.
    """
    n = net.p
    adj = np.abs(net.weights)
    np.fill_diagonal(adj, 0.0)

    membership = list(range(n))
    total = float(adj.sum())  # 2m
    if total <= 0.0:
        return [(membership, 0.0)]

    degree, pt = _transition_powers(adj, steps)
    inv_degree = 1.0 / degree

    sizes: Dict[int, int] = {v: 1 for v in range(n)}
    probs: Dict[int, NDArray] = {v: pt[v].copy() for v in range(n)}
    members: Dict[int, List[int]] = {v: [v] for v in range(n)}
    strength: Dict[int, float] = {v: float(s) / total for v, s in enumerate(adj.sum(axis=1))}
    neighbors: Dict[int, set] = {v: set(np.flatnonzero(adj[v]).tolist()) for v in range(n)}

    def delta_sigma(c1: int, c2: int) -> float:
        diff = probs[c1] - probs[c2]
        r2 = float(np.dot(diff * diff, inv_degree))
        s1, s2 = sizes[c1], sizes[c2]
        return (s1 * s2 / (s1 + s2)) * r2 / n

    deltas: Dict[Tuple[int, int], float] = {}
    for c1 in neighbors:
        for c2 in neighbors[c1]:
            if c1 < c2:
                deltas[(c1, c2)] = delta_sigma(c1, c2)

    q = -sum(a * a for a in strength.values())
    levels = [(list(membership), q)]
    next_id = n
    while deltas:
        (c1, c2), _ = min(deltas.items(), key=lambda kv: (kv[1], kv[0]))
        between = float(adj[np.ix_(members[c1], members[c2])].sum()) / total
        a1, a2 = strength.pop(c1), strength.pop(c2)
        q += 2.0 * (between - a1 * a2)

        new = next_id
        next_id += 1
        s1, s2 = sizes.pop(c1), sizes.pop(c2)
        sizes[new] = s1 + s2
        strength[new] = a1 + a2
        members[new] = members.pop(c1) + members.pop(c2)
        probs[new] = (s1 * probs.pop(c1) + s2 * probs.pop(c2)) / (s1 + s2)
        merged_neighbors = (neighbors.pop(c1) | neighbors.pop(c2)) - {c1, c2}
        neighbors[new] = merged_neighbors
        for key in [k for k in deltas if c1 in k or c2 in k]:
            del deltas[key]
        for other in merged_neighbors:
            neighbors[other] -= {c1, c2}
            neighbors[other].add(new)
            deltas[(other, new)] = delta_sigma(other, new)

        membership = [new if m in (c1, c2) else m for m in membership]
        levels.append((list(membership), q))

    return levels


def walktrap(net: Network, steps: int = WALKTRAP_STEPS) -> Partition:
    """Walktrap partition cut at maximum weighted modularity.

    Absolute edge weights drive the walks. The earliest level attaining the
    maximum wins. Isolated vertices stay singletons.
    """
    if net.p == 0:
        raise InputError("walktrap needs a non-empty network")
    if steps < 1:
        raise InputError(f"steps must be >= 1, got {steps}")

    levels = walktrap_levels(net, steps)
    best_membership, best_q = levels[0]
    for membership, q in levels[1:]:
        if q > best_q + 1e-12:
            best_membership, best_q = membership, q

    partition = Partition(net.item_ids, best_membership)
    logger.debug(
        "Walktrap found %d communities (modularity %.4f)", partition.n_communities, best_q
    )
    return partition


def nmi(a: Partition, b: Partition) -> NmiScore:
    """Normalized mutual information (arithmetic-mean normalization) as a percentage.

    When either side has a single community the score is 0, unless both do,
    in which case it is 100.

    Raises:
        InputError: the partitions cover different item ids
    """
    if set(a.item_ids) != set(b.item_ids) or len(a.item_ids) != len(b.item_ids):
        missing = sorted(set(a.item_ids) ^ set(b.item_ids))
        raise InputError(
            "partitions cover different items"
            + (f": {', '.join(missing[:10])}" if missing else "")
        )
    lookup = b.as_dict()
    labels_a = list(a.labels)
    labels_b = [lookup[i] for i in a.item_ids]

    single_a = len(set(labels_a)) == 1
    single_b = len(set(labels_b)) == 1
    if single_a or single_b:
        return NmiScore(100.0 if single_a and single_b else 0.0)

    value = normalized_mutual_info_score(labels_a, labels_b, average_method="arithmetic")
    return NmiScore(float(np.clip(value * 100.0, 0.0, 100.0)))
