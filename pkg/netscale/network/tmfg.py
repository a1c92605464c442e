"""Triangulated Maximally Filtered Graph."""

from __future__ import annotations

import logging
from typing import List, Tuple

import numpy as np

from netscale.core.errors import NetworkSizeError
from netscale.core.types import CorrelationMatrix, Network, NetworkMethod

logger = logging.getLogger(__name__)

Face = Tuple[int, int, int]

# Weight given to a filtered edge whose correlation is exactly zero
STRUCTURAL_WEIGHT = 1e-12


def tmfg(c: CorrelationMatrix) -> Network:
    """Build a planar TMFG network from a correlation matrix.

    Seeds with the 4 vertices of largest summed absolute correlation, then
    repeatedly inserts the (vertex, face) pair of maximum gain. Ties go to
    the lowest vertex index, then the earliest face. Edge weights are the
    signed correlations; an edge whose correlation is exactly zero keeps
    STRUCTURAL_WEIGHT so the network always has 3p - 6 nonzero edges.

    Raises:
        NetworkSizeError: fewer than 4 items
    """
    p = c.p
    if p < 4:
        raise NetworkSizeError(
            f"TMFG needs at least 4 items, got {p}; use the glasso method for smaller pools"
        )

    w = np.abs(c.values).copy()
    np.fill_diagonal(w, 0.0)

    strength = w.sum(axis=1)
    order = np.argsort(-strength, kind="stable")
    seed = sorted(int(v) for v in order[:4])
    a, b, cc, d = seed

    edges = {(i, j) for k, i in enumerate(seed) for j in seed[k + 1:]}
    faces: List[Face] = [(a, b, cc), (a, b, d), (a, cc, d), (b, cc, d)]
    remaining = [v for v in range(p) if v not in seed]

    while remaining:
        face_arr = np.asarray(faces)
        gains = w[np.ix_(remaining, face_arr.ravel())].reshape(len(remaining), len(faces), 3).sum(axis=2)
        flat = int(np.argmax(gains))
        vi, fi = divmod(flat, len(faces))
        v = remaining.pop(vi)
        x, y, z = faces[fi]
        for u in (x, y, z):
            edges.add((min(u, v), max(u, v)))
        faces[fi] = (x, y, v)
        faces.extend([(x, z, v), (y, z, v)])

    weights = np.zeros((p, p))
    for i, j in edges:
        value = c.values[i, j]
        weights[i, j] = weights[j, i] = value if value != 0.0 else STRUCTURAL_WEIGHT

    logger.debug("TMFG built %d edges over %d vertices", len(edges), p)
    return Network(
        weights,
        c.item_ids,
        NetworkMethod.TMFG,
        {"faces": [tuple(sorted(f)) for f in faces], "seed": seed},
    )
