"""Item correlations, embedding sparsification and positive-definite repair."""

from __future__ import annotations

import logging

import numpy as np

from netscale.core.config import PD_EPS, SPARSIFY_MIDDLE_FRACTION
from netscale.core.errors import DegenerateInputError, InputError
from netscale.core.types import CorrelationMatrix, EmbeddingKind, EmbeddingMatrix
from netscale.utils.math import standardize

logger = logging.getLogger(__name__)


def item_correlations(emb: EmbeddingMatrix) -> CorrelationMatrix:
    """Pearson correlations between item columns over embedding dimensions.

    Raises:
        InputError: fewer than 2 dimensions or 2 items
        DegenerateInputError: an item column has zero variance
    """
    if emb.n_dims < 2 or emb.n_items < 2:
        raise InputError(
            f"need at least 2 dimensions and 2 items, got {emb.n_dims} x {emb.n_items}"
        )
    std = emb.values.std(axis=0)
    flat = np.flatnonzero(std == 0.0)
    if flat.size:
        item_id = emb.item_ids[int(flat[0])]
        raise DegenerateInputError(
            f"embedding column for item {item_id!r} has zero variance", item_id=item_id
        )

    r = np.corrcoef(emb.values, rowvar=False)
    r = np.clip((r + r.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(r, emb.item_ids)


def sparsify_embeddings(
    emb: EmbeddingMatrix, middle_fraction: float = SPARSIFY_MIDDLE_FRACTION
) -> EmbeddingMatrix:
    """Zero the middle band of the pooled value distribution.

    Bounds are linear-interpolation quantiles over every entry. Values
    strictly inside the band become 0; values on a bound are kept. When the
    band collapses to a single value, entries equal to it are zeroed.
    """
    if not 0.0 < middle_fraction < 1.0:
        raise InputError(f"middle_fraction must be in (0, 1), got {middle_fraction}")

    values = emb.values
    tail = (1.0 - middle_fraction) / 2.0
    lo, hi = np.quantile(values, [tail, 1.0 - tail], method="linear")
    if lo == hi:
        mask = values == lo
    else:
        mask = (values > lo) & (values < hi)

    out = np.where(mask, 0.0, values)
    logger.debug(
        "Sparsified %d of %d entries (band %.6g..%.6g)", int(mask.sum()), values.size, lo, hi
    )
    return EmbeddingMatrix(out, emb.item_ids, EmbeddingKind.SPARSE)


def ensure_positive_definite(c: CorrelationMatrix, eps: float = PD_EPS) -> CorrelationMatrix:
    """Ridge-repair a correlation matrix whose smallest eigenvalue is below eps.

    A PD input is returned as the same object.
    """
    lam_min = float(np.linalg.eigvalsh(c.values)[0])
    if lam_min >= eps:
        return c

    # (C + dI) / (1 + d) has smallest eigenvalue (lam_min + d) / (1 + d) == eps
    delta = (eps - lam_min) / (1.0 - eps)
    logger.debug("PD repair: lambda_min=%.3g, ridge=%.3g", lam_min, delta)
    repaired = standardize(c.values + delta * np.eye(c.p))
    return CorrelationMatrix(repaired, c.item_ids)
