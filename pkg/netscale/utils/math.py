"""Mathematical utility functions."""

from __future__ import annotations

import hashlib
from typing import Union

import numpy as np
from numpy.typing import NDArray


def stable_key(name: str) -> int:
    """Map a string to a stable 32-bit integer.

    Python's built-in hash() is salted per process, so seeds that must survive
    restarts go through SHA-256 instead.
    """
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def derive_seed(base: int, *keys: Union[int, str]) -> int:
    """Derive a child seed from a base seed and a path of keys.

    Uses numpy's SeedSequence spawn-key mixing, so derive_seed(s, k) is
    reproducible on its own without generating seeds 0..k-1 first.

    Args:
        base: Run-level seed
        *keys: Integers or strings identifying the stage / replicate

    Returns:
        Non-negative 32-bit seed
    """
    spawn_key = tuple(stable_key(k) if isinstance(k, str) else int(k) for k in keys)
    seq = np.random.SeedSequence(int(base), spawn_key=spawn_key)
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def standardize(matrix: NDArray[np.float64]) -> NDArray[np.float64]:
    """Rescale a covariance-like matrix to unit diagonal.

    Args:
        matrix: Symmetric matrix with a positive diagonal

    Returns:
        D^-1/2 M D^-1/2 with the diagonal forced to exactly 1
    """
    d = np.sqrt(np.diag(matrix))
    out = matrix / np.outer(d, d)
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return out


def partial_correlations(precision: NDArray[np.float64]) -> NDArray[np.float64]:
    """Convert a precision matrix to partial correlations.

    w_ij = -theta_ij / sqrt(theta_ii * theta_jj), zero diagonal.
    """
    d = np.sqrt(np.diag(precision))
    pcor = -precision / np.outer(d, d)
    pcor = (pcor + pcor.T) / 2.0
    np.fill_diagonal(pcor, 0.0)
    return np.clip(pcor, -1.0, 1.0)

