"""EBIC-selected graphical lasso networks."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numba
import numpy as np
from numpy.typing import NDArray

from netscale.core.config import (
    GLASSO_GAMMA,
    GLASSO_LAMBDA_MIN_RATIO,
    GLASSO_MAX_ITER,
    GLASSO_N_LAMBDA,
    GLASSO_TOL,
)
from netscale.core.errors import EstimationError, InputError
from netscale.core.types import CorrelationMatrix, Network, NetworkMethod
from netscale.utils.math import partial_correlations

logger = logging.getLogger(__name__)

_ZERO = 1e-12


@dataclass(frozen=True)
class PathPoint:
    """One solved point of the lambda path."""
    index: int
    lam: float
    precision: NDArray[np.float64]
    n_edges: int
    loglik: float
    ebic: float
    converged: bool = True


def lambda_path(
    c: CorrelationMatrix,
    n_lambda: int = GLASSO_N_LAMBDA,
    lambda_min_ratio: float = GLASSO_LAMBDA_MIN_RATIO,
) -> NDArray[np.float64]:
    """Log-spaced penalties in ascending order, ending at max |off-diagonal|."""
    off = np.abs(c.values[~np.eye(c.p, dtype=bool)])
    lam_max = float(off.max()) if off.size else 0.0
    if lam_max <= _ZERO:
        return np.zeros(0)
    return np.exp(
        np.linspace(np.log(lambda_min_ratio * lam_max), np.log(lam_max), n_lambda)
    )


def ebic(precision: NDArray[np.float64], s: NDArray[np.float64], n_obs: int, gamma: float) -> tuple:
    """(EBIC, loglik, edge count) of a precision matrix against sample correlation s."""
    p = s.shape[0]
    _, logdet = np.linalg.slogdet(precision)
    loglik = (n_obs / 2.0) * (logdet - float(np.trace(precision @ s)))
    n_edges = int(np.count_nonzero(np.abs(np.triu(precision, k=1)) > _ZERO))
    value = -2.0 * loglik + n_edges * np.log(n_obs) + 4.0 * n_edges * gamma * np.log(p)
    return float(value), float(loglik), n_edges


@numba.njit(cache=True, nogil=True)
def _block_cd(s, lam, w, beta, tol, max_iter):
    """Block coordinate descent for the off-diagonal-penalized graphical lasso.

    w (covariance estimate) and beta (column lasso coefficients) are warm
    starts and are updated in place. The diagonal of w stays equal to s.
    Returns the number of sweeps used, or -1 without convergence.
    """
    p = s.shape[0]
    scale = 0.0
    for i in range(p):
        for j in range(p):
            if i != j:
                scale += abs(s[i, j])
    scale /= p * (p - 1)
    if scale == 0.0:
        return 0
    thr = tol * scale

    wb = np.empty(p)
    for sweep in range(max_iter):
        dw = 0.0
        for j in range(p):
            for m in range(p):
                wb[m] = 0.0
            for l in range(p):
                bl = beta[l, j]
                if l != j and bl != 0.0:
                    for m in range(p):
                        wb[m] += w[m, l] * bl

            for _ in range(max_iter):
                dlx = 0.0
                for k in range(p):
                    if k == j:
                        continue
                    old = beta[k, j]
                    rho = s[k, j] - wb[k] + w[k, k] * old
                    if rho > lam:
                        new = (rho - lam) / w[k, k]
                    elif rho < -lam:
                        new = (rho + lam) / w[k, k]
                    else:
                        new = 0.0
                    if new != old:
                        d = new - old
                        beta[k, j] = new
                        for m in range(p):
                            wb[m] += w[m, k] * d
                        if abs(d) * w[k, k] > dlx:
                            dlx = abs(d) * w[k, k]
                if dlx < thr:
                    break

            for k in range(p):
                if k != j:
                    dw += abs(wb[k] - w[k, j])
                    w[k, j] = wb[k]
                    w[j, k] = wb[k]

        if dw / (p * (p - 1)) < thr:
            return sweep + 1
    return -1


def _precision(w: NDArray[np.float64], beta: NDArray[np.float64]) -> NDArray[np.float64]:
    # theta_jj = 1 / (w_jj - w_12' b), theta_12 = -b theta_jj
    t = np.diag(w) - np.sum(w * beta, axis=0)
    theta = -beta / t[None, :]
    np.fill_diagonal(theta, 1.0 / t)
    theta = (theta + theta.T) / 2.0
    theta[np.abs(theta) <= _ZERO] = 0.0
    return theta


def _start(s: NDArray[np.float64]) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Exact solution at the top of the path: diagonal covariance, no coefficients."""
    return np.diag(np.diag(s)).astype(np.float64), np.zeros_like(s, dtype=np.float64)


def glasso_path(
    c: CorrelationMatrix,
    n_obs: int,
    gamma: float = GLASSO_GAMMA,
    n_lambda: int = GLASSO_N_LAMBDA,
    lambda_min_ratio: float = GLASSO_LAMBDA_MIN_RATIO,
) -> List[PathPoint]:
    """Solve the lambda path from the largest penalty down, warm-starting each point.

    Points are returned in ascending lambda order. A point that does not
    converge is kept with converged=False and is never selected.
    """
    s = np.ascontiguousarray(c.values, dtype=np.float64)
    lambdas = lambda_path(c, n_lambda, lambda_min_ratio)
    w, beta = _start(s)
    points: List[PathPoint] = []
    for index in range(len(lambdas) - 1, -1, -1):
        lam = float(lambdas[index])
        sweeps = _block_cd(s, lam, w, beta, GLASSO_TOL, GLASSO_MAX_ITER)
        precision = _precision(w, beta)
        if sweeps < 0 or not np.all(np.isfinite(precision)):
            logger.warning(
                "graphical lasso did not converge at lambda index %d (%.4g) within %d sweeps",
                index, lam, GLASSO_MAX_ITER,
            )
            points.append(PathPoint(index, lam, precision, 0, float("nan"), float("inf"), False))
            if not np.all(np.isfinite(w)):
                w, beta = _start(s)
            continue
        value, loglik, n_edges = ebic(precision, s, n_obs, gamma)
        points.append(PathPoint(index, lam, precision, n_edges, loglik, value))
    points.reverse()
    return points


def ebic_glasso(
    c: CorrelationMatrix,
    n_obs: int,
    gamma: float = GLASSO_GAMMA,
    n_lambda: int = GLASSO_N_LAMBDA,
    lambda_min_ratio: float = GLASSO_LAMBDA_MIN_RATIO,
) -> Network:
    """Estimate a partial-correlation network with EBIC model selection.

    Args:
        c: PD-repaired correlation matrix
        n_obs: Number of embedding dimensions behind c
        gamma: EBIC hyperparameter (0 gives BIC)
        n_lambda: Path length
        lambda_min_ratio: Smallest penalty as a fraction of the largest

    Returns:
        Network whose weights are partial correlations; metadata records the
        selected lambda, its index, EBIC, n_obs and any skipped path points

    Raises:
        InputError: n_obs < 3
        EstimationError: no point of the path converged
    """
    if n_obs < 3:
        raise InputError(f"EBICglasso needs n_obs >= 3, got {n_obs}")
    if not 0.0 < lambda_min_ratio < 1.0:
        raise InputError(f"lambda_min_ratio must be in (0, 1), got {lambda_min_ratio}")

    points = glasso_path(c, n_obs, gamma, n_lambda, lambda_min_ratio)
    if not points:
        # No off-diagonal association at all
        return Network(
            np.zeros((c.p, c.p)),
            c.item_ids,
            NetworkMethod.GLASSO,
            {"lambda": 0.0, "lambda_index": None, "ebic": None, "n_obs": n_obs, "gamma": gamma},
        )

    solved = [pt for pt in points if pt.converged]
    skipped = [pt.index for pt in points if not pt.converged]
    if not solved:
        raise EstimationError(
            f"graphical lasso did not converge at any of {len(points)} lambda values "
            f"within {GLASSO_MAX_ITER} sweeps",
            lambda_index=skipped[-1],
        )

    best = min(solved, key=lambda pt: pt.ebic)
    logger.debug(
        "EBICglasso selected lambda=%.4g (index %d, %d edges, EBIC %.3f)",
        best.lam, best.index, best.n_edges, best.ebic,
    )
    weights = partial_correlations(best.precision)
    return Network(
        weights,
        c.item_ids,
        NetworkMethod.GLASSO,
        {
            "lambda": best.lam,
            "lambda_index": best.index,
            "ebic": best.ebic,
            "n_obs": n_obs,
            "gamma": gamma,
            "skipped_lambda_indices": skipped,
        },
    )
