"""Parametric bootstrap EGA: item stability and pruning of unstable items."""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, overload

import numpy as np
from scipy.optimize import linear_sum_assignment

from netscale.core.config import MIN_STAGE_POOL, N_BOOT, STABILITY_THRESHOLD
from netscale.core.errors import InputError
from netscale.core.types import EmbeddingMatrix, ItemPool, NetworkMethod, Partition
from netscale.network.correlation import ensure_positive_definite, item_correlations
from netscale.network.ega import run_ega
from netscale.utils.math import derive_seed

logger = logging.getLogger(__name__)


class ReplicateSequence(Sequence[EmbeddingMatrix]):
    """Lazily drawn MVN(0, R) replicates of an embedding matrix.

    Replicate k is seeded from SeedSequence(seed, spawn_key=(k,)), so any
    replicate can be regenerated on its own.
    """

    def __init__(self, emb: EmbeddingMatrix, n: int, seed: int):
        if n < 1:
            raise InputError(f"need at least one replicate, got {n}")
        self.template = emb
        self.n = n
        self.seed = int(seed)
        self.correlation = ensure_positive_definite(item_correlations(emb))

    def __len__(self) -> int:
        return self.n

    @overload
    def __getitem__(self, k: int) -> EmbeddingMatrix: ...

    @overload
    def __getitem__(self, k: slice) -> List[EmbeddingMatrix]: ...

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(self.n))]
        if k < 0:
            k += self.n
        if not 0 <= k < self.n:
            raise IndexError(k)
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(k,)))
        p = self.correlation.p
        draw = rng.multivariate_normal(
            np.zeros(p), self.correlation.values, size=self.template.n_dims, method="cholesky"
        )
        return EmbeddingMatrix(draw, self.template.item_ids, self.template.kind)


def parametric_replicates(emb: EmbeddingMatrix, n: int = N_BOOT, seed: int = 0) -> ReplicateSequence:
    """n_dims x p replicates drawn from the PD-repaired item correlation matrix."""
    return ReplicateSequence(emb, n, seed)


def align_labels(empirical: Partition, replicate: Partition) -> Dict[str, int]:
    """Map each item to its replicate community, relabelled onto empirical labels.

    Replicate communities are matched to empirical ones by maximum overlap
    (Hungarian assignment); unmatched ones get labels above the empirical range.
    """
    emp = empirical.as_dict()
    rep = replicate.as_dict()
    emp_labels = sorted(set(emp.values()))
    rep_labels = sorted(set(rep.values()))
    emp_index = {label: k for k, label in enumerate(emp_labels)}
    rep_index = {label: k for k, label in enumerate(rep_labels)}

    overlap = np.zeros((len(rep_labels), len(emp_labels)), dtype=np.int64)
    for item_id, label in rep.items():
        overlap[rep_index[label], emp_index[emp[item_id]]] += 1

    rows, cols = linear_sum_assignment(overlap, maximize=True)
    mapping = {rep_labels[r]: emp_labels[c] for r, c in zip(rows, cols)}
    fresh = max(emp_labels) + 1
    for label in rep_labels:
        if label not in mapping:
            mapping[label] = fresh
            fresh += 1
    return {item_id: mapping[label] for item_id, label in rep.items()}


def item_stability(empirical: Partition, replicates: Sequence[Partition]) -> Dict[str, float]:
    """Share of replicates in which each item keeps its empirical community after alignment.

    Raises:
        InputError: no replicates, or a replicate covers a different item set
    """
    if not replicates:
        raise InputError("item stability needs at least one replicate partition")
    ids = set(empirical.item_ids)
    hits = Counter({item_id: 0 for item_id in empirical.item_ids})
    emp = empirical.as_dict()
    for k, replicate in enumerate(replicates):
        if set(replicate.item_ids) != ids:
            raise InputError(f"replicate {k} covers a different item set than the empirical partition")
        aligned = align_labels(empirical, replicate)
        for item_id in empirical.item_ids:
            if aligned[item_id] == emp[item_id]:
                hits[item_id] += 1
    n = len(replicates)
    return {item_id: hits[item_id] / n for item_id in empirical.item_ids}


@dataclass
class BootResult:
    """Bootstrap summary for one item pool."""
    n_replicates: int
    dimension_frequency: Dict[int, float]
    item_stability: Dict[str, float]
    replicate_seed_base: int
    empirical: Partition
    method: str = NetworkMethod.GLASSO.value
    kind: str = "full"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_replicates": self.n_replicates,
            "replicate_seed_base": self.replicate_seed_base,
            "method": self.method,
            "embedding": self.kind,
            "dimension_frequency": {str(k): v for k, v in self.dimension_frequency.items()},
            "item_stability": dict(self.item_stability),
            "empirical_community": self.empirical.as_dict(),
        }


def run_boot(
    emb: EmbeddingMatrix,
    method: NetworkMethod | str,
    n: int = N_BOOT,
    seed: int = 0,
    workers: int = 1,
) -> BootResult:
    """Empirical EGA plus n replicate EGAs; results are reduced in replicate order."""
    method = NetworkMethod(method)
    empirical = run_ega(emb, method).partition
    replicates = parametric_replicates(emb, n, seed)

    def one(k: int) -> Partition:
        return run_ega(replicates[k], method).partition

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            partitions = list(executor.map(one, range(n)))
    else:
        partitions = [one(k) for k in range(n)]

    counts = Counter(p.n_communities for p in partitions)
    frequency = {dims: counts[dims] / n for dims in sorted(counts)}
    return BootResult(
        n_replicates=n,
        dimension_frequency=frequency,
        item_stability=item_stability(empirical, partitions),
        replicate_seed_base=int(seed),
        empirical=empirical,
        method=method.value,
        kind=emb.kind.value,
    )


@dataclass(frozen=True)
class StabilityRemoval:
    iteration: int
    item_id: str
    stability: float


@dataclass
class BootReport:
    """Audit log of iterative stability pruning."""
    initial_boot: BootResult
    final_boot: BootResult
    n_removed: int = 0
    items_removed: List[StabilityRemoval] = field(default_factory=list)
    n_iterations: int = 0
    threshold: float = STABILITY_THRESHOLD
    prune: str = "all"
    truncated: bool = False
    initial_boot_with_redundancies: Optional[BootResult] = None
    statements: Dict[str, str] = field(default_factory=dict, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_removed": self.n_removed,
            "n_iterations": self.n_iterations,
            "threshold": self.threshold,
            "prune": self.prune,
            "truncated": self.truncated,
            "items_removed": [
                {
                    "iteration": r.iteration,
                    "ID": r.item_id,
                    "statement": self.statements.get(r.item_id),
                    "stability": r.stability,
                }
                for r in self.items_removed
            ],
            "initial_boot": self.initial_boot.to_dict(),
            "final_boot": self.final_boot.to_dict(),
            "initial_boot_with_redundancies": (
                None
                if self.initial_boot_with_redundancies is None
                else self.initial_boot_with_redundancies.to_dict()
            ),
        }


def _least_stable(stability: Dict[str, float], candidates: List[str]) -> str:
    return min(candidates, key=lambda i: (stability[i], i))


def stability_reduce(
    pool: ItemPool,
    emb: EmbeddingMatrix,
    method: NetworkMethod | str = NetworkMethod.GLASSO,
    threshold: float = STABILITY_THRESHOLD,
    n: int = N_BOOT,
    seed: int = 0,
    prune: str = "all",
    min_pool: int = MIN_STAGE_POOL,
    workers: int = 1,
) -> Tuple[ItemPool, BootReport]:
    """Prune items below the stability threshold until every item is stable.

    prune="all" removes every unstable item per iteration (only the least
    stable one if that would empty the pool); prune="one" removes only the
    least stable. Iteration k draws its replicates from derive_seed(seed, k).

    Raises:
        InputError: pool smaller than min_pool or unknown prune mode
    """
    if prune not in ("all", "one"):
        raise InputError(f"prune must be 'all' or 'one', got {prune!r}")
    if len(pool) < min_pool:
        raise InputError(f"bootEGA needs at least {min_pool} items, got {len(pool)}")
    method = NetworkMethod(method)

    current = pool
    removals: List[StabilityRemoval] = []
    initial: Optional[BootResult] = None
    truncated = False
    iteration = 0
    while True:
        iteration += 1
        boot = run_boot(
            emb.subset(current.ids), method, n, derive_seed(seed, iteration), workers=workers
        )
        if initial is None:
            initial = boot
        stab = boot.item_stability
        unstable = [i for i in current.ids if stab[i] < threshold]
        logger.info(
            "bootEGA iteration %d: %d items, %d below %.2f, dimensions %s",
            iteration, len(current), len(unstable), threshold, boot.dimension_frequency,
        )
        if not unstable:
            break

        if prune == "one" or len(unstable) == len(current):
            unstable = [_least_stable(stab, unstable)]
        if len(current) - len(unstable) < min_pool:
            logger.warning(
                "bootEGA iteration %d would leave %d items (< %d); stopping early",
                iteration, len(current) - len(unstable), min_pool,
            )
            truncated = True
            break

        drop = set(unstable)
        removals.extend(
            StabilityRemoval(iteration, i, stab[i]) for i in current.ids if i in drop
        )
        current = current.subset([i for i in current.ids if i not in drop])

    report = BootReport(
        initial_boot=initial,
        final_boot=boot,
        n_removed=len(removals),
        items_removed=removals,
        n_iterations=iteration,
        threshold=threshold,
        prune=prune,
        truncated=truncated,
        statements={item.id: item.statement for item in pool.items},
    )
    return current, report
