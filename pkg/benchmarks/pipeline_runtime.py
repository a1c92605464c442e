#!/usr/bin/env python3
"""Pipeline benchmark on planted item pools.

Each seed plants 4 attributes x 15 items in 256-dim embeddings with
within-attribute correlation 0.6, 10% near-duplicate items and 2 bridge
items, then runs the full reduction with 100 bootstrap replicates.

Targets: final NMI >= initial NMI in at least 18 of 20 seeds, mean final
NMI >= 95%, UVA catches >= 80% of planted duplicates, < 60s per run.
Stability pruning alone on a 13-item pool with 100 replicates must finish
in under 15s.
"""

import json
import statistics
import sys
import time
from pathlib import Path
from typing import Dict, List

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from netscale import PipelineOptions, run_reduction
from netscale.network.ega import run_ega
from netscale.reduction.bootega import stability_reduce
from netscale.synthetic import planted_embeddings

STABILITY_SECONDS = 15.0


def run_seed(seed: int, n_boot: int = 100) -> Dict[str, float]:
    """Reduce one planted pool.

    Returns:
        initial/final NMI, duplicate catch rate and runtime in seconds
    """
    data = planted_embeddings(k=4, m=15, dims=256, r=0.6, duplicates=0.1, bridges=2, seed=seed)
    start = time.perf_counter()
    result = run_reduction(data.pool, data.embeddings, opts=PipelineOptions(n_boot=n_boot, seed=seed))
    elapsed = time.perf_counter() - start

    removed = {i for d in result.UVA.redundant_pairs for i in d.removed} if result.UVA else set()
    caught = sum(1 for orig, copy in data.duplicates if orig in removed or copy in removed)
    return {
        "seed": seed,
        "initial_NMI": result.initial_NMI or 0.0,
        "final_NMI": result.final_NMI or 0.0,
        "duplicates": len(data.duplicates),
        "caught": caught,
        "seconds": elapsed,
    }


def time_stability(n_boot: int = 100) -> float:
    """Seconds for stability pruning of 13 items (two blocks of 6 plus a bridge), glasso."""
    data = planted_embeddings(k=2, m=6, dims=256, r=0.6, bridges=1, seed=0)
    run_ega(data.embeddings, "glasso")  # compile the solver outside the timing
    start = time.perf_counter()
    stability_reduce(data.pool, data.embeddings, "glasso", n=n_boot, seed=0)
    return time.perf_counter() - start


def print_results(runs: List[Dict[str, float]], stability_seconds: float) -> bool:
    """Print the per-seed table and the verdict; True when every target is met."""
    print(f"{'Seed':<6} {'Initial NMI':>12} {'Final NMI':>12} {'Dups caught':>12} {'Time (s)':>10}")
    print("-" * 56)
    for r in runs:
        print(
            f"{r['seed']:<6} {r['initial_NMI']:>12.2f} {r['final_NMI']:>12.2f} "
            f"{r['caught']:>6}/{r['duplicates']:<5} {r['seconds']:>10.2f}"
        )

    improved = sum(1 for r in runs if r["final_NMI"] >= r["initial_NMI"])
    mean_final = statistics.mean(r["final_NMI"] for r in runs)
    planted = sum(r["duplicates"] for r in runs)
    catch_rate = sum(r["caught"] for r in runs) / planted if planted else 1.0
    slowest = max(r["seconds"] for r in runs)

    checks = [
        (f"final >= initial in {improved}/{len(runs)} runs", improved >= 0.9 * len(runs)),
        (f"mean final NMI {mean_final:.2f}%", mean_final >= 95.0),
        (f"duplicate catch rate {catch_rate:.1%}", catch_rate >= 0.8),
        (f"slowest run {slowest:.1f}s", slowest < 60.0),
        (
            f"stability pruning, 13 items x 100 replicates: {stability_seconds:.1f}s",
            stability_seconds < STABILITY_SECONDS,
        ),
    ]
    print()
    for label, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}: {label}")
    return all(ok for _, ok in checks)


def main():
    seeds = range(20)
    print("=" * 56)
    print("netscale: planted-pool pipeline benchmark")
    print("=" * 56)
    print()

    runs = []
    for seed in seeds:
        runs.append(run_seed(seed))
        print(f"  seed {seed}: {runs[-1]['seconds']:.1f}s")
    stability_seconds = time_stability()
    print(f"  stability pruning: {stability_seconds:.1f}s")
    print()
    passed = print_results(runs, stability_seconds)

    out = Path(__file__).parent / "pipeline_results.json"
    out.write_text(
        json.dumps({"runs": runs, "stability_seconds": stability_seconds, "passed": passed}, indent=2),
        encoding="utf-8",
    )
    print(f"\nResults saved to: {out}")
    return 0 if passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
