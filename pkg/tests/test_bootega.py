"""Tests for parametric replicates, label alignment and stability pruning."""

import numpy as np
import pytest

from netscale.core.errors import InputError
from netscale.core.types import EmbeddingMatrix, Item, ItemPool, Partition
from netscale.reduction import bootega
from netscale.reduction.bootega import (
    BootResult,
    align_labels,
    item_stability,
    parametric_replicates,
    run_boot,
    stability_reduce,
)
from netscale.synthetic import orthogonal_blocks, planted_embeddings


def mirrored_bridge(m=6, half=128, r=0.6, seed=0):
    """Two blocks that are mirror images of each other plus one bridge item.

    Block B items are block A items with their two halves swapped and the
    bridge repeats one vector in both halves, so the bridge correlates
    equally with both blocks.
    """
    rng = np.random.default_rng(seed)
    factor = rng.standard_normal(half)
    columns_a = []
    for _ in range(m):
        signal = np.sqrt(r) * factor + np.sqrt(1.0 - r) * rng.standard_normal(half)
        columns_a.append(np.concatenate([signal, 0.3 * rng.standard_normal(half)]))
    columns_b = [np.concatenate([c[half:], c[:half]]) for c in columns_a]
    z = np.sqrt(r) * factor + np.sqrt(1.0 - r) * rng.standard_normal(half)
    columns = columns_a + columns_b + [np.concatenate([z, z])]
    items = [
        Item(str(k + 1), f"statement {k + 1}", "attr_1" if k < m else "attr_2", "construct")
        for k in range(2 * m)
    ]
    items.append(Item(str(2 * m + 1), "bridge statement", "attr_1", "construct"))
    pool = ItemPool(items)
    return pool, EmbeddingMatrix(np.column_stack(columns), pool.ids)


class TestReplicates:
    """Test lazily drawn MVN replicates."""

    def test_shape_and_ids(self, two_block):
        reps = parametric_replicates(two_block.embeddings, n=3, seed=1)
        assert len(reps) == 3
        assert reps[0].values.shape == two_block.embeddings.values.shape
        assert reps[2].item_ids == two_block.embeddings.item_ids

    def test_each_replicate_reproducible_alone(self, two_block):
        a = parametric_replicates(two_block.embeddings, n=5, seed=9)
        b = parametric_replicates(two_block.embeddings, n=5, seed=9)
        assert np.array_equal(a[4].values, b[4].values)
        assert not np.array_equal(a[3].values, a[4].values)

    def test_preserves_correlation_structure(self):
        data = planted_embeddings(k=2, m=4, dims=256, r=0.9, seed=6)
        emp = np.corrcoef(data.embeddings.values, rowvar=False)
        reps = parametric_replicates(data.embeddings, n=100, seed=0)
        mean = np.mean([np.corrcoef(rep.values, rowvar=False) for rep in reps], axis=0)
        assert np.abs(mean - emp).max() < 0.05
        within = mean[:4, :4][~np.eye(4, dtype=bool)]
        assert np.abs(within - 0.9).max() < 0.05

    def test_needs_a_replicate(self, two_block):
        with pytest.raises(InputError):
            parametric_replicates(two_block.embeddings, n=0)


class TestAlignment:
    """Test Hungarian alignment of replicate communities."""

    def test_permutations_undone(self):
        rng = np.random.default_rng(0)
        ids = [str(i) for i in range(12)]
        empirical = Partition(ids, [1] * 4 + [2] * 4 + [3] * 4)
        replicates = []
        for _ in range(100):
            perm = rng.permutation([10, 20, 30])
            labels = [perm[label - 1] for label in empirical.labels]
            order = rng.permutation(12)
            replicates.append(Partition([ids[k] for k in order], [labels[k] for k in order]))
        assert set(item_stability(empirical, replicates).values()) == {1.0}

    def test_split_community_gets_fresh_label(self):
        ids = list("abcdef")
        empirical = Partition(ids, [1, 1, 1, 2, 2, 2])
        replicate = Partition(ids, [1, 1, 3, 2, 2, 2])
        aligned = align_labels(empirical, replicate)
        assert aligned["a"] == aligned["b"] == 1
        assert aligned["c"] == 3
        assert aligned["d"] == 2

    def test_stability_fraction(self):
        ids = list("abcd")
        empirical = Partition(ids, [1, 1, 2, 2])
        replicates = [Partition(ids, [1, 1, 2, 2]), Partition(ids, [1, 2, 2, 2])]
        stab = item_stability(empirical, replicates)
        assert stab == {"a": 1.0, "b": 0.5, "c": 1.0, "d": 1.0}

    def test_replicate_must_cover_same_items(self):
        with pytest.raises(InputError):
            item_stability(Partition(["a", "b"], [1, 2]), [Partition(["a", "c"], [1, 2])])


class TestRunBoot:
    """Test bootstrap EGA summaries."""

    def test_clean_structure_is_stable(self, orthogonal):
        boot = run_boot(orthogonal.embeddings, "glasso", n=20, seed=4)
        assert boot.n_replicates == 20
        assert sum(boot.dimension_frequency.values()) == pytest.approx(1.0)
        assert min(boot.item_stability.values()) >= 0.7

    def test_parallel_matches_serial(self, two_block):
        serial = run_boot(two_block.embeddings, "tmfg", n=8, seed=2)
        parallel = run_boot(two_block.embeddings, "tmfg", n=8, seed=2, workers=4)
        assert serial.item_stability == parallel.item_stability
        assert serial.dimension_frequency == parallel.dimension_frequency


def fake_boot(stabilities):
    """run_boot stand-in returning fixed stabilities for whatever items remain."""
    calls = []

    def run(emb, method, n, seed, workers=1):
        calls.append(seed)
        ids = list(emb.item_ids)
        return BootResult(
            n_replicates=n,
            dimension_frequency={2: 1.0},
            item_stability={i: stabilities[i] for i in ids},
            replicate_seed_base=seed,
            empirical=Partition(ids, [1] * len(ids)),
        )

    return run, calls


class TestStabilityReduce:
    """Test pruning rules with controlled stabilities."""

    @pytest.fixture
    def data(self):
        return planted_embeddings(k=2, m=4, dims=32, r=0.5, seed=0)

    def test_prune_all_below_threshold(self, data, monkeypatch):
        stab = {i: 1.0 for i in data.pool.ids}
        stab.update({"2": 0.5, "6": 0.7})
        run, calls = fake_boot(stab)
        monkeypatch.setattr(bootega, "run_boot", run)
        pool, report = stability_reduce(data.pool, data.embeddings, n=5, seed=3)
        assert "2" not in pool.ids and "6" not in pool.ids
        assert report.n_removed == 2
        assert report.n_iterations == 2
        assert [r.item_id for r in report.items_removed] == ["2", "6"]
        assert len(set(calls)) == 2

    def test_prune_one(self, data, monkeypatch):
        stab = {i: 1.0 for i in data.pool.ids}
        stab.update({"2": 0.5, "6": 0.7})
        run, _ = fake_boot(stab)
        monkeypatch.setattr(bootega, "run_boot", run)
        _, report = stability_reduce(data.pool, data.embeddings, n=5, prune="one")
        assert [(r.iteration, r.item_id) for r in report.items_removed] == [(1, "2"), (2, "6")]
        assert report.n_iterations == 3

    def test_all_unstable_removes_least_stable_only(self, data, monkeypatch):
        stab = {i: 0.5 for i in data.pool.ids}
        stab["3"] = 0.1
        run, _ = fake_boot(stab)
        monkeypatch.setattr(bootega, "run_boot", run)
        pool, report = stability_reduce(data.pool, data.embeddings, n=5, min_pool=7)
        assert report.items_removed[0].item_id == "3"
        assert report.truncated
        assert len(pool) == 7

    def test_floor_stops_pruning(self, data, monkeypatch):
        stab = {i: 1.0 for i in data.pool.ids}
        stab.update({"1": 0.2, "2": 0.2, "3": 0.2, "4": 0.2, "5": 0.2})
        run, _ = fake_boot(stab)
        monkeypatch.setattr(bootega, "run_boot", run)
        pool, report = stability_reduce(data.pool, data.embeddings, n=5)
        assert report.truncated
        assert report.n_removed == 0
        assert len(pool) == 8

    def test_unknown_prune_mode(self, data):
        with pytest.raises(InputError):
            stability_reduce(data.pool, data.embeddings, prune="half")


class TestStabilityReduceOnData:
    """Test pruning on embeddings with known stable and unstable items."""

    def test_bridge_item_removed_first(self):
        pool, emb = mirrored_bridge(seed=1)
        reduced, report = stability_reduce(pool, emb, "tmfg", n=30, seed=5)
        assert [(r.iteration, r.item_id) for r in report.items_removed] == [(1, "13")]
        assert report.initial_boot.item_stability["13"] < 0.75
        assert reduced.ids == [str(k) for k in range(1, 13)]
        assert report.statements["13"] == "bridge statement"

    def test_stable_blocks_keep_every_item(self):
        data = orthogonal_blocks(k=2, m=5, dims=256, rho=0.6, seed=3)
        reduced, report = stability_reduce(data.pool, data.embeddings, "glasso", n=20, seed=2)
        assert report.n_removed == 0
        assert report.n_iterations == 1
        assert reduced.ids == data.pool.ids
        assert min(report.final_boot.item_stability.values()) >= 0.75

    def test_zero_threshold_removes_nothing(self):
        pool, emb = mirrored_bridge(seed=1)
        reduced, report = stability_reduce(pool, emb, "tmfg", threshold=0.0, n=10, seed=5)
        assert report.n_removed == 0
        assert report.n_iterations == 1
        assert len(reduced) == 13
