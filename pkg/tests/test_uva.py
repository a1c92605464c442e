"""Tests for weighted topological overlap and redundancy removal."""

import numpy as np
import pytest

from netscale.core.errors import InputError
from netscale.core.types import EmbeddingMatrix, Item, ItemPool, Network, NetworkMethod
from netscale.reduction.uva import keep_rule, redundancy_clusters, uva_reduce, wto_matrix
from netscale.synthetic import planted_embeddings


def direct_wto(w):
    a = np.abs(w)
    p = a.shape[0]
    k = [sum(a[i, u] for u in range(p) if u != i) for i in range(p)]
    out = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            if i == j:
                continue
            shared = sum(a[i, u] * a[u, j] for u in range(p) if u not in (i, j))
            out[i, j] = (shared + a[i, j]) / (min(k[i], k[j]) + 1.0 - a[i, j])
    return out


class TestWto:
    """Test wTO against direct formula evaluation."""

    def test_matches_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            w = rng.uniform(-1.0, 1.0, size=(8, 8))
            w[rng.random((8, 8)) < 0.4] = 0.0
            w = np.triu(w, k=1)
            w = w + w.T
            net = Network(w, [str(i) for i in range(8)], NetworkMethod.GLASSO)
            assert np.allclose(wto_matrix(net), direct_wto(w), atol=1e-12, rtol=0.0)

    def test_bounded_and_symmetric(self):
        rng = np.random.default_rng(1)
        w = np.triu(rng.uniform(0.0, 1.0, size=(6, 6)), k=1)
        omega = wto_matrix(Network(w + w.T, list("abcdef"), NetworkMethod.TMFG))
        assert np.allclose(omega, omega.T)
        assert np.all(np.diag(omega) == 0.0)
        assert np.all((omega >= 0.0) & (omega <= 1.0))


class TestRedundancyClusters:
    """Test clustering and the keep rule."""

    def test_transitive_clusters(self):
        omega = np.zeros((5, 5))
        omega[0, 3] = omega[3, 0] = 0.4
        omega[3, 4] = omega[4, 3] = 0.3
        omega[1, 2] = omega[2, 1] = 0.1
        assert redundancy_clusters(omega, 0.25) == [[0, 3, 4]]

    def test_keep_lowest_mean_overlap(self):
        omega = np.array([
            [0.0, 0.5, 0.2, 0.2],
            [0.5, 0.0, 0.0, 0.0],
            [0.2, 0.0, 0.0, 0.1],
            [0.2, 0.0, 0.1, 0.0],
        ])
        assert keep_rule(omega, [0, 1], ("a", "b", "c", "d")) == 1

    def test_keep_tie_goes_to_smallest_id(self):
        omega = np.zeros((3, 3))
        omega[0, 1] = omega[1, 0] = 0.6
        assert keep_rule(omega, [0, 1], ("b", "a", "c")) == 1


class TestUvaReduce:
    """Test sweeps on planted data."""

    def test_planted_duplicates_removed(self):
        data = planted_embeddings(k=4, m=15, dims=256, r=0.6, duplicates=0.1, bridges=2, seed=5)
        pool, report = uva_reduce(data.pool, data.embeddings, "glasso")
        removed = set(report.removed_ids())
        caught = sum(1 for orig, copy in data.duplicates if orig in removed or copy in removed)
        assert caught >= 0.8 * len(data.duplicates)
        assert len(pool) + report.n_removed == len(data.pool)
        assert report.n_sweeps >= 2

    def test_no_redundancy_no_removal(self, orthogonal):
        pool, report = uva_reduce(orthogonal.pool, orthogonal.embeddings, "glasso")
        assert pool.ids == orthogonal.pool.ids
        assert report.n_removed == 0
        assert report.n_sweeps == 1
        assert not report.truncated

    def test_sweep_below_floor_not_applied(self):
        data = planted_embeddings(k=2, m=4, dims=256, r=0.6, duplicates=1.0, seed=2)
        pool, report = uva_reduce(data.pool, data.embeddings, "glasso", min_pool=10)
        assert report.truncated
        assert report.n_removed == 0
        assert len(pool) == len(data.pool)

    def test_report_serializable(self, two_block):
        _, report = uva_reduce(two_block.pool, two_block.embeddings, "tmfg")
        tree = report.to_dict()
        assert tree["method"] == "tmfg"
        assert tree["n_sweeps"] == report.n_sweeps

    def test_pool_too_small(self, small_pool):
        with pytest.raises(InputError):
            uva_reduce(small_pool, None, "glasso", min_pool=5)

    def test_exact_copy_removed(self):
        data = planted_embeddings(k=2, m=6, dims=256, r=0.6, seed=3)
        first = data.pool.items[0]
        pool = ItemPool(
            list(data.pool.items)
            + [Item("13", "copy of the first statement", first.attribute, first.item_type)]
        )
        values = np.column_stack([data.embeddings.values, data.embeddings.values[:, 0]])
        emb = EmbeddingMatrix(values, pool.ids)
        reduced, report = uva_reduce(pool, emb, "glasso")
        removed = set(report.removed_ids())
        assert len(removed & {"1", "13"}) == 1
        first_sweep = [d for d in report.redundant_pairs if d.sweep == 1]
        assert any({"1", "13"} <= set(d.items) for d in first_sweep)
        assert len(reduced) + report.n_removed == len(pool)
