"""Tests for walktrap community detection, NMI and EGA."""

import itertools

import networkx as nx
import numpy as np
import pytest

from netscale.core.errors import InputError
from netscale.core.types import Network, NetworkMethod, Partition
from netscale.network.community import nmi, walktrap, walktrap_levels
from netscale.network.ega import estimate_network, run_ega


def block_network(sizes, within=0.5, between=0.02):
    p = sum(sizes)
    w = np.full((p, p), between)
    start = 0
    for size in sizes:
        w[start:start + size, start:start + size] = within
        start += size
    np.fill_diagonal(w, 0.0)
    return Network(w, [str(i + 1) for i in range(p)], NetworkMethod.GLASSO)


def noisy_two_block(seed):
    """12 nodes in two blocks of 6; some between-block weights are exactly zero."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.0, 0.08, size=(12, 12))
    w[rng.random((12, 12)) < 0.3] = 0.0
    w[:6, :6] = rng.uniform(0.3, 0.6, size=(6, 6))
    w[6:, 6:] = rng.uniform(0.3, 0.6, size=(6, 6))
    w = np.triu(w, k=1)
    w = w + w.T
    return Network(w, [str(i + 1) for i in range(12)], NetworkMethod.GLASSO)


def weighted_graph(net):
    graph = nx.Graph()
    graph.add_nodes_from(range(net.p))
    rows, cols = np.nonzero(np.triu(net.weights, k=1))
    graph.add_weighted_edges_from((int(i), int(j), abs(float(net.weights[i, j]))) for i, j in zip(rows, cols))
    return graph


def contingency_nmi(a, b):
    """Direct evaluation from the contingency table, arithmetic normalization."""
    n = len(a)
    la, lb = sorted(set(a)), sorted(set(b))
    table = np.array([[sum(1 for x, y in zip(a, b) if x == i and y == j) for j in lb] for i in la])
    pa, pb = table.sum(axis=1) / n, table.sum(axis=0) / n
    mi = 0.0
    for i in range(len(la)):
        for j in range(len(lb)):
            if table[i, j]:
                pij = table[i, j] / n
                mi += pij * np.log(pij / (pa[i] * pb[j]))
    ha = -np.sum(pa * np.log(pa))
    hb = -np.sum(pb * np.log(pb))
    return 100.0 * mi / ((ha + hb) / 2.0)


class TestWalktrap:
    """Test community recovery and dendrogram cutting."""

    def test_recovers_blocks(self):
        partition = walktrap(block_network([4, 5, 3]))
        assert partition.labels == (1,) * 4 + (2,) * 5 + (3,) * 3

    def test_levels_end_in_one_community(self):
        levels = walktrap_levels(block_network([3, 3]))
        assert len(levels) == 6
        assert len(set(levels[0][0])) == 6
        assert len(set(levels[-1][0])) == 1

    def test_empty_network_gives_singletons(self):
        net = Network(np.zeros((3, 3)), ["a", "b", "c"], NetworkMethod.GLASSO)
        assert walktrap(net).n_communities == 3

    def test_isolated_vertex_stays_alone(self):
        net = block_network([4, 4])
        w = net.weights.copy()
        w = np.pad(w, ((0, 1), (0, 1)))
        net = Network(w, [str(i + 1) for i in range(9)], NetworkMethod.GLASSO)
        partition = walktrap(net)
        assert partition.n_communities == 3
        assert partition.label_of("9") == 3

    def test_negative_weights_use_magnitude(self):
        net = block_network([4, 4])
        flipped = Network(-net.weights, net.item_ids, net.method)
        assert walktrap(flipped) == walktrap(net)

    def test_invalid_steps(self):
        with pytest.raises(InputError):
            walktrap(block_network([3, 3]), steps=0)

    def test_level_modularity_matches_networkx(self):
        net = noisy_two_block(seed=5)
        graph = weighted_graph(net)
        for membership, q in walktrap_levels(net):
            groups = {}
            for node, label in enumerate(membership):
                groups.setdefault(label, set()).add(node)
            expected = nx.community.modularity(graph, groups.values(), weight="weight")
            assert q == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_best_bipartition(self, seed):
        net = noisy_two_block(seed=seed)
        graph = weighted_graph(net)
        best, best_q = None, -np.inf
        # Node 0 is fixed on side A so each split is scored once
        for side in itertools.product([0, 1], repeat=11):
            labels = (0,) + side
            if len(set(labels)) < 2:
                continue
            groups = [{i for i, x in enumerate(labels) if x == g} for g in (0, 1)]
            q = nx.community.modularity(graph, groups, weight="weight")
            if q > best_q:
                best, best_q = labels, q
        partition = walktrap(net)
        expected = Partition(net.item_ids, [label + 1 for label in best])
        assert partition == expected
        assert partition.labels == (1,) * 6 + (2,) * 6


class TestNmi:
    """Test NMI against a direct contingency-table evaluation."""

    def test_matches_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(2, 13))
            a = rng.integers(0, 4, size=n).tolist()
            b = rng.integers(0, 4, size=n).tolist()
            ids = [str(i) for i in range(n)]
            score = nmi(Partition(ids, a), Partition(ids, b)).value
            if len(set(a)) == 1 or len(set(b)) == 1:
                expected = 100.0 if len(set(a)) == len(set(b)) == 1 else 0.0
            else:
                expected = contingency_nmi(a, b)
            assert score == pytest.approx(expected, abs=1e-9)

    def test_identical_partitions(self):
        ids = list("abcdef")
        p = Partition(ids, [1, 1, 2, 2, 3, 3])
        assert nmi(p, Partition(ids, [9, 9, 4, 4, 0, 0])).value == pytest.approx(100.0)
        assert str(nmi(p, p)) == "100.00%"

    def test_alignment_by_id(self):
        a = Partition(["a", "b", "c", "d"], [1, 1, 2, 2])
        b = Partition(["d", "c", "b", "a"], [5, 5, 6, 6])
        assert nmi(a, b).value == pytest.approx(100.0)

    def test_single_community_rules(self):
        ids = ["a", "b", "c"]
        one = Partition(ids, [1, 1, 1])
        assert nmi(one, one).value == 100.0
        assert nmi(one, Partition(ids, [1, 2, 2])).value == 0.0

    def test_different_items(self):
        with pytest.raises(InputError):
            nmi(Partition(["a", "b"], [1, 2]), Partition(["a", "c"], [1, 2]))


class TestEga:
    """Test network estimation plus community detection on planted data."""

    @pytest.mark.parametrize("method", ["glasso", "tmfg"])
    def test_planted_attributes_recovered(self, two_block, method):
        pool = two_block.pool
        truth = Partition(pool.ids, pool.labels("attribute"))
        result = run_ega(two_block.embeddings, method, truth)
        assert result.method is NetworkMethod(method)
        assert result.nmi.value == pytest.approx(100.0)
        assert result.n_communities == 2

    def test_glasso_uses_dimensions_as_observations(self, two_block):
        net = estimate_network(two_block.embeddings, NetworkMethod.GLASSO)
        assert net.metadata["n_obs"] == two_block.embeddings.n_dims

    def test_without_truth(self, two_block):
        result = run_ega(two_block.embeddings, "glasso")
        assert result.nmi is None
        assert result.to_dict()["NMI"] is None
