import numpy as np
import pytest

from trap2.datasets import DatasetSpec, generate, ground_truth_motif
from trap2.graph import bfs_hops, save_graph


class TestGeneration:
    def test_ba_shapes_counts(self):
        g = generate(DatasetSpec("ba-shapes", seed=7))
        assert g.n == 300 + 80 * 5 == 700
        assert int(g.node_labels.max()) + 1 == 4
        assert (g.motif_of >= 0).sum() == 400

    def test_tree_cycle_counts(self):
        # depth-8 balanced binary tree: 2^9 - 1 = 511 nodes, plus 80 six-node cycles
        g = generate(DatasetSpec("tree-cycle", seed=1))
        assert g.n == 511 + 80 * 6 == 991
        assert int(g.node_labels.max()) + 1 == 2

    def test_tree_grid_counts(self):
        g = generate(DatasetSpec("tree-grid", seed=1))
        assert g.n == 511 + 80 * 9 == 1231
        assert int(g.node_labels.max()) + 1 == 2

    def test_ba_community_structure(self):
        g = generate(DatasetSpec("ba-community", seed=3))
        assert int(g.node_labels.max()) + 1 == 8
        half = g.n // 2
        # half the motifs land in each community
        assert (g.motif_of[:half] >= 0).sum() == (g.motif_of[half:] >= 0).sum()
        # community-signed Gaussian features
        assert g.X[:half].mean() > 0.5
        assert g.X[half:].mean() < -0.5

    def test_same_seed_is_byte_identical(self, tmp_path):
        for kind in ("ba-shapes", "ba-community", "tree-cycle", "tree-grid"):
            p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
            save_graph(generate(DatasetSpec(kind, seed=13)), p1)
            save_graph(generate(DatasetSpec(kind, seed=13)), p2)
            assert p1.read_bytes() == p2.read_bytes(), kind

    def test_different_seeds_differ(self):
        g1 = generate(DatasetSpec("ba-shapes", seed=1))
        g2 = generate(DatasetSpec("ba-shapes", seed=2))
        assert not np.array_equal(g1.A, g2.A)

    def test_connected(self):
        for kind in ("ba-shapes", "ba-community", "tree-cycle", "tree-grid"):
            g = generate(DatasetSpec(kind, seed=5))
            assert (bfs_hops(g.A, 0) >= 0).all(), kind

    def test_every_motif_attached_to_base(self):
        g = generate(DatasetSpec("tree-cycle", seed=5))
        base = np.flatnonzero(g.motif_of < 0)
        for inst in range(80):
            members = np.flatnonzero(g.motif_of == inst)
            assert g.A[np.ix_(members, base)].sum() >= 1

    def test_class_balance_per_motif(self):
        g = generate(DatasetSpec("ba-shapes", seed=9))
        counts = []
        for inst in range(80):
            members = np.flatnonzero(g.motif_of == inst)
            counts.append(tuple(sorted(g.node_labels[members].tolist())))
        assert len(set(counts)) == 1
        assert counts[0] == (1, 2, 2, 3, 3)

    def test_constant_features_for_structural_kinds(self):
        for kind in ("ba-shapes", "tree-cycle", "tree-grid"):
            g = generate(DatasetSpec(kind, seed=2))
            assert (g.X == 1.0).all()
            assert g.d == 10

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown dataset kind"):
            DatasetSpec("ba-houses")

    def test_custom_sizes(self):
        g = generate(DatasetSpec("tree-cycle", seed=0, tree_depth=5, motif_count=10))
        assert g.n == 63 + 60


class TestGroundTruth:
    def test_house_members(self):
        g = generate(DatasetSpec("ba-shapes", seed=7))
        node = int(np.flatnonzero(g.motif_of == 3)[1])
        members = ground_truth_motif(g, node)
        assert members.size == 5
        assert np.array_equal(members, np.flatnonzero(g.motif_of == 3))

    def test_cycle_and_grid_sizes(self):
        g = generate(DatasetSpec("tree-cycle", seed=7))
        node = int(np.flatnonzero(g.motif_of >= 0)[0])
        assert ground_truth_motif(g, node).size == 6
        g = generate(DatasetSpec("tree-grid", seed=7))
        node = int(np.flatnonzero(g.motif_of >= 0)[0])
        assert ground_truth_motif(g, node).size == 9

    def test_base_node_rejected(self):
        g = generate(DatasetSpec("ba-shapes", seed=7))
        with pytest.raises(ValueError, match="base-graph node"):
            ground_truth_motif(g, 0)

    def test_graph_without_ground_truth(self):
        from trap2.graph import Graph
        g = Graph(n=2, A=np.array([[0, 1], [1, 0]]), X=np.ones((2, 1)))
        with pytest.raises(ValueError, match="no motif ground truth"):
            ground_truth_motif(g, 0)
