import json

import numpy as np
import pytest

from trap2.graph import (
    Graph,
    bfs_hops,
    induced_submatrix,
    load_graph,
    reachability,
    reachable_row,
    save_graph,
)


def bfs_reachability_oracle(A, k):
    """Plain BFS truncated at depth k, node by node. Independent of the
    matrix-power implementation under test."""
    n = A.shape[0]
    R = np.zeros((n, n), dtype=np.int8)
    for s in range(n):
        dist = {s: 0}
        frontier = [s]
        for depth in range(1, k + 1):
            nxt = []
            for u in frontier:
                for v in range(n):
                    if A[u, v] and v not in dist:
                        dist[v] = depth
                        nxt.append(v)
            frontier = nxt
        for v in dist:
            R[s, v] = 1
    return R


def random_graph(rng, n, p=0.15):
    A = (rng.random((n, n)) < p).astype(np.int8)
    A = np.triu(A, 1)
    return A + A.T


def path_graph(n):
    A = np.zeros((n, n), dtype=np.int8)
    for i in range(n - 1):
        A[i, i + 1] = A[i + 1, i] = 1
    return A


class TestReachability:
    def test_path_one_hop(self):
        A = path_graph(3)
        assert reachability(A, 1)[0].tolist() == [1, 1, 0]

    def test_path_two_hops(self):
        A = path_graph(3)
        assert reachability(A, 2)[0].tolist() == bfs_reachability_oracle(A, 2)[0].tolist() == [1, 1, 1]

    def test_empty_graph_is_identity(self):
        A = np.zeros((4, 4), dtype=np.int8)
        for k in (1, 2, 5):
            assert np.array_equal(reachability(A, k), np.eye(4, dtype=np.int8))

    def test_matches_bfs_oracle_on_random_graphs(self):
        rng = np.random.default_rng(1234)
        for trial in range(200):
            n = int(rng.integers(2, 51))
            A = random_graph(rng, n)
            k = int(rng.integers(1, 5))
            assert np.array_equal(reachability(A, k), bfs_reachability_oracle(A, k)), (
                f"trial {trial}: n={n}, k={k}"
            )

    def test_monotone_in_k(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            A = random_graph(rng, int(rng.integers(2, 40)))
            prev = reachability(A, 1)
            for k in range(2, 5):
                cur = reachability(A, k)
                assert (cur >= prev).all()
                prev = cur

    def test_rejects_bad_inputs(self):
        A = path_graph(3)
        with pytest.raises(ValueError):
            reachability(A, 0)
        with pytest.raises(ValueError):
            reachability(A * 2, 1)

    def test_reachable_row_matches_matrix(self):
        rng = np.random.default_rng(99)
        for _ in range(30):
            n = int(rng.integers(2, 40))
            A = random_graph(rng, n)
            k = int(rng.integers(1, 5))
            s = int(rng.integers(n))
            assert np.array_equal(reachable_row(A, s, k), reachability(A, k)[s])

    def test_bfs_hops_distances(self):
        A = path_graph(5)
        assert bfs_hops(A, 0).tolist() == [0, 1, 2, 3, 4]
        assert bfs_hops(A, 0, k=2).tolist() == [0, 1, 2, -1, -1]


class TestInducedSubmatrix:
    def test_full_list_is_identity(self):
        rng = np.random.default_rng(3)
        A = random_graph(rng, 8)
        assert np.array_equal(induced_submatrix(A, np.arange(8)), A)

    def test_singleton(self):
        A = path_graph(3)
        assert induced_submatrix(A, [1]).tolist() == [[0]]

    def test_triangle_pair(self):
        A = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=np.int8)
        sub = induced_submatrix(A, [0, 2])
        assert sub.tolist() == [[0, 1], [1, 0]]

    def test_ordering_is_preserved(self):
        rng = np.random.default_rng(5)
        A = random_graph(rng, 12)
        nodes = np.array([7, 2, 9, 0])
        sub = induced_submatrix(A, nodes)
        for p, u in enumerate(nodes):
            for q, v in enumerate(nodes):
                assert sub[p, q] == A[u, v]

    def test_rejects_duplicates_and_out_of_range(self):
        A = path_graph(4)
        with pytest.raises(ValueError):
            induced_submatrix(A, [0, 0])
        with pytest.raises(ValueError):
            induced_submatrix(A, [0, 4])
        with pytest.raises(ValueError):
            induced_submatrix(A, [-1])


class TestGraphType:
    def test_validates_binary_entries(self):
        with pytest.raises(ValueError):
            Graph(n=2, A=np.array([[0, 2], [2, 0]]), X=np.ones((2, 1)))

    def test_validates_zero_diagonal(self):
        with pytest.raises(ValueError):
            Graph(n=2, A=np.array([[1, 0], [0, 0]]), X=np.ones((2, 1)))

    def test_validates_symmetry_when_undirected(self):
        with pytest.raises(ValueError):
            Graph(n=2, A=np.array([[0, 1], [0, 0]]), X=np.ones((2, 1)))
        Graph(n=2, A=np.array([[0, 1], [0, 0]]), X=np.ones((2, 1)), directed=True)

    def test_validates_feature_rows(self):
        with pytest.raises(ValueError):
            Graph(n=3, A=np.zeros((3, 3)), X=np.ones((2, 2)))

    def test_arrays_are_frozen(self):
        g = Graph(n=2, A=np.array([[0, 1], [1, 0]]), X=np.ones((2, 2)))
        with pytest.raises(ValueError):
            g.A[0, 1] = 0
        with pytest.raises(ValueError):
            g.X[0, 0] = 3.0


class TestGraphIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(11)
        A = random_graph(rng, 9)
        g = Graph(
            n=9,
            A=A,
            X=rng.standard_normal((9, 3)),
            node_labels=rng.integers(0, 3, size=9),
            motif_of=np.array([-1, -1, -1, 0, 0, 0, 1, 1, 1]),
        )
        path = tmp_path / "g.json"
        save_graph(g, path)
        g2 = load_graph(path)
        assert g2.n == g.n and g2.directed == g.directed
        assert np.array_equal(g2.A, g.A)
        assert np.array_equal(g2.X, g.X)
        assert np.array_equal(g2.node_labels, g.node_labels)
        assert np.array_equal(g2.motif_of, g.motif_of)
        assert g2.graph_label is None

    def test_save_then_save_is_byte_identical(self, tmp_path):
        g = Graph(n=2, A=np.array([[0, 1], [1, 0]]), X=np.ones((2, 2)))
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_graph(g, p1)
        save_graph(load_graph(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_feature_row_mismatch(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "n": 4, "directed": False, "edges": [[0, 1]],
            "features": [[1.0]] * 3, "node_labels": None,
            "graph_label": None, "motif_of": None,
        }))
        with pytest.raises(ValueError, match="rows"):
            load_graph(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="malformed"):
            load_graph(path)

    def test_edge_out_of_range(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "n": 2, "directed": False, "edges": [[0, 5]],
            "features": [[1.0], [1.0]],
        }))
        with pytest.raises(ValueError, match="out of range"):
            load_graph(path)

    def test_self_loop_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "n": 2, "directed": False, "edges": [[1, 1]],
            "features": [[1.0], [1.0]],
        }))
        with pytest.raises(ValueError, match="self-loop"):
            load_graph(path)
