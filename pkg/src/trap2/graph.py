"""Dense graph container, k-hop reachability, and submatrix extraction.

Every other module works on the :class:`Graph` type defined here. Graphs are
small (at most a few thousand nodes), so adjacency is kept as a dense binary
matrix and all values are frozen after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Graph",
    "reachability",
    "induced_submatrix",
    "load_graph",
    "save_graph",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Graph:
    """An attributed graph: binary adjacency, node features, optional labels.

    Attributes
    ----------
    n : number of nodes.
    A : (n, n) adjacency with entries in {0, 1} and a zero diagonal;
        symmetric when ``directed`` is False.
    X : (n, d) float feature matrix, d >= 1.
    node_labels : optional (n,) int class per node.
    graph_label : optional int class for the whole graph.
    motif_of : optional (n,) int; id of the planted motif instance a node
        belongs to, or -1 for base-graph nodes.
    directed : edge orientation flag (the benchmarks only use undirected).
    """

    n: int
    A: np.ndarray
    X: np.ndarray
    node_labels: np.ndarray | None = None
    graph_label: int | None = None
    motif_of: np.ndarray | None = None
    directed: bool = False

    def __post_init__(self) -> None:
        A = np.ascontiguousarray(self.A, dtype=np.int8)
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        if A.shape != (self.n, self.n):
            raise ValueError(f"adjacency shape {A.shape} does not match n={self.n}")
        if not np.isin(A, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if np.trace(A) != 0:
            raise ValueError("adjacency diagonal must be zero (no self-loops)")
        if not self.directed and not np.array_equal(A, A.T):
            raise ValueError("undirected graph requires a symmetric adjacency")
        if X.ndim != 2 or X.shape[0] != self.n:
            raise ValueError(f"feature matrix must have {self.n} rows, got {X.shape}")
        if X.shape[1] < 1:
            raise ValueError("feature dimension must be at least 1")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "X", _freeze(X))
        for name in ("node_labels", "motif_of"):
            v = getattr(self, name)
            if v is not None:
                v = np.ascontiguousarray(v, dtype=np.int64)
                if v.shape != (self.n,):
                    raise ValueError(f"{name} must have shape ({self.n},)")
                object.__setattr__(self, name, _freeze(v))

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def num_edges(self) -> int:
        m = int(self.A.sum())
        return m if self.directed else m // 2


def reachability(A: np.ndarray, k: int) -> np.ndarray:
    """Binary matrix whose (i, j) entry is 1 iff j is within k hops of i.

    A node always reaches itself (hop 0), so the diagonal is all ones.
    """
    if k < 1:
        raise ValueError(f"hop bound must be >= 1, got {k}")
    A = np.asarray(A)
    if not np.isin(A, (0, 1)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    # (A | I)^k > 0 computed by repeated squaring-free products; graphs here
    # are small enough that float matmul is the fastest exact route.
    B = (A.astype(np.float32) + np.eye(A.shape[0], dtype=np.float32)) > 0
    B = B.astype(np.float32)
    R = B
    for _ in range(k - 1):
        R = (R @ B) > 0
        R = R.astype(np.float32)
    return (R > 0).astype(np.int8)


def reachable_row(A: np.ndarray, source: int, k: int) -> np.ndarray:
    """Row of :func:`reachability` for one source node, via truncated BFS."""
    n = A.shape[0]
    mask = np.zeros(n, dtype=np.int8)
    mask[source] = 1
    frontier = np.zeros(n, dtype=bool)
    frontier[source] = True
    Ab = np.asarray(A, dtype=bool)
    for _ in range(k):
        frontier = Ab[frontier].any(axis=0) & (mask == 0)
        if not frontier.any():
            break
        mask[frontier] = 1
    return mask


def bfs_hops(A: np.ndarray, source: int, k: int | None = None) -> np.ndarray:
    """BFS distance from ``source`` to every node; -1 beyond ``k`` (or unreachable)."""
    n = A.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    Ab = np.asarray(A, dtype=bool)
    frontier = np.zeros(n, dtype=bool)
    frontier[source] = True
    hop = 0
    while frontier.any() and (k is None or hop < k):
        hop += 1
        frontier = Ab[frontier].any(axis=0) & (dist < 0)
        dist[frontier] = hop
    return dist


def induced_submatrix(A: np.ndarray, nodes) -> np.ndarray:
    """Adjacency over ``nodes`` in the given order: entry (p, q) = A[nodes[p], nodes[q]]."""
    nodes = np.asarray(nodes, dtype=np.int64)
    n = A.shape[0]
    if nodes.size != np.unique(nodes).size:
        raise ValueError("node list contains duplicates")
    if nodes.size and (nodes.min() < 0 or nodes.max() >= n):
        raise ValueError("node index out of range")
    return np.ascontiguousarray(A[np.ix_(nodes, nodes)])


def save_graph(g: Graph, path: str | Path) -> None:
    """Write a graph as JSON (see :func:`load_graph` for the schema)."""
    if g.directed:
        us, vs = np.nonzero(g.A)
    else:
        us, vs = np.nonzero(np.triu(g.A))
    payload = {
        "n": g.n,
        "directed": g.directed,
        "edges": [[int(u), int(v)] for u, v in zip(us, vs)],
        "features": g.X.tolist(),
        "node_labels": None if g.node_labels is None else g.node_labels.tolist(),
        "graph_label": g.graph_label,
        "motif_of": None if g.motif_of is None else g.motif_of.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True))


def load_graph(path: str | Path) -> Graph:
    """Load a graph from its JSON form.

    Schema: ``{"n": int, "directed": bool, "edges": [[u, v], ...],
    "features": [[float, ...], ...], "node_labels": [int, ...] | null,
    "graph_label": int | null, "motif_of": [int, ...] | null}``.
    The edge list implies symmetric adjacency entries when directed is false;
    ``motif_of`` uses -1 for base-graph nodes.
    """
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed graph file {path}: {exc}") from exc
    try:
        n = int(payload["n"])
        directed = bool(payload["directed"])
        edges = payload["edges"]
        features = payload["features"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"graph file {path} is missing required fields") from exc
    A = np.zeros((n, n), dtype=np.int8)
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise ValueError(f"self-loop on node {u} is not allowed")
        A[u, v] = 1
        if not directed:
            A[v, u] = 1
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != n:
        raise ValueError(
            f"feature matrix must have {n} rows, got shape {X.shape}"
        )
    labels = payload.get("node_labels")
    motif = payload.get("motif_of")
    return Graph(
        n=n,
        A=A,
        X=X,
        node_labels=None if labels is None else np.asarray(labels, dtype=np.int64),
        graph_label=payload.get("graph_label"),
        motif_of=None if motif is None else np.asarray(motif, dtype=np.int64),
        directed=directed,
    )
