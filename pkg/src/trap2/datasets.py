"""Seeded generators for the four synthetic motif benchmarks.

Each benchmark plants copies of a small motif (house, cycle, or grid) on a
random base graph and labels nodes by their structural role, so explanation
quality can be scored against exact ground truth. Generation is fully
deterministic for a fixed :class:`DatasetSpec`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = ["DatasetSpec", "DATASET_KINDS", "generate", "ground_truth_motif"]

DATASET_KINDS = ("ba-shapes", "ba-community", "tree-cycle", "tree-grid")

# House: square 0-1-2-3 plus a roof node 4 over the 0-1 side. Nodes 0 and 1
# sit under the roof ("middle"), 2 and 3 are the floor ("bottom").
_HOUSE_EDGES = [(0, 1), (1, 2), (2, 3), (3, 0), (4, 0), (4, 1)]
_HOUSE_ROLES = np.array([2, 2, 3, 3, 1], dtype=np.int64)
_CYCLE_EDGES = [(i, (i + 1) % 6) for i in range(6)]
_GRID_EDGES = [
    (3 * r + c, 3 * r + c + 1) for r in range(3) for c in range(2)
] + [(3 * r + c, 3 * (r + 1) + c) for r in range(2) for c in range(3)]

# where attachment edges leave a motif, and how many are used by default;
# houses anchor on two opposite corners so that every house node keeps the
# base graph inside its 3-hop ball (otherwise the floor nodes see almost
# nothing but their own house), while cycles and grids hang off one edge,
# which keeps their interpretation domains small
_ANCHOR_POSITIONS = {"house": [0, 2], "cycle": [0, 3], "grid": [0, 8]}
_DEFAULT_ANCHORS = {"house": 2, "cycle": 1, "grid": 1}


@dataclass(frozen=True)
class DatasetSpec:
    """Parameters for one synthetic benchmark instance.

    ``base_nodes`` defaults per kind: 300 for the BA kinds, and the full
    balanced binary tree of ``tree_depth`` levels (511 nodes at depth 8) for
    the tree kinds. ``ba_m`` is the preferential-attachment edge count per
    new node; ``noise_edge_fraction`` adds that fraction of the final node
    count as random extra edges. ``motif_count`` is the total number of
    planted motifs in the graph; BA-COMMUNITY splits it across its two
    communities. ``motif_anchors`` is how many attachment edges tie each
    motif to the base (default: 2 for houses, 1 for cycles and grids).
    """

    kind: str
    seed: int = 0
    base_nodes: int | None = None
    motif_count: int = 80
    noise_edge_fraction: float = 0.1
    feature_dim: int = 10
    ba_m: int = 5
    tree_depth: int = 8
    inter_community_edges: int | None = None
    motif_anchors: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in DATASET_KINDS:
            raise ValueError(
                f"unknown dataset kind {self.kind!r}; choose from {DATASET_KINDS}"
            )
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.motif_count < 1:
            raise ValueError("motif_count must be >= 1")
        if self.noise_edge_fraction < 0:
            raise ValueError("noise_edge_fraction must be >= 0")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if self.motif_anchors is not None and self.motif_anchors < 1:
            raise ValueError("motif_anchors must be >= 1")

    @property
    def resolved_base_nodes(self) -> int:
        if self.base_nodes is not None:
            return self.base_nodes
        if self.kind in ("ba-shapes", "ba-community"):
            return 300
        return 2 ** (self.tree_depth + 1) - 1


def _barabasi_albert(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Preferential-attachment edge list: each new node links to m earlier nodes."""
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    edges: list[tuple[int, int]] = []
    repeated: list[int] = []
    targets = list(range(m))
    source = m
    while source < n:
        edges.extend((source, t) for t in targets)
        repeated.extend(targets)
        repeated.extend([source] * m)
        picks: list[int] = []
        while len(picks) < m:
            t = repeated[rng.integers(len(repeated))]
            if t not in picks:
                picks.append(t)
        targets = picks
        source += 1
    return edges


def _balanced_binary_tree(n: int) -> list[tuple[int, int]]:
    edges = []
    for i in range(n):
        if 2 * i + 1 < n:
            edges.append((i, 2 * i + 1))
        if 2 * i + 2 < n:
            edges.append((i, 2 * i + 2))
    return edges


def _motif(kind: str) -> tuple[str, list[tuple[int, int]], np.ndarray]:
    if kind in ("ba-shapes", "ba-community"):
        return "house", _HOUSE_EDGES, _HOUSE_ROLES
    if kind == "tree-cycle":
        return "cycle", _CYCLE_EDGES, np.ones(6, dtype=np.int64)
    return "grid", _GRID_EDGES, np.ones(9, dtype=np.int64)


def _add_noise_edges(A: np.ndarray, count: int, rng: np.random.Generator) -> None:
    n = A.shape[0]
    attempts = 0
    added = 0
    while added < count and attempts < 100 * count:
        u, v = rng.integers(n, size=2)
        attempts += 1
        if u == v or A[u, v]:
            continue
        A[u, v] = A[v, u] = 1
        added += 1


def _build_component(
    spec: DatasetSpec, rng: np.random.Generator, motif_count: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One base graph with motifs attached; returns (A, labels, motif_of)."""
    base_n = spec.resolved_base_nodes
    motif_name, motif_edges, motif_roles = _motif(spec.kind)
    anchor_positions = _ANCHOR_POSITIONS[motif_name]
    n_anchors = spec.motif_anchors
    if n_anchors is None:
        n_anchors = _DEFAULT_ANCHORS[motif_name]
    n_anchors = min(n_anchors, len(anchor_positions))
    motif_size = len(motif_roles)
    n = base_n + motif_count * motif_size

    A = np.zeros((n, n), dtype=np.int8)
    if spec.kind in ("ba-shapes", "ba-community"):
        base_edges = _barabasi_albert(base_n, spec.ba_m, rng)
    else:
        base_edges = _balanced_binary_tree(base_n)
    for u, v in base_edges:
        A[u, v] = A[v, u] = 1

    labels = np.zeros(n, dtype=np.int64)
    motif_of = np.full(n, -1, dtype=np.int64)
    for inst in range(motif_count):
        offset = base_n + inst * motif_size
        for u, v in motif_edges:
            A[offset + u, offset + v] = A[offset + v, offset + u] = 1
        labels[offset : offset + motif_size] = motif_roles
        motif_of[offset : offset + motif_size] = inst
        # each instance hangs off uniformly chosen base nodes
        for pos in anchor_positions[:n_anchors]:
            anchor = int(rng.integers(base_n))
            A[offset + pos, anchor] = A[anchor, offset + pos] = 1

    _add_noise_edges(A, round(spec.noise_edge_fraction * n), rng)
    return A, labels, motif_of


def generate(spec: DatasetSpec) -> Graph:
    """Build the benchmark graph described by ``spec``.

    Node labels encode structural role (0 = base graph; houses use
    1 = top, 2 = middle, 3 = bottom; cycles and grids use 1 = on-motif).
    BA-COMMUNITY duplicates the four house roles per community, giving
    eight classes, and carries community-signed Gaussian features; the
    other kinds carry constant all-ones features.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind != "ba-community":
        A, labels, motif_of = _build_component(spec, rng, spec.motif_count)
        X = np.ones((A.shape[0], spec.feature_dim))
        return Graph(n=A.shape[0], A=A, X=X, node_labels=labels, motif_of=motif_of)

    count1 = spec.motif_count - spec.motif_count // 2
    count2 = spec.motif_count // 2
    A1, labels1, motif1 = _build_component(spec, rng, count1)
    A2, labels2, motif2 = _build_component(spec, rng, count2)
    n1, n2 = A1.shape[0], A2.shape[0]
    n = n1 + n2
    A = np.zeros((n, n), dtype=np.int8)
    A[:n1, :n1] = A1
    A[n1:, n1:] = A2
    labels = np.concatenate([labels1, labels2 + 4])
    motif_of = np.concatenate([motif1, np.where(motif2 >= 0, motif2 + count1, -1)])

    inter = spec.inter_community_edges
    if inter is None:
        inter = max(1, round(0.01 * n))
    added = 0
    while added < inter:
        u = int(rng.integers(n1))
        v = n1 + int(rng.integers(n2))
        if A[u, v]:
            continue
        A[u, v] = A[v, u] = 1
        added += 1

    X = np.empty((n, spec.feature_dim))
    X[:n1] = rng.normal(1.0, 1.0, size=(n1, spec.feature_dim))
    X[n1:] = rng.normal(-1.0, 1.0, size=(n2, spec.feature_dim))
    return Graph(n=n, A=A, X=X, node_labels=labels, motif_of=motif_of)


def ground_truth_motif(g: Graph, i: int) -> np.ndarray:
    """All nodes in the same planted motif instance as node ``i``."""
    if g.motif_of is None:
        raise ValueError("graph carries no motif ground truth")
    if not 0 <= i < g.n:
        raise ValueError(f"node index {i} out of range")
    if g.motif_of[i] < 0:
        raise ValueError(f"node {i} is a base-graph node; no ground truth motif")
    return np.flatnonzero(g.motif_of == g.motif_of[i])
