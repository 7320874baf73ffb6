"""Map a source graph to the interpretation domain around one node.

A depth-k message passer can only see k hops out, so everything downstream
(perturbation, surrogate fitting) operates on the k-hop ball around the
explained node rather than the whole graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, bfs_hops, induced_submatrix, _freeze

__all__ = ["InterpretationDomain", "translate"]


@dataclass(frozen=True)
class InterpretationDomain:
    """The k-hop neighborhood of one node, with its index map back to the source.

    ``nodes`` holds original indices, center first and the rest in ascending
    order; that ordering is what ties surrogate weight slots to nodes, so it
    must stay stable across runs. ``hop_of`` is the BFS distance from the
    center, aligned with ``nodes``.
    """

    center: int
    nodes: np.ndarray
    A_I: np.ndarray
    X_I: np.ndarray
    hop_of: np.ndarray
    k: int

    def __post_init__(self) -> None:
        for name in ("nodes", "A_I", "X_I", "hop_of"):
            object.__setattr__(self, name, _freeze(np.ascontiguousarray(getattr(self, name))))

    @property
    def n_hat(self) -> int:
        return len(self.nodes)

    @property
    def center_pos(self) -> int:
        return 0


def translate(g: Graph, i: int, k: int) -> InterpretationDomain:
    """Interpretation domain of node ``i``: everything within ``k`` hops."""
    if not 0 <= i < g.n:
        raise ValueError(f"node index {i} out of range for n={g.n}")
    if k < 1:
        raise ValueError(f"hop bound must be >= 1, got {k}")
    dist = bfs_hops(g.A, i, k)
    others = np.flatnonzero(dist >= 0)
    others = others[others != i]
    nodes = np.concatenate([[i], others]).astype(np.int64)
    return InterpretationDomain(
        center=i,
        nodes=nodes,
        A_I=induced_submatrix(g.A, nodes),
        X_I=g.X[nodes],
        hop_of=dist[nodes],
        k=k,
    )
