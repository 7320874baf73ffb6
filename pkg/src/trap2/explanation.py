"""Explanation container shared by the surrogate pipeline and all baselines.

An explanation scores every node (and every node-feature slot) of the
interpretation domain, then extracts the top-scoring subgraph. Keeping one
type and one extraction rule for every method makes the evaluation
apples-to-apples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["Explanation", "extract", "save_explanation", "load_explanation", "to_dot"]


@dataclass(frozen=True)
class Explanation:
    """Scores over a node neighborhood plus the extracted subgraph.

    ``node_ids`` are original graph indices defining the order of
    ``node_scores`` and ``feature_scores`` rows. ``selected_nodes`` is in
    rank order (best first); ``selected_edges`` are the domain edges with
    both ends selected. ``center`` is -1 for graph-level explanations and
    ``target_class`` is -1 when no class was involved (random baseline).
    """

    center: int
    target_class: int
    node_ids: np.ndarray
    node_scores: np.ndarray
    feature_scores: np.ndarray
    selected_nodes: list[int]
    selected_edges: list[tuple[int, int]]
    selected_features: dict[int, list[int]]
    method: str = "trap2"
    config: dict = field(default_factory=dict)


def _rank(scores: np.ndarray, original_ids: np.ndarray) -> np.ndarray:
    """Positions sorted by descending score, ties by ascending original id."""
    return np.lexsort((original_ids, -np.asarray(scores, dtype=np.float64)))


def extract(
    dom,
    node_scores: np.ndarray,
    feature_scores: np.ndarray,
    n_select: int,
    *,
    n_feature_select: int | None = None,
    target_class: int = -1,
    method: str = "trap2",
    config: dict | None = None,
) -> Explanation:
    """Pick the top-``n_select`` nodes, their induced edges, and top features.

    Ties break toward the lower original index so extraction is fully
    deterministic. ``n_feature_select`` defaults to a quarter of the feature
    slots per node (at least one).
    """
    return build_explanation(
        nodes=dom.nodes,
        adjacency=dom.A_I,
        node_scores=node_scores,
        feature_scores=feature_scores,
        n_select=n_select,
        center=dom.center,
        n_feature_select=n_feature_select,
        target_class=target_class,
        method=method,
        config=config,
    )


def build_explanation(
    nodes: np.ndarray,
    adjacency: np.ndarray,
    node_scores: np.ndarray,
    feature_scores: np.ndarray,
    n_select: int,
    center: int,
    *,
    n_feature_select: int | None = None,
    target_class: int = -1,
    method: str = "trap2",
    config: dict | None = None,
) -> Explanation:
    nodes = np.asarray(nodes, dtype=np.int64)
    node_scores = np.asarray(node_scores, dtype=np.float64)
    feature_scores = np.asarray(feature_scores, dtype=np.float64)
    n = len(nodes)
    if not 1 <= n_select <= n:
        raise ValueError(f"n_select must be in [1, {n}], got {n_select}")
    d = feature_scores.shape[1]
    if n_feature_select is None:
        n_feature_select = max(1, math.ceil(d / 4))
    n_feature_select = min(n_feature_select, d)

    order = _rank(node_scores, nodes)
    sel_pos = order[:n_select]
    selected_nodes = [int(nodes[p]) for p in sel_pos]
    sel_set = set(selected_nodes)

    pos_of = {int(v): p for p, v in enumerate(nodes)}
    edges = []
    for u in selected_nodes:
        for v in selected_nodes:
            if u < v and adjacency[pos_of[u], pos_of[v]]:
                edges.append((u, v))
    edges.sort()

    selected_features = {}
    for p in sel_pos:
        row = feature_scores[p]
        feat_order = np.lexsort((np.arange(d), -row))
        selected_features[int(nodes[p])] = [int(f) for f in feat_order[:n_feature_select]]

    return Explanation(
        center=int(center),
        target_class=int(target_class),
        node_ids=nodes,
        node_scores=node_scores,
        feature_scores=feature_scores,
        selected_nodes=selected_nodes,
        selected_edges=edges,
        selected_features=selected_features,
        method=method,
        config=dict(config or {}),
    )


def to_json_dict(expl: Explanation) -> dict:
    return {
        "center": expl.center,
        "target_class": expl.target_class,
        "method": expl.method,
        "node_scores": {str(int(v)): float(s) for v, s in zip(expl.node_ids, expl.node_scores)},
        "feature_scores": {
            str(int(v)): [float(x) for x in row]
            for v, row in zip(expl.node_ids, expl.feature_scores)
        },
        "selected_nodes": expl.selected_nodes,
        "selected_edges": [[u, v] for u, v in expl.selected_edges],
        "selected_features": {str(k): v for k, v in expl.selected_features.items()},
        "config": expl.config,
    }


def save_explanation(expl: Explanation, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(expl), sort_keys=True, indent=2))


def load_explanation(path: str | Path) -> Explanation:
    try:
        d = json.loads(Path(path).read_text())
        node_ids = np.array(sorted(int(k) for k in d["node_scores"]), dtype=np.int64)
        # restore the stored ordering: center first if present, else ascending
        center = int(d["center"])
        if center in node_ids:
            node_ids = np.concatenate([[center], node_ids[node_ids != center]])
        scores = np.array([d["node_scores"][str(v)] for v in node_ids])
        feats = np.array([d["feature_scores"][str(v)] for v in node_ids])
        return Explanation(
            center=center,
            target_class=int(d["target_class"]),
            node_ids=node_ids,
            node_scores=scores,
            feature_scores=feats,
            selected_nodes=[int(v) for v in d["selected_nodes"]],
            selected_edges=[(int(u), int(v)) for u, v in d["selected_edges"]],
            selected_features={
                int(k): [int(f) for f in v] for k, v in d.get("selected_features", {}).items()
            },
            method=d.get("method", "trap2"),
            config=d.get("config", {}),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed explanation file {path}: {exc}") from exc


def to_dot(expl: Explanation, domain_edges: list[tuple[int, int]] | None = None) -> str:
    """GraphViz rendering: selected nodes filled, center highlighted, edges of the pick.

    ``domain_edges`` (original-index pairs) are drawn dashed as context when
    given; the extracted edge set is always drawn solid.
    """
    sel = set(expl.selected_nodes)
    lines = ["graph explanation {", "  node [shape=circle fontsize=10];"]
    for v in sorted(int(x) for x in expl.node_ids):
        attrs = []
        if v == expl.center:
            attrs.append('style=filled fillcolor="orange" penwidth=2')
        elif v in sel:
            attrs.append('style=filled fillcolor="lightblue"')
        lines.append(f"  {v} [{' '.join(attrs)}];" if attrs else f"  {v};")
    picked = set(expl.selected_edges)
    if domain_edges:
        for u, v in sorted(set((min(e), max(e)) for e in domain_edges) - picked):
            lines.append(f"  {u} -- {v} [style=dashed color=gray];")
    for u, v in sorted(picked):
        lines.append(f"  {u} -- {v} [penwidth=2];")
    lines.append("}")
    return "\n".join(lines) + "\n"
