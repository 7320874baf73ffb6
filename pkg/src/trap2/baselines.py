"""Reference explainers: random scores, greedy node masking, gradient saliency.

All three emit the shared :class:`~trap2.explanation.Explanation` type and go
through the same extraction tie-break rules as the surrogate pipeline, so the
evaluation compares like with like.
"""

from __future__ import annotations

import math

import numpy as np

from .explanation import Explanation, extract
from .translation import InterpretationDomain

__all__ = ["BASELINE_KINDS", "random_explainer", "greedy_explainer", "grad_explainer"]

BASELINE_KINDS = ("random", "greedy", "grad")

GREEDY_MODES = ("mask-edges", "remove-node")


def _default_n_select(dom: InterpretationDomain, n_select: int | None) -> int:
    return n_select if n_select is not None else max(1, math.ceil(dom.n_hat / 4))


def random_explainer(
    dom: InterpretationDomain,
    seed: int,
    n_select: int | None = None,
    n_feature_select: int | None = None,
) -> Explanation:
    """All node and feature scores drawn i.i.d. uniform on (0, 1)."""
    rng = np.random.default_rng(seed)
    node_scores = rng.random(dom.n_hat)
    feature_scores = rng.random(dom.X_I.shape)
    return extract(
        dom,
        node_scores,
        feature_scores,
        _default_n_select(dom, n_select),
        n_feature_select=n_feature_select,
        target_class=-1,
        method="random",
        config={"seed": int(seed)},
    )


def greedy_explainer(
    dom: InterpretationDomain,
    predictor,
    target_class: int | None = None,
    base_prob: float | None = None,
    n_select: int | None = None,
    n_feature_select: int | None = None,
    mode: str = "mask-edges",
) -> Explanation:
    """Score each node by the prediction change caused by masking it out.

    For every domain node but the center, all of its edges are zeroed (with
    ``mode="remove-node"`` its features are zeroed too) and the absolute
    change of the center's predicted-class probability is the node's score;
    the center itself always ranks first. The magnitude is used rather than
    the signed drop because masking a structurally important node can push
    the probability in either direction. When ``target_class``/``base_prob``
    are given the unperturbed prediction is not recomputed, so exactly
    n_hat - 1 predictor calls are made.
    """
    if mode not in GREEDY_MODES:
        raise ValueError(f"mode must be one of {GREEDY_MODES}")
    if target_class is None or base_prob is None:
        p0 = predictor.predict(dom.A_I, dom.X_I)[dom.center_pos]
        target_class = int(np.argmax(p0))
        base_prob = float(p0[target_class])
    scores = np.empty(dom.n_hat)
    scores[dom.center_pos] = np.inf
    for pos in range(dom.n_hat):
        if pos == dom.center_pos:
            continue
        A_m = dom.A_I.copy()
        A_m[pos, :] = 0
        A_m[:, pos] = 0
        X_m = dom.X_I
        if mode == "remove-node":
            X_m = dom.X_I.copy()
            X_m[pos] = 0.0
        p = predictor.predict(A_m, X_m)[dom.center_pos]
        scores[pos] = abs(base_prob - float(p[target_class]))
    return extract(
        dom,
        scores,
        np.zeros(dom.X_I.shape),
        _default_n_select(dom, n_select),
        n_feature_select=n_feature_select,
        target_class=int(target_class),
        method="greedy",
        config={"mode": mode},
    )


def grad_explainer(
    dom: InterpretationDomain,
    predictor,
    target_class: int | None = None,
    n_select: int | None = None,
    n_feature_select: int | None = None,
    use_adjacency: bool = False,
) -> Explanation:
    """Saliency scores from the loss gradient at the unperturbed domain.

    Node score is the L1 norm of the gradient over the node's feature row;
    per-entry absolute gradients are the feature scores. ``use_adjacency``
    switches node scoring to row sums of the absolute adjacency gradient.
    """
    if not hasattr(predictor, "input_gradients"):
        raise TypeError("predictor does not expose input gradients")
    if target_class is None:
        p0 = predictor.predict(dom.A_I, dom.X_I)[dom.center_pos]
        target_class = int(np.argmax(p0))
    node = dom.center_pos if getattr(predictor, "task", "node") == "node" else None
    dX, dA = predictor.input_gradients(dom.A_I, dom.X_I, target_class, node=node)
    feature_scores = np.abs(dX)
    node_scores = np.abs(dA).sum(axis=1) if use_adjacency else feature_scores.sum(axis=1)
    return extract(
        dom,
        node_scores,
        feature_scores,
        _default_n_select(dom, n_select),
        n_feature_select=n_feature_select,
        target_class=int(target_class),
        method="grad",
        config={"use_adjacency": use_adjacency},
    )
