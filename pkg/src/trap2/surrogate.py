"""Local surrogate fitting and the end-to-end explanation entry points.

The surrogate is a linear-softmax model over the domain's gated node-feature
slots: node j's (perturbed) feature row enters only while j stays k-reachable
from the center in the perturbed graph. Fitting minimizes the energy-weighted
squared difference against the black box's recorded responses plus an L1
penalty, by full-batch subgradient descent from zero initialization; the
learning rate is halved whenever a step would increase the objective, so the
loss trajectory is non-increasing and untouched slots stay at exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .explanation import Explanation, build_explanation, extract
from .graph import Graph, reachable_row
from .perturbation import (
    PerturbationBatch,
    PerturbationConfig,
    derive_seed,
    sample_batch,
)
from .translation import InterpretationDomain, translate

__all__ = [
    "SurrogateModel",
    "surrogate_input",
    "surrogate_forward",
    "fit",
    "node_contributions",
    "explain_node",
    "explain_graph",
]

WEIGHT_MODES = ("inverse", "proportional")


@dataclass
class SurrogateModel:
    """Per-class weights over the domain's (node, feature) slots.

    ``W`` has one row per class and ``n_hat * d`` columns; the column block
    [q*d, (q+1)*d) belongs to the domain node at position q, matching the
    domain's fixed node ordering.
    """

    W: np.ndarray
    k: int
    domain: InterpretationDomain

    @property
    def num_classes(self) -> int:
        return self.W.shape[0]


def surrogate_input(A_P: np.ndarray, X_P: np.ndarray, center: int, k: int) -> np.ndarray:
    """Flattened surrogate input: each node's features gated by k-reachability.

    ``center`` is the position of the explained node inside the perturbed
    matrices (0 in domain coordinates).
    """
    if A_P.shape[0] != X_P.shape[0]:
        raise ValueError("adjacency and feature row counts differ")
    gate = reachable_row(A_P, center, k)
    return (X_P * gate[:, None]).reshape(-1)


def surrogate_forward(model: SurrogateModel, A_P: np.ndarray, X_P: np.ndarray) -> np.ndarray:
    """Class probabilities of the surrogate on one (possibly perturbed) instance."""
    x = surrogate_input(A_P, X_P, model.domain.center_pos, model.k)
    z = model.W.astype(np.float64) @ x
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _objective(Z, F, wgt, W, l1):
    """Loss and softmax probabilities for the current logits Z = Phi @ W.T."""
    Zs = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Zs)
    G = E / E.sum(axis=1, keepdims=True)
    R = G - F
    loss = float((wgt[:, None] * R * R).sum() + l1 * np.abs(W).sum())
    return loss, G


def fit(
    batch: PerturbationBatch,
    l1: float = 1e-3,
    epochs: int = 300,
    lr: float = 0.01,
    weight_mode: str = "inverse",
) -> SurrogateModel:
    """Fit the local surrogate to the recorded responses of a perturbation batch.

    Sample weights come from the energy level: 1/gamma with
    ``weight_mode="inverse"`` (low-energy instances get the attention),
    gamma with ``"proportional"``.
    """
    if len(batch) == 0:
        raise ValueError("perturbation batch is empty")
    if weight_mode not in WEIGHT_MODES:
        raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")
    gamma = batch.gamma
    if (gamma <= 0).any():
        raise ValueError("all energy levels must be positive")

    dtype = np.float32
    Phi = batch.design_matrix(dtype)
    F = batch.responses.astype(dtype)
    wgt = (1.0 / gamma if weight_mode == "inverse" else gamma).astype(dtype)
    m, C = F.shape
    W = np.zeros((C, Phi.shape[1]), dtype=dtype)
    l1 = dtype(l1)
    lr = float(lr)

    loss, G = _objective(Phi @ W.T, F, wgt, W, l1)

    def gradient(G, W):
        R = G - F
        S = (R * G).sum(axis=1, keepdims=True)
        dZ = 2.0 * wgt[:, None] * G * (R - S)
        return dZ.T @ Phi + l1 * np.sign(W)

    grad = gradient(G, W)
    for _ in range(epochs):
        W_new = W - dtype(lr) * grad
        loss_new, G_new = _objective(Phi @ W_new.T, F, wgt, W_new, l1)
        if loss_new > loss:
            # reject the step; retry from the same point with a smaller rate
            lr *= 0.5
            continue
        W, loss, G = W_new, loss_new, G_new
        grad = gradient(G, W)

    return SurrogateModel(W=W.astype(np.float64), k=batch.domain.k, domain=batch.domain)


def node_contributions(model: SurrogateModel, target_class: int) -> np.ndarray:
    """Per-node contribution: sum of absolute target-class weights over its slots."""
    if not 0 <= target_class < model.num_classes:
        raise ValueError(f"class {target_class} out of range")
    n = model.domain.n_hat
    return np.abs(model.W[target_class]).reshape(n, -1).sum(axis=1)


def _feature_scores(model: SurrogateModel, target_class: int) -> np.ndarray:
    n = model.domain.n_hat
    return np.abs(model.W[target_class]).reshape(n, -1)


def explain_node(
    g: Graph,
    i: int,
    predictor,
    cfg: PerturbationConfig | None = None,
    *,
    k: int | None = None,
    l1: float = 1e-3,
    fit_epochs: int = 300,
    fit_lr: float = 0.01,
    weight_mode: str = "inverse",
    n_select: int | None = None,
    n_feature_select: int | None = None,
) -> Explanation:
    """Full pipeline for one node: translate, perturb, fit, extract.

    Contributions are read from the class the predictor assigns to the
    unperturbed domain, i.e. the prediction actually being explained.
    Deterministic for a fixed config seed.
    """
    if getattr(predictor, "task", "node") != "node":
        raise ValueError("explain_node requires a node-task predictor")
    cfg = cfg if cfg is not None else PerturbationConfig()
    k = k if k is not None else getattr(predictor, "depth", 3)
    dom = translate(g, i, k)
    batch = sample_batch(dom, predictor, cfg)
    model = fit(batch, l1=l1, epochs=fit_epochs, lr=fit_lr, weight_mode=weight_mode)
    p0 = predictor.predict(dom.A_I, dom.X_I)[dom.center_pos]
    target = int(np.argmax(p0))
    scores = node_contributions(model, target)
    if n_select is None:
        n_select = max(1, math.ceil(dom.n_hat / 4))
    return extract(
        dom,
        scores,
        _feature_scores(model, target),
        n_select,
        n_feature_select=n_feature_select,
        target_class=target,
        method="trap2",
        config={
            "perturbation": cfg.to_dict(),
            "k": k,
            "l1": l1,
            "fit_epochs": fit_epochs,
            "fit_lr": fit_lr,
            "weight_mode": weight_mode,
            "n_select": n_select,
        },
    )


def explain_graph(
    g: Graph,
    predictor,
    cfg: PerturbationConfig | None = None,
    *,
    k: int | None = None,
    l1: float = 1e-3,
    fit_epochs: int = 300,
    fit_lr: float = 0.01,
    weight_mode: str = "inverse",
    n_select: int | None = None,
    n_feature_select: int | None = None,
) -> Explanation:
    """Graph-level explanation: every node contributes, scores pooled by mean.

    Each node is explained in its own domain against the graph-level
    responses, with the target fixed to the class predicted for the whole
    graph; a node absent from a center's domain contributes zero there, and
    the per-center scores are averaged over all n centers. Center i's batch
    uses the seed stream (cfg.seed, i).
    """
    if getattr(predictor, "task", "node") != "graph":
        raise ValueError("explain_graph requires a graph-task predictor")
    cfg = cfg if cfg is not None else PerturbationConfig()
    k = k if k is not None else getattr(predictor, "depth", 3)
    target = int(np.argmax(predictor.predict(g.A, g.X)[0]))

    pooled = np.zeros(g.n)
    pooled_feats = np.zeros((g.n, g.X.shape[1]))
    for i in range(g.n):
        dom = translate(g, i, k)
        cfg_i = replace(cfg, seed=derive_seed(cfg.seed, i))
        batch = sample_batch(dom, predictor, cfg_i)
        model = fit(batch, l1=l1, epochs=fit_epochs, lr=fit_lr, weight_mode=weight_mode)
        pooled[dom.nodes] += node_contributions(model, target)
        pooled_feats[dom.nodes] += _feature_scores(model, target)
    pooled /= g.n
    pooled_feats /= g.n

    if n_select is None:
        n_select = max(1, math.ceil(g.n / 4))
    return build_explanation(
        nodes=np.arange(g.n, dtype=np.int64),
        adjacency=g.A,
        node_scores=pooled,
        feature_scores=pooled_feats,
        n_select=n_select,
        center=-1,
        n_feature_select=n_feature_select,
        target_class=target,
        method="trap2",
        config={
            "perturbation": cfg.to_dict(),
            "k": k,
            "l1": l1,
            "fit_epochs": fit_epochs,
            "fit_lr": fit_lr,
            "weight_mode": weight_mode,
            "n_select": n_select,
            "task": "graph",
        },
    )
