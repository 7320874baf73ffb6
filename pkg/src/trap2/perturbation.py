"""Perturbation sampling over the interpretation domain.

Each sampled instance perturbs the domain's structure and/or features, gets
scored with a perturbation energy level (how close it stays to the original,
combining hop-weighted reachability similarity and per-node feature
similarity), and records the black box's response. Instance j always draws
from an RNG stream derived from (seed, j), so batches are bit-identical
regardless of evaluation order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, field, replace
from typing import Iterator

import numpy as np

from .graph import bfs_hops, reachable_row
from .translation import InterpretationDomain

__all__ = [
    "STRUCTURE_PATTERNS",
    "FEATURE_PATTERNS",
    "PerturbationConfig",
    "PerturbedInstance",
    "PerturbationBatch",
    "perturb_structure",
    "perturb_features",
    "hop_weights",
    "sim",
    "energy_structure",
    "energy_feature",
    "energy_total",
    "sample_batch",
    "derive_seed",
]

STRUCTURE_PATTERNS = ("adding", "removing", "adding-and-removing", "none")
FEATURE_PATTERNS = ("masking", "scaling", "none")


@dataclass(frozen=True)
class PerturbationConfig:
    """Knobs for one perturbation batch.

    ``p1`` is the edge-keep probability (entries eligible for a pattern flip
    with probability 1 - p1) and ``p2`` the feature-keep probability for
    masking. ``protect_one_hop`` pins every existing edge incident to the
    center, so sampling never starves the closest (most informative)
    neighbors. ``delta`` is the kernel width of the similarity, ``K`` the hop
    bound of the structural energy, and ``lambda_A``/``lambda_X`` mix the two
    energy terms.
    """

    structure_pattern: str = "removing"
    feature_pattern: str = "masking"
    p1: float = 0.5
    p2: float = 0.8
    protect_one_hop: bool = False
    m: int = 1500
    K: int = 3
    delta: float = 25.0
    lambda_A: float = 1.0
    lambda_X: float = 1.0
    seed: int = 0
    normalize_feature_energy: bool = False
    literal_cosine: bool = False

    def __post_init__(self) -> None:
        if self.structure_pattern not in STRUCTURE_PATTERNS:
            raise ValueError(f"unknown structure pattern {self.structure_pattern!r}")
        if self.feature_pattern not in FEATURE_PATTERNS:
            raise ValueError(f"unknown feature pattern {self.feature_pattern!r}")
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise ValueError("p1 and p2 must lie in [0, 1]")
        if self.m < 1:
            raise ValueError("perturbation count m must be >= 1")
        if self.K < 1:
            raise ValueError("energy hop bound K must be >= 1")
        if self.delta <= 0:
            raise ValueError("kernel width delta must be > 0")
        if self.lambda_A < 0 or self.lambda_X < 0 or self.lambda_A + self.lambda_X == 0:
            raise ValueError("lambda_A and lambda_X must be >= 0 and not both zero")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PerturbationConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown perturbation config fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class PerturbedInstance:
    """One perturbed (A, X) pair with its energy level and recorded response."""

    A_P: np.ndarray
    X_P: np.ndarray
    gamma: float
    response: np.ndarray


def derive_seed(*keys: int) -> int:
    """Stable child seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence(tuple(int(k) for k in keys)).generate_state(1)[0])


def _instance_rng(seed: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(j))))


def perturb_structure(
    dom: InterpretationDomain, cfg: PerturbationConfig, rng: np.random.Generator
) -> np.ndarray:
    """One structure draw: per unordered pair, flip with probability 1 - p1.

    removing only deletes existing edges, adding only creates absent ones,
    adding-and-removing does both. Symmetry and the zero diagonal are
    preserved; protected center edges are restored afterwards.
    """
    A = dom.A_I.astype(bool)
    n = dom.n_hat
    if cfg.structure_pattern == "none":
        return dom.A_I.copy()
    flip = np.triu(rng.random((n, n)) >= cfg.p1, 1)
    flip |= flip.T
    if cfg.structure_pattern == "removing":
        A_P = A & ~flip
    elif cfg.structure_pattern == "adding":
        A_P = A | (flip & ~A)
    else:
        A_P = A ^ flip
    if cfg.protect_one_hop:
        protected = A[0]
        A_P[0, protected] = True
        A_P[protected, 0] = True
    return A_P.astype(np.int8)


def perturb_features(
    dom: InterpretationDomain, cfg: PerturbationConfig, rng: np.random.Generator
) -> np.ndarray:
    """One feature draw over every entry of the domain's feature matrix.

    masking keeps each entry with probability p2 (else zero); scaling
    multiplies each entry by an independent standard-normal draw.
    """
    if cfg.feature_pattern == "none":
        return dom.X_I.copy()
    if cfg.feature_pattern == "masking":
        keep = rng.random(dom.X_I.shape) < cfg.p2
        return dom.X_I * keep
    return dom.X_I * rng.standard_normal(dom.X_I.shape)


def hop_weights(K: int) -> np.ndarray:
    """Normalized attention over hops 1..K: softmax of K/(k+1), decreasing in k."""
    if K < 1:
        raise ValueError("K must be >= 1")
    w = K / (np.arange(1, K + 1) + 1.0)
    e = np.exp(w - w.max())
    return e / e.sum()


def _cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 and nv == 0.0:
        return 0.0
    if nu == 0.0 or nv == 0.0:
        return 1.0
    return float(np.clip(1.0 - float(u @ v) / (nu * nv), 0.0, 2.0))


def sim(u: np.ndarray, v: np.ndarray, delta: float, literal_cosine: bool = False) -> float:
    """Similarity kernel in (0, 1]: exp(-cosine_distance(u, v)^2 / delta^2).

    Zero-vector convention: two zero vectors are identical (distance 0), a
    zero against a nonzero vector is maximally dissimilar (distance 1). With
    ``literal_cosine`` the kernel is fed the cosine similarity instead of the
    distance, for ablation.
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    d = _cosine_distance(u, v)
    arg = (1.0 - d) if literal_cosine else d
    return float(np.exp(-(arg**2) / delta**2))


def energy_structure(
    dom: InterpretationDomain,
    A_P: np.ndarray,
    K: int,
    delta: float,
    literal_cosine: bool = False,
) -> float:
    """Hop-weighted similarity between perturbed and original center reachability."""
    if A_P.shape != dom.A_I.shape:
        raise ValueError("perturbed adjacency shape does not match the domain")
    alpha = hop_weights(K)
    dist_p = bfs_hops(A_P, 0, K)
    dist_i = bfs_hops(dom.A_I, 0, K)
    total = 0.0
    for k in range(1, K + 1):
        row_p = ((dist_p >= 0) & (dist_p <= k)).astype(np.float64)
        row_i = ((dist_i >= 0) & (dist_i <= k)).astype(np.float64)
        total += alpha[k - 1] * sim(row_p, row_i, delta, literal_cosine)
    return float(total)


def energy_feature(
    dom: InterpretationDomain,
    X_P: np.ndarray,
    delta: float,
    literal_cosine: bool = False,
    normalize: bool = False,
) -> float:
    """Summed per-node similarity between perturbed and original feature rows."""
    if X_P.shape != dom.X_I.shape:
        raise ValueError("perturbed feature shape does not match the domain")
    total = sum(
        sim(X_P[j], dom.X_I[j], delta, literal_cosine) for j in range(dom.n_hat)
    )
    return float(total / dom.n_hat) if normalize else float(total)


def energy_total(gamma_A: float, gamma_X: float, lambda_A: float, lambda_X: float) -> float:
    """Complete energy level: lambda_A * gamma_A + lambda_X * gamma_X."""
    return lambda_A * gamma_A + lambda_X * gamma_X


@dataclass
class PerturbationBatch:
    """A sequence of perturbed instances stored as stacked arrays.

    Indexing yields :class:`PerturbedInstance` views. ``gates`` holds the
    k-hop center-reachability indicator of every instance (the surrogate's
    input gate), precomputed here because sampling already walks the
    perturbed adjacency.
    """

    domain: InterpretationDomain
    A_P: np.ndarray  # (m, n_hat, n_hat) int8
    X_P: np.ndarray  # (m, n_hat, d)
    gamma: np.ndarray  # (m,)
    responses: np.ndarray  # (m, C)
    gates: np.ndarray  # (m, n_hat) int8
    config: PerturbationConfig | None = None

    def __len__(self) -> int:
        return self.A_P.shape[0]

    def __getitem__(self, j: int) -> PerturbedInstance:
        return PerturbedInstance(
            A_P=self.A_P[j], X_P=self.X_P[j], gamma=float(self.gamma[j]),
            response=self.responses[j],
        )

    def __iter__(self) -> Iterator[PerturbedInstance]:
        return (self[j] for j in range(len(self)))

    def design_matrix(self, dtype=np.float32) -> np.ndarray:
        """Gated, flattened surrogate inputs, one row per instance: (m, n_hat*d)."""
        gated = self.X_P * self.gates[:, :, None]
        return gated.reshape(len(self), -1).astype(dtype)


def _batch_center_reach(A_P: np.ndarray, K: int, dtype=np.float32) -> list[np.ndarray]:
    """Center-row reachability masks of every instance for k = 1..K.

    Returns K boolean arrays of shape (m, n_hat); self counts as reachable.
    """
    m, n, _ = A_P.shape
    B = A_P.astype(dtype) + np.eye(n, dtype=dtype)
    v = np.zeros((m, 1, n), dtype=dtype)
    v[:, 0, 0] = 1.0
    masks = []
    for _ in range(K):
        v = (v @ B) > 0
        masks.append(v[:, 0, :].copy())
        v = v.astype(dtype)
    return masks


def _row_cos_distance(U: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Cosine distance of each row of U against v, with the zero conventions."""
    nu = np.linalg.norm(U, axis=-1)
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return np.where(nu == 0.0, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = (U @ v) / (nu * nv)
    d = np.clip(1.0 - cos, 0.0, 2.0)
    return np.where(nu == 0.0, 1.0, d)


def _batch_energy(
    dom: InterpretationDomain,
    A_P: np.ndarray,
    X_P: np.ndarray,
    cfg: PerturbationConfig,
    reach_masks: list[np.ndarray],
) -> np.ndarray:
    alpha = hop_weights(cfg.K)
    dist_i = bfs_hops(dom.A_I, 0, cfg.K)
    m = A_P.shape[0]
    gamma_A = np.zeros(m)
    for k in range(1, cfg.K + 1):
        row_i = ((dist_i >= 0) & (dist_i <= k)).astype(np.float64)
        d = _row_cos_distance(reach_masks[k - 1].astype(np.float64), row_i)
        arg = (1.0 - d) if cfg.literal_cosine else d
        gamma_A += alpha[k - 1] * np.exp(-(arg**2) / cfg.delta**2)

    # feature rows: cosine of each perturbed row against its original row
    dots = np.einsum("mnd,nd->mn", X_P, dom.X_I)
    np_norm = np.linalg.norm(X_P, axis=2)
    ni_norm = np.linalg.norm(dom.X_I, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = dots / (np_norm * ni_norm[None, :])
    d = np.clip(1.0 - cos, 0.0, 2.0)
    d = np.where(np_norm == 0.0, 1.0, d)
    both_zero = (np_norm == 0.0) & (ni_norm[None, :] == 0.0)
    d = np.where(both_zero, 0.0, d)
    d = np.where((ni_norm[None, :] == 0.0) & ~both_zero, 1.0, d)
    arg = (1.0 - d) if cfg.literal_cosine else d
    sims = np.exp(-(arg**2) / cfg.delta**2)
    gamma_X = sims.sum(axis=1)
    if cfg.normalize_feature_energy:
        gamma_X = gamma_X / dom.n_hat
    return cfg.lambda_A * gamma_A + cfg.lambda_X * gamma_X


def sample_batch(
    dom: InterpretationDomain,
    predictor,
    cfg: PerturbationConfig,
    chunk: int = 256,
) -> PerturbationBatch:
    """Draw m perturbed instances, score their energy, and record responses.

    The response of an instance is the predictor's output on the perturbed
    domain graph: the center node's probability row for the node task, the
    graph head otherwise. Instance j's randomness comes from a stream keyed
    by (cfg.seed, j).
    """
    n, d = dom.n_hat, dom.X_I.shape[1]
    m = cfg.m
    A_P = np.empty((m, n, n), dtype=np.int8)
    X_P = np.empty((m, n, d), dtype=np.float64)
    for j in range(m):
        rng = _instance_rng(cfg.seed, j)
        A_P[j] = perturb_structure(dom, cfg, rng)
        X_P[j] = perturb_features(dom, cfg, rng)

    gamma = np.empty(m, dtype=np.float64)
    gates = np.empty((m, n), dtype=np.int8)
    responses = None
    use_batch = hasattr(predictor, "predict_batch")
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        masks = _batch_center_reach(A_P[lo:hi], max(cfg.K, dom.k))
        gamma[lo:hi] = _batch_energy(dom, A_P[lo:hi], X_P[lo:hi], cfg, masks[: cfg.K])
        gates[lo:hi] = masks[dom.k - 1].astype(np.int8)
        if use_batch:
            out = predictor.predict_batch(A_P[lo:hi], X_P[lo:hi].astype(np.float32))
        else:
            out = np.stack([predictor.predict(A_P[j], X_P[j]) for j in range(lo, hi)])
        rows = out[:, 0, :] if out.ndim == 3 else out
        if responses is None:
            responses = np.empty((m, rows.shape[1]), dtype=np.float64)
        responses[lo:hi] = rows
    return PerturbationBatch(
        domain=dom, A_P=A_P, X_P=X_P, gamma=gamma, responses=responses,
        gates=gates, config=cfg,
    )


def make_batch(
    dom: InterpretationDomain,
    A_P: np.ndarray,
    X_P: np.ndarray,
    gamma: np.ndarray,
    responses: np.ndarray,
    k: int | None = None,
) -> PerturbationBatch:
    """Assemble a batch from precomputed arrays (responses from any source)."""
    k = dom.k if k is None else k
    gates = np.stack([reachable_row(a, 0, k) for a in A_P])
    return PerturbationBatch(
        domain=dom,
        A_P=np.asarray(A_P, dtype=np.int8),
        X_P=np.asarray(X_P, dtype=np.float64),
        gamma=np.asarray(gamma, dtype=np.float64),
        responses=np.asarray(responses, dtype=np.float64),
        gates=gates,
    )
