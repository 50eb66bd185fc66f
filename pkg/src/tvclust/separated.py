"""Cluster-then-denoise pipeline: run a classical clustering or orthogonal
multiplicative NMF, then TV-denoise the cluster membership matrix column by
column and re-derive hard labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridGeometry
from .initialization import SVD, InitMethod, init_factors, kmeanspp_centroids
from .linalg import clamp_strict_positive, project_nonnegative
from .tv import build_neighborhoods, tv_prox_columns

KMEANS = "kmeans"
ONMF_MU_DING = "onmf_mu_ding"
ONMF_MU_CHOI = "onmf_mu_choi"

_BASES = (KMEANS, ONMF_MU_DING, ONMF_MU_CHOI)


@dataclass(frozen=True)
class SeparatedConfig:
    base: str
    tau: float
    i_max: int = 800
    init: InitMethod = field(default_factory=lambda: InitMethod(SVD, 0))
    prox_iters: int = 100

    def __post_init__(self):
        if self.base not in _BASES:
            raise ValueError(f"unknown base method {self.base!r}")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.prox_iters < 1:
            raise ValueError("prox_iters must be at least 1")


def _squared_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return (np.sum(x * x, axis=1)[:, None]
            + np.sum(centroids * centroids, axis=1)[None, :]
            - 2.0 * x @ centroids.T)


def kmeans_cluster(x: np.ndarray, k: int, init: InitMethod, max_iter: int = 300,
                   initial_centroids: np.ndarray | None = None):
    """Lloyd iterations with squared Euclidean distance.

    Stops once the assignments no longer change.  An emptied cluster is
    re-seeded with the point farthest from its current centroid.
    ``initial_centroids`` (K, N) bypasses the init method for warm starts.
    Returns the binary membership matrix (M, K) and the centroids (K, N).
    """
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    if k > m:
        raise ValueError(f"k={k} exceeds the number of data rows {m}")

    if initial_centroids is not None:
        centroids = np.asarray(initial_centroids, dtype=float).copy()
        if centroids.shape != (k, x.shape[1]):
            raise ValueError(
                f"initial centroids must be ({k}, {x.shape[1]}), "
                f"got {centroids.shape}")
    elif init.tag == SVD:
        _, centroids = init_factors(x, k, init)
        centroids = centroids.copy()
    else:
        centroids = kmeanspp_centroids(x, k, init.seed)

    labels = np.full(m, -1, dtype=int)
    for _ in range(max_iter):
        new_labels = np.argmin(_squared_distances(x, centroids), axis=1)
        for kk in range(k):
            members = new_labels == kk
            if not np.any(members):
                worst = int(np.argmax(
                    np.sum((x - centroids[new_labels]) ** 2, axis=1)))
                new_labels[worst] = kk
                members = new_labels == kk
            centroids[kk] = x[members].mean(axis=0)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

    u = np.zeros((m, k))
    u[np.arange(m), labels] = 1.0
    return u, centroids


def kmeans_objective(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    return float(np.sum((np.asarray(x, dtype=float) - centroids[labels]) ** 2))


def mu_v_step(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Shared multiplicative centroid update V <- V o (U'X) / (U'U V)."""
    return clamp_strict_positive(v * (u.T @ x) / (u.T @ u @ v))


def _mu_u_step_ding(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    xvt = x @ v.T
    return clamp_strict_positive(u * np.sqrt(xvt / (u @ (u.T @ xvt))))


def _mu_u_step_choi(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return clamp_strict_positive(u * (x @ v.T) / (u @ (v @ x.T @ u)))


DING = "ding"
CHOI = "choi"
_U_STEPS = {DING: _mu_u_step_ding, CHOI: _mu_u_step_choi}


def onmf_multiplicative(x: np.ndarray, k: int, variant: str, init: InitMethod,
                        i_max: int):
    """Alternating multiplicative ONMF baseline with an orthogonality
    correcting U step and the plain multiplicative V step."""
    if variant not in _U_STEPS:
        raise ValueError(f"unknown ONMF variant {variant!r}")
    x = np.asarray(x, dtype=float)
    u, v = init_factors(x, k, init)
    u = clamp_strict_positive(u)
    v = clamp_strict_positive(v)
    u_step = _U_STEPS[variant]
    for _ in range(i_max):
        u = u_step(x, u, v)
        v = mu_v_step(x, u, v)
    return u, v


def harden(u: np.ndarray, seed: int) -> np.ndarray:
    """Per-row argmax labels; exact ties are broken by a seeded uniform
    choice among the maximizers."""
    u = np.asarray(u, dtype=float)
    row_max = u.max(axis=1)
    labels = np.argmax(u, axis=1)
    tied_rows = np.flatnonzero(np.sum(u == row_max[:, None], axis=1) > 1)
    if tied_rows.size:
        rng = np.random.default_rng(seed)
        for m in tied_rows:
            labels[m] = rng.choice(np.flatnonzero(u[m] == row_max[m]))
    return labels


def onmf_tv_pipeline(x: np.ndarray, k: int, cfg: SeparatedConfig,
                     geometry: GridGeometry):
    """Base clustering, column-wise TV denoising of the membership matrix,
    projection of negatives to zero, then hardening."""
    x = np.asarray(x, dtype=float)
    if geometry.n_rows != x.shape[0]:
        raise ValueError(
            f"geometry has {geometry.n_rows} pixels but data has "
            f"{x.shape[0]} rows"
        )
    if cfg.base == KMEANS:
        u, v = kmeans_cluster(x, k, cfg.init)
    else:
        variant = DING if cfg.base == ONMF_MU_DING else CHOI
        u, v = onmf_multiplicative(x, k, variant, cfg.init, cfg.i_max)

    if cfg.tau > 0:
        graph = build_neighborhoods(geometry)
        u = tv_prox_columns(u, cfg.tau, graph, cfg.prox_iters)
    u = project_nonnegative(u)
    labels = harden(u, cfg.init.seed)
    return u, v, labels
