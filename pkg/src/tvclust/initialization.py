"""Factor initialization: K-means++ seeding and SVD-based nonnegative init.

Both schemes are fully determined by (data, K, seed); replicates with
distinct seeds are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KMEANSPP = "kmeanspp"
SVD = "svd"


@dataclass(frozen=True)
class InitMethod:
    tag: str
    seed: int = 0

    def __post_init__(self):
        if self.tag not in (KMEANSPP, SVD):
            raise ValueError(f"unknown init method {self.tag!r}")


def kmeanspp_centroids(x: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Pick k rows of x by D^2-weighted sequential sampling.

    The first centroid is uniform; each further one is drawn with
    probability proportional to the squared distance to the closest centroid
    chosen so far.
    """
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    if k < 1 or k > m:
        raise ValueError(f"need 1 <= k <= {m} rows, got k={k}")
    rng = np.random.default_rng(seed)

    chosen = np.empty(k, dtype=int)
    chosen[0] = rng.integers(m)
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for t in range(1, k):
        total = d2.sum()
        if total <= 0:
            raise ValueError(
                "k-means++ ran out of distinct rows; the data has fewer "
                f"than k={k} distinct rows"
            )
        idx = rng.choice(m, p=d2 / total)
        chosen[t] = idx
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return x[chosen].copy()


def _randomized_svd(x: np.ndarray, k: int, rng: np.random.Generator,
                    oversample: int = 8, power_iters: int = 2):
    """Truncated SVD via randomized range finding (Gaussian test matrix,
    QR-normalized power passes)."""
    m, n = x.shape
    r = min(k + oversample, min(m, n))
    q = rng.standard_normal((n, r))
    q, _ = np.linalg.qr(x @ q)
    for _ in range(power_iters):
        q, _ = np.linalg.qr(x.T @ q)
        q, _ = np.linalg.qr(x @ q)
    b = q.T @ x
    ub, s, vt = np.linalg.svd(b, full_matrices=False)
    u = q @ ub
    return u[:, :k], s[:k], vt[:k]


_EXACT_SVD_LIMIT = 512


def _truncated_svd(x: np.ndarray, k: int, rng: np.random.Generator):
    if min(x.shape) <= _EXACT_SVD_LIMIT:
        u, s, vt = np.linalg.svd(x, full_matrices=False)
        return u[:, :k], s[:k], vt[:k]
    return _randomized_svd(x, k, rng)


def nndsvd_factors(x: np.ndarray, k: int, seed: int):
    """Nonnegative double-SVD init: split each singular pair into its
    positive/negative parts and keep the dominant nonnegative part, scaled
    by the singular value.  Zeros are filled with mean(x)/k so downstream
    multiplicative updates cannot lock onto them.
    """
    x = np.asarray(x, dtype=float)
    m, n = x.shape
    if k < 1 or k > min(m, n):
        raise ValueError(f"need 1 <= k <= min{x.shape}, got k={k}")
    rng = np.random.default_rng(seed)
    u, s, vt = _truncated_svd(x, k, rng)
    if not np.all(np.isfinite(s)):
        raise ValueError("SVD of the data matrix failed (non-finite singular values)")

    w = np.zeros((m, k))
    h = np.zeros((k, n))
    w[:, 0] = np.sqrt(s[0]) * np.abs(u[:, 0])
    h[0] = np.sqrt(s[0]) * np.abs(vt[0])
    for j in range(1, k):
        uj, vj = u[:, j], vt[j]
        up, vp = np.maximum(uj, 0), np.maximum(vj, 0)
        un, vn = np.maximum(-uj, 0), np.maximum(-vj, 0)
        norm_p = np.linalg.norm(up) * np.linalg.norm(vp)
        norm_n = np.linalg.norm(un) * np.linalg.norm(vn)
        if norm_p >= norm_n:
            if norm_p > 0:
                scale = np.sqrt(s[j] * norm_p)
                w[:, j] = scale * up / np.linalg.norm(up)
                h[j] = scale * vp / np.linalg.norm(vp)
        elif norm_n > 0:
            scale = np.sqrt(s[j] * norm_n)
            w[:, j] = scale * un / np.linalg.norm(un)
            h[j] = scale * vn / np.linalg.norm(vn)

    fill = x.mean() / k
    w[w == 0] = fill
    h[h == 0] = fill
    return w, h


def init_factors(x: np.ndarray, k: int, method: InitMethod):
    """Initial (U0, V0), both nonnegative with shapes (M, K) and (K, N)."""
    x = np.asarray(x, dtype=float)
    m, n = x.shape
    if k > min(m, n):
        raise ValueError(f"k={k} exceeds min of data shape {x.shape}")
    if method.tag == SVD:
        return nndsvd_factors(x, k, method.seed)
    centroids = kmeanspp_centroids(x, k, method.seed)
    d2 = (np.sum(x * x, axis=1)[:, None]
          + np.sum(centroids * centroids, axis=1)[None, :]
          - 2.0 * x @ centroids.T)
    labels = np.argmin(d2, axis=1)
    u0 = np.zeros((m, k))
    u0[np.arange(m), labels] = 1.0
    return u0, centroids
