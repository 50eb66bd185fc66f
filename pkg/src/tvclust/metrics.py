"""External clustering validation measures.

All five measures are computed from the K x K contingency table of
predicted-cluster versus ground-truth-class co-occurrence counts.  Natural
logarithms throughout; 0 * log 0 is taken as 0, which covers empty clusters.
Lower is better for every measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # (K, K) nonnegative integers, rows = predicted

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"contingency table must be square, got {c.shape}")
        if np.any(c < 0):
            raise ValueError("contingency counts must be nonnegative")
        if c.sum() <= 0:
            raise ValueError("contingency table is empty (n = 0)")

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def joint(self) -> np.ndarray:
        """p_{kk~} = n_{kk~} / n."""
        return np.asarray(self.counts, dtype=float) / self.n

    @property
    def pred_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def truth_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)


def contingency(pred: np.ndarray, truth: np.ndarray, k: int) -> ContingencyTable:
    """Count co-occurrences: counts[a, b] = #{m : pred_m = a, truth_m = b}."""
    pred = np.asarray(pred, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError(
            f"label vectors must be 1-D of equal length, got {pred.shape} "
            f"and {truth.shape}"
        )
    if pred.size == 0:
        raise ValueError("empty label vectors")
    if pred.min() < 0 or truth.min() < 0 or pred.max() >= k or truth.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")
    counts = np.bincount(pred * k + truth, minlength=k * k).reshape(k, k)
    return ContingencyTable(counts)


def _xlogy(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """x * log(y) with the 0 * log 0 = 0 convention."""
    out = np.zeros_like(np.asarray(x, dtype=float))
    pos = x > 0
    out[pos] = x[pos] * np.log(y[pos])
    return out


def _mutual_information(t: ContingencyTable) -> float:
    p = t.joint
    outer = t.pred_marginal[:, None] * t.truth_marginal[None, :]
    ratio = np.divide(p, outer, out=np.ones_like(p), where=outer > 0)
    return float(np.sum(_xlogy(p, ratio)))


def _label_entropy(marginal: np.ndarray) -> float:
    return -float(np.sum(_xlogy(marginal, marginal)))


def entropy(t: ContingencyTable) -> float:
    """Conditional entropy of the true classes given the predicted clusters;
    0 for a perfect clustering, at most log K."""
    p = t.joint
    pk = np.broadcast_to(t.pred_marginal[:, None], p.shape)
    cond = np.divide(p, pk, out=np.ones_like(p), where=pk > 0)
    return -float(np.sum(_xlogy(p, cond))) + 0.0  # normalize -0.0


def vi(t: ContingencyTable) -> float:
    """Variation of information H(pred) + H(truth) - 2 MI, in [0, 2 log K]."""
    return (_label_entropy(t.pred_marginal) + _label_entropy(t.truth_marginal)
            - 2.0 * _mutual_information(t)) + 0.0


def vd(t: ContingencyTable) -> float:
    """Van Dongen criterion (2n - sum of row maxima - sum of column maxima) / 2n."""
    c = np.asarray(t.counts, dtype=float)
    return float((2 * t.n - c.max(axis=1).sum() - c.max(axis=0).sum()) / (2 * t.n))


def vi_n(t: ContingencyTable) -> float:
    """Normalized variation of information 1 - 2 MI / (H(pred) + H(truth));
    the degenerate single-cluster-both-sides case counts as perfect (0)."""
    h_sum = _label_entropy(t.pred_marginal) + _label_entropy(t.truth_marginal)
    if h_sum == 0.0:
        return 0.0
    return 1.0 - 2.0 * _mutual_information(t) / h_sum


def vd_n(t: ContingencyTable) -> float:
    """Normalized van Dongen criterion; the degenerate denominator-zero case
    (all mass in a single cell) counts as perfect (0)."""
    c = np.asarray(t.counts, dtype=float)
    num = 2 * t.n - c.max(axis=1).sum() - c.max(axis=0).sum()
    den = 2 * t.n - c.sum(axis=1).max() - c.sum(axis=0).max()
    if den == 0.0:
        return 0.0
    return float(num / den)


def all_measures(t: ContingencyTable) -> dict:
    return {"E": entropy(t), "VI": vi(t), "VD": vd(t), "VDn": vd_n(t), "VIn": vi_n(t)}
