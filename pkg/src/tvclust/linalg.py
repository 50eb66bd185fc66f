"""Dense matrix primitives shared by all solvers.

Matrices are plain 2-D float64 ``numpy`` arrays in row-major (C) order.  All
functions here are value-semantic: they return new arrays and never mutate
their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProjectionBounds:
    """Lower/upper clamping bounds used to keep multiplicative iterates away
    from exact zeros (zero locking) and from overflow territory."""

    lower: float = 1e-16
    upper: float = 1e35

    def __post_init__(self):
        if not (0.0 < self.lower < self.upper):
            raise ValueError(
                f"projection bounds need 0 < lower < upper, got "
                f"lower={self.lower}, upper={self.upper}"
            )


DEFAULT_BOUNDS = ProjectionBounds()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and verify every entry is finite."""
    out = np.asarray(a, dtype=float)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={out.ndim}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


def clamp_strict_positive(a: np.ndarray, bounds: ProjectionBounds = DEFAULT_BOUNDS) -> np.ndarray:
    """Clamp every entry into [lower, upper]; keeps iterates strictly positive."""
    return np.clip(a, bounds.lower, bounds.upper)


def project_nonnegative(a: np.ndarray) -> np.ndarray:
    """Replace negative entries by zero (idempotent, normalizes -0.0 to 0.0)."""
    return np.maximum(a, 0.0) + 0.0


def frobenius_sq(a: np.ndarray) -> float:
    """Squared Frobenius norm, sum of squared entries."""
    a = np.asarray(a, dtype=float)
    return float(np.dot(a.ravel(), a.ravel()))


def _check_inner(a: np.ndarray, b: np.ndarray, inner_a: int, inner_b: int, op: str):
    if a.shape[inner_a] != b.shape[inner_b]:
        raise ValueError(
            f"dimension mismatch in {op}: shapes {a.shape} and {b.shape}"
        )


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense product A @ B with an explicit shape check."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_inner(a, b, 1, 0, "A @ B")
    return a @ b

def matmul_nt(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense product A @ B.T."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_inner(a, b, 1, 1, "A @ B.T")
    return a @ b.T


def matmul_tn(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense product A.T @ B."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_inner(a, b, 0, 0, "A.T @ B")
    return a.T @ b
