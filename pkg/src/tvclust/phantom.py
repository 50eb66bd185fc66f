"""Synthetic hyperspectral phantoms with spatially contiguous planted
classes, standing in for non-distributable measured data.

Each class owns a nonnegative spectral signature built from random bumps; a
shared component controls the pairwise overlap between signatures.  Pixel
spectra are the class signature plus Gaussian noise clipped at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridGeometry

STRIPES = "stripes"
RECTANGLES = "rectangles"
VORONOI = "voronoi"

_LAYOUTS = (STRIPES, RECTANGLES, VORONOI)


@dataclass(frozen=True)
class PhantomSpec:
    d1: int
    d2: int
    k_true: int
    n_channels: int
    layout: str = STRIPES
    noise_sigma: float = 0.0
    signature_overlap: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.layout not in _LAYOUTS:
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.k_true < 1 or self.k_true > self.d1 * self.d2:
            raise ValueError("k_true must lie in [1, d1*d2]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if not 0.0 <= self.signature_overlap <= 1.0:
            raise ValueError("signature_overlap must lie in [0, 1]")


@dataclass
class Dataset:
    x: np.ndarray
    geometry: GridGeometry
    truth: np.ndarray


def _layout_labels(spec: PhantomSpec, rng: np.random.Generator) -> np.ndarray:
    d1, d2, k = spec.d1, spec.d2, spec.k_true
    ii, jj = np.meshgrid(np.arange(d1), np.arange(d2), indexing="ij")
    if spec.layout == STRIPES:
        labels = np.minimum(ii * k // d1, k - 1)
    elif spec.layout == RECTANGLES:
        # near-square block grid with k cells
        cols = int(np.ceil(np.sqrt(k)))
        rows = int(np.ceil(k / cols))
        cell = np.minimum(ii * rows // d1, rows - 1) * cols + np.minimum(
            jj * cols // d2, cols - 1)
        labels = np.minimum(cell, k - 1)
    else:  # voronoi: nearest of k seeded sites
        sites = np.column_stack([rng.uniform(0, d1, k), rng.uniform(0, d2, k)])
        dist = ((ii[..., None] - sites[:, 0]) ** 2
                + (jj[..., None] - sites[:, 1]) ** 2)
        labels = np.argmin(dist, axis=-1)
    return labels.astype(int)


def _signatures(spec: PhantomSpec, rng: np.random.Generator) -> np.ndarray:
    """One nonnegative spectrum per class: a class-private block of random
    bumps blended with a shared bump profile by the overlap weight."""
    k, n = spec.k_true, spec.n_channels
    shared = rng.uniform(0.5, 1.5, size=n) * (rng.uniform(size=n) < 0.4)
    sigs = np.zeros((k, n))
    blocks = np.array_split(np.arange(n), k)
    for c in range(k):
        private = np.zeros(n)
        block = blocks[c]
        private[block] = rng.uniform(1.0, 3.0, size=block.size)
        # a few extra bumps anywhere keep signatures non-trivial for small n
        extra = rng.choice(n, size=max(1, n // 10), replace=False)
        private[extra] += rng.uniform(0.5, 1.5, size=extra.size)
        sigs[c] = (1.0 - spec.signature_overlap) * private \
            + spec.signature_overlap * shared
    return sigs


def generate_phantom(spec: PhantomSpec) -> Dataset:
    """Deterministic under the spec seed: data matrix, full-grid geometry and
    ground-truth labels (row-major pixel order)."""
    rng = np.random.default_rng(spec.seed)
    label_img = _layout_labels(spec, rng)
    sigs = _signatures(spec, rng)

    geometry = GridGeometry.full(spec.d1, spec.d2)
    truth = label_img[geometry.pixel_of_row[:, 0], geometry.pixel_of_row[:, 1]]
    x = sigs[truth]
    if spec.noise_sigma > 0:
        x = x + rng.normal(0.0, spec.noise_sigma, size=x.shape)
        x = np.maximum(x, 0.0)
    return Dataset(x=x, geometry=geometry, truth=truth)
