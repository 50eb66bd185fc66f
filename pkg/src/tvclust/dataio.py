"""On-disk formats.

Matrix CSV: first line "rows cols", then one data row per line,
space-separated decimal reals.  Geometry CSV: first line "d1 d2", then one
line "m i j" per annotated pixel.  Labels: one integer per line.  Cluster
maps are ASCII PGM (P2) images.
"""

from __future__ import annotations

import numpy as np

from .grid import GridGeometry
from .linalg import as_matrix

_FLOAT_FMT = "%.12g"


def write_matrix_csv(a: np.ndarray, path) -> None:
    a = as_matrix(a)
    with open(path, "w") as fh:
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for row in a:
            fh.write(" ".join(_FLOAT_FMT % v for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'rows cols' header")
        rows, cols = int(header[0]), int(header[1])
        a = np.loadtxt(fh, ndmin=2)
    if a.shape != (rows, cols):
        raise ValueError(
            f"{path}: header promises {rows}x{cols}, file holds {a.shape}")
    return as_matrix(a, name=str(path))


def write_geometry_csv(geometry: GridGeometry, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{geometry.height} {geometry.width}\n")
        for m, (i, j) in enumerate(geometry.pixel_of_row):
            fh.write(f"{m} {i} {j}\n")


def read_geometry_csv(path) -> GridGeometry:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'd1 d2' header")
        d1, d2 = int(header[0]), int(header[1])
        body = np.loadtxt(fh, dtype=int, ndmin=2)
    if body.size == 0:
        raise ValueError(f"{path}: no pixels listed")
    order = np.argsort(body[:, 0])
    body = body[order]
    if not np.array_equal(body[:, 0], np.arange(body.shape[0])):
        raise ValueError(f"{path}: row indices must enumerate 0..M-1")
    return GridGeometry(d1, d2, body[:, 1:])


def write_labels_csv(labels: np.ndarray, path) -> None:
    labels = np.asarray(labels, dtype=int)
    with open(path, "w") as fh:
        for v in labels:
            fh.write(f"{v}\n")


def read_labels_csv(path) -> np.ndarray:
    labels = np.loadtxt(path, dtype=int, ndmin=1)
    return labels


MASKED_GRAY = 255


def label_gray_levels(n_clusters: int) -> np.ndarray:
    """Gray level of cluster k: floor(254 k / (K - 1)); a single cluster maps
    to 0.  Level 255 is reserved for masked cells."""
    if n_clusters < 1:
        raise ValueError("need at least one cluster")
    if n_clusters == 1:
        return np.zeros(1, dtype=int)
    return (254 * np.arange(n_clusters)) // (n_clusters - 1)


def emit_label_map(labels: np.ndarray, geometry: GridGeometry, path,
                   n_clusters: int | None = None) -> None:
    """Write the label image as an ASCII PGM; masked pixels show as 255."""
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (geometry.n_rows,):
        raise ValueError(
            f"expected {geometry.n_rows} labels, got shape {labels.shape}")
    if n_clusters is None:
        n_clusters = int(labels.max()) + 1
    grays = label_gray_levels(n_clusters)

    img = np.full((geometry.height, geometry.width), MASKED_GRAY, dtype=int)
    img[geometry.pixel_of_row[:, 0], geometry.pixel_of_row[:, 1]] = grays[labels]
    with open(path, "w") as fh:
        fh.write("P2\n")
        fh.write(f"{geometry.width} {geometry.height}\n255\n")
        for row in img:
            fh.write(" ".join(str(v) for v in row) + "\n")


def read_pgm(path) -> np.ndarray:
    """Parse an ASCII PGM back into an integer image (test/round-trip aid)."""
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0]
            tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path}: not an ASCII PGM file")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.asarray(tokens[4:], dtype=int)
    if data.size != width * height or maxval <= 0:
        raise ValueError(f"{path}: malformed PGM payload")
    return data.reshape(height, width)
