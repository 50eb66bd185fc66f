"""Pixel-grid geometry: the bijection between data rows and 2-D pixels.

Every data row m corresponds to one annotated pixel (i, j) of a d1 x d2
grid.  The annotation mask may contain holes: masked-out cells carry no data
row.  Row order is the construction order of the annotated pixels.
"""

from __future__ import annotations

import numpy as np


class GridGeometry:
    """Bijection between row indices and mask-true grid cells.

    Attributes
    ----------
    height, width : int
        Grid dimensions d1 (vertical, index i) and d2 (horizontal, index j).
    pixel_of_row : (M, 2) int array
        Row m lives at pixel (pixel_of_row[m, 0], pixel_of_row[m, 1]).
    row_of_pixel : (d1, d2) int array
        Inverse map; -1 for masked-out cells.
    mask : (d1, d2) bool array
        True where a cell is annotated.
    """

    def __init__(self, height: int, width: int, pixels: np.ndarray):
        if height < 1 or width < 1:
            raise ValueError(f"grid must be at least 1x1, got {height}x{width}")
        pixels = np.asarray(pixels, dtype=int)
        if pixels.ndim != 2 or pixels.shape[1] != 2 or pixels.shape[0] < 1:
            raise ValueError("pixels must be a nonempty (M, 2) array")
        if np.any(pixels < 0) or np.any(pixels[:, 0] >= height) or np.any(pixels[:, 1] >= width):
            raise ValueError("pixel coordinates outside the grid")

        row_of_pixel = np.full((height, width), -1, dtype=int)
        for m, (i, j) in enumerate(pixels):
            if row_of_pixel[i, j] != -1:
                raise ValueError(f"pixel ({i}, {j}) assigned to more than one row")
            row_of_pixel[i, j] = m

        self.height = int(height)
        self.width = int(width)
        self.pixel_of_row = pixels
        self.row_of_pixel = row_of_pixel
        self.mask = row_of_pixel >= 0

    @classmethod
    def full(cls, height: int, width: int) -> "GridGeometry":
        """Full rectangular grid, rows in row-major pixel order."""
        ii, jj = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
        return cls(height, width, np.column_stack([ii.ravel(), jj.ravel()]))

    @property
    def n_rows(self) -> int:
        return self.pixel_of_row.shape[0]

    def to_image(self, values: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Scatter a length-M vector onto the grid; masked cells get `fill`."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_rows,):
            raise ValueError(
                f"expected {self.n_rows} values, got shape {values.shape}"
            )
        img = np.full((self.height, self.width), fill, dtype=float)
        img[self.pixel_of_row[:, 0], self.pixel_of_row[:, 1]] = values
        return img

    def from_image(self, img: np.ndarray) -> np.ndarray:
        """Gather the annotated cells of a d1 x d2 image into a row vector."""
        img = np.asarray(img, dtype=float)
        if img.shape != (self.height, self.width):
            raise ValueError(
                f"expected image of shape ({self.height}, {self.width}), "
                f"got {img.shape}"
            )
        return img[self.pixel_of_row[:, 0], self.pixel_of_row[:, 1]].copy()
