"""2D constellation histogram and key-block selection.

The identification pipeline does not cluster raw symbols. It bins them on a
fixed square grid, keeps the most populated bins, and clusters those bin
centers (the "key blocks"), weighting each by its count. This caps the
clustering problem size regardless of how many symbols were captured.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

DEFAULT_GRID_SIZE = 80
DEFAULT_EXTENT = 1.6
DEFAULT_KEY_COUNT = 640


@dataclass
class Histogram2D:
    """Square occupancy histogram over ``[-extent, extent]^2``.

    ``counts[i, j]`` is the number of symbols whose real part fell in row
    ``i`` and imaginary part in column ``j``.
    """

    counts: np.ndarray
    extent: float
    grid_size: int

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (self.grid_size, self.grid_size):
            raise ValueError("counts must be a grid_size x grid_size array")
        if self.extent <= 0:
            raise ValueError("extent must be positive")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def bin_centers(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Coordinates of the centers of the given bins, shape (n, 2)."""
        width = 2.0 * self.extent / self.grid_size
        x = -self.extent + (np.asarray(rows) + 0.5) * width
        y = -self.extent + (np.asarray(cols) + 0.5) * width
        return np.column_stack([x, y])


@dataclass
class KeyBlockSet:
    """Centers and counts of the selected key bins.

    ``points[i]`` is the (x, y) bin center and ``heights[i]`` its count,
    sorted by descending count with row-then-column order breaking ties.
    """

    points: np.ndarray
    heights: np.ndarray

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64)
        self.heights = np.asarray(self.heights, dtype=np.int64)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        if self.heights.shape != (self.points.shape[0],):
            raise ValueError("heights must match points")
        if self.points.shape[0] == 0:
            raise ValueError("key-block set must be non-empty")
        if np.any(self.heights <= 0):
            raise ValueError("heights must be positive")

    def __len__(self) -> int:
        return int(self.points.shape[0])


def build_histogram(
    symbols: np.ndarray,
    grid_size: int = DEFAULT_GRID_SIZE,
    extent: float = DEFAULT_EXTENT,
) -> Histogram2D:
    """Bin complex symbols onto a ``grid_size`` x ``grid_size`` occupancy grid.

    The grid spans ``[-extent, extent]`` on each axis; symbols outside are
    clamped into the edge bins so the total count always equals the number
    of symbols.

    Parameters
    ----------
    symbols : np.ndarray
        Complex symbol sequence, non-empty.
    grid_size : int
        Bins per axis, at least 2.
    extent : float
        Half-width of the grid, positive.

    Returns
    -------
    Histogram2D
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 1 or symbols.size == 0:
        raise ValueError("symbols must be a non-empty 1-D array")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    if extent <= 0:
        raise ValueError("extent must be positive")
    width = 2.0 * extent / grid_size
    rows = np.clip(np.floor((symbols.real + extent) / width).astype(np.int64), 0, grid_size - 1)
    cols = np.clip(np.floor((symbols.imag + extent) / width).astype(np.int64), 0, grid_size - 1)
    flat = np.bincount(rows * grid_size + cols, minlength=grid_size * grid_size)
    return Histogram2D(counts=flat.reshape(grid_size, grid_size), extent=extent, grid_size=grid_size)


def select_key_blocks(hist: Histogram2D, count: int = DEFAULT_KEY_COUNT) -> KeyBlockSet:
    """Select the `count` most populated non-empty bins as key blocks.

    Bins are ranked by descending count; ties break on (row, column) so the
    selection is fully deterministic. If fewer than `count` bins are
    occupied, all occupied bins are returned.

    Parameters
    ----------
    hist : Histogram2D
        Source histogram with at least one non-zero bin.
    count : int
        Number of key blocks requested, at least 1.

    Returns
    -------
    KeyBlockSet
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rows, cols = np.nonzero(hist.counts)
    if rows.size == 0:
        raise ValueError("histogram is empty")
    heights = hist.counts[rows, cols]
    order = np.lexsort((cols, rows, -heights))
    take = order[: min(count, order.size)]
    return KeyBlockSet(points=hist.bin_centers(rows[take], cols[take]), heights=heights[take])


def histogram_to_csv(hist: Histogram2D) -> str:
    """Render a histogram as CSV text: one row per grid row, integer counts."""
    buf = io.StringIO()
    for row in hist.counts:
        buf.write(",".join(str(int(v)) for v in row))
        buf.write("\n")
    return buf.getvalue()
