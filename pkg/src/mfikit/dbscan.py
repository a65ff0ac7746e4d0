"""Density-based baseline classifier for the runtime comparison.

DBSCAN runs on the full phase-recovered symbol cloud rather than on key
blocks, so its cost scales with capture length. A uniform-grid spatial
index with cell side eps keeps the neighbor queries competent; the point
of the baseline is a fair runtime comparison, not a strawman.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from importlib import resources

import numpy as np

from mfikit.frontend import BpsConfig, bps_4qam, power_normalize
from mfikit.sim import ModFormat

NOISE = -1
_UNVISITED = -2


@dataclass
class DbscanParams:
    """Neighborhood radius and density threshold.

    ``min_pts`` counts the point itself, so a point with ``min_pts - 1``
    genuine neighbors within ``eps`` is a core point.
    """

    eps: float
    min_pts: int

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")


class _GridIndex:
    """Uniform grid over the plane with cell side eps; 3x3 block queries."""

    def __init__(self, points: np.ndarray, eps: float) -> None:
        self.points = points
        self.eps = eps
        cells = np.floor(points / eps).astype(np.int64)
        # pack the two cell coordinates into one sortable key
        key = (cells[:, 0] << 32) ^ (cells[:, 1] & 0xFFFFFFFF)
        self.order = np.argsort(key, kind="stable")
        sorted_key = key[self.order]
        uniq, starts = np.unique(sorted_key, return_index=True)
        ends = np.append(starts[1:], key.size)
        self.slices = {int(u): (int(s), int(e)) for u, s, e in zip(uniq, starts, ends)}
        self.cells = cells

    def neighbors(self, i: int) -> np.ndarray:
        """Indices of all points within eps of point i, inclusive of i."""
        cx, cy = self.cells[i]
        chunks = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                k = int(((cx + dx) << 32) ^ ((cy + dy) & 0xFFFFFFFF))
                span = self.slices.get(k)
                if span is not None:
                    chunks.append(self.order[span[0] : span[1]])
        cand = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
        d = self.points[cand] - self.points[i]
        return cand[(d[:, 0] ** 2 + d[:, 1] ** 2) <= self.eps**2]


def dbscan(points: np.ndarray, params: DbscanParams) -> np.ndarray:
    """Label points by standard DBSCAN semantics; noise is labeled -1.

    Core points have at least ``min_pts`` neighbors within ``eps``
    (themselves included); clusters grow by density reachability, border
    points join the first cluster that discovers them, and everything else
    is noise. Labels are deterministic for a fixed point order.

    Parameters
    ----------
    points : np.ndarray
        (n, 2) point set, non-empty.
    params : DbscanParams
        Radius and density threshold.

    Returns
    -------
    np.ndarray
        Integer label per point: 0..n_clusters-1, or -1 for noise.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, 2) array")
    n = points.shape[0]
    index = _GridIndex(points, params.eps)
    labels = np.full(n, _UNVISITED, dtype=np.int64)
    cid = 0
    for i in range(n):
        if labels[i] != _UNVISITED:
            continue
        neigh = index.neighbors(i)
        if neigh.size < params.min_pts:
            labels[i] = NOISE
            continue
        labels[i] = cid
        queue: deque[int] = deque()
        # claim points as they are enqueued so each enters the queue once
        for j in neigh:
            if labels[j] == NOISE:
                labels[j] = cid
            elif labels[j] == _UNVISITED:
                labels[j] = cid
                queue.append(int(j))
        while queue:
            p = queue.popleft()
            pn = index.neighbors(p)
            if pn.size < params.min_pts:
                continue
            for j in pn:
                if labels[j] == NOISE:
                    labels[j] = cid
                elif labels[j] == _UNVISITED:
                    labels[j] = cid
                    queue.append(int(j))
        cid += 1
    return labels


def cluster_count(labels: np.ndarray) -> int:
    """Number of non-noise clusters in a dbscan labeling."""
    labels = np.asarray(labels)
    return int(labels.max(initial=NOISE)) + 1


def dbscan_mfi(symbols: np.ndarray, params: DbscanParams, table=None, bps: BpsConfig | None = None):
    """Classify a capture by counting DBSCAN clusters of the symbol cloud.

    The front end matches the proposed pipeline (power normalization and
    four-point blind phase search); the non-noise cluster count then maps
    through the same decision table, so the comparison isolates the
    clustering stage.

    Parameters
    ----------
    symbols : np.ndarray
        Complex symbol-rate capture, non-empty.
    params : DbscanParams
        Calibrated neighborhood settings for the expected capture length.
    table : DecisionTable, optional
        Decision table; the packaged calibration is used when omitted.
    bps : BpsConfig, optional
        Phase-search settings.

    Returns
    -------
    ModFormat or None
        The decided format, or None for rejection.
    """
    from mfikit.mfi import default_decision_table

    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 1 or symbols.size == 0:
        raise ValueError("symbols must be a non-empty 1-D array")
    if table is None:
        table = default_decision_table()
    recovered = power_normalize(bps_4qam(power_normalize(symbols), bps or BpsConfig()))
    pts = np.column_stack([recovered.real, recovered.imag])
    labels = dbscan(pts, params)
    return table.decide(cluster_count(labels))


def calibrated_params(fmt: ModFormat, n_symbols: int) -> DbscanParams:
    """Per-format parameters from the packaged calibration, density-scaled.

    The packaged values were calibrated at a reference capture length; the
    density threshold scales proportionally with the actual length so the
    same eps keeps working across capture sizes.
    """
    text = resources.files("mfikit.data").joinpath("dbscan_params.json").read_text("utf-8")
    data = json.loads(text)
    entry = data["formats"][fmt.value]
    n_ref = int(data["n_ref"])
    min_pts = max(4, round(entry["min_pts_ref"] * n_symbols / n_ref))
    return DbscanParams(eps=float(entry["eps"]), min_pts=int(min_pts))
