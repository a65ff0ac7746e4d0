"""Weighted k-partitioning, silhouette scoring, and the cluster-count sweep.

The sweep scores the same point set at every candidate count k with a
silhouette-style figure of merit f and reports the k maximizing f. The
candidate partitions form a chain grown one center at a time: the k-th
partition starts from the refined centers of the (k-1)-th plus the point
farthest from all of them, so consecutive partitions stay comparable and
the sweep is deterministic for a given point set. ``partition_k`` offers
independent multi-restart clustering at a single k.

The score's in-cluster term averages over all members of the point's own
cluster including the point itself (divisor ``|c|``, not ``|c| - 1``); a
point in a singleton cluster therefore scores 1 whenever any other
cluster exists at a positive distance. ``mode="classical"`` switches to
the textbook convention (divisor ``|c| - 1``, singletons score 0) for
cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mfikit.histokey import KeyBlockSet

DEFAULT_MAX_K = 100
DEFAULT_N_INIT = 4
DEFAULT_MAX_ITER = 100


@dataclass
class Partition:
    """A hard assignment of points to ``k`` non-empty clusters."""

    centers: np.ndarray
    assignment: np.ndarray

    def __post_init__(self) -> None:
        self.centers = np.asarray(self.centers, dtype=np.float64)
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.centers.ndim != 2 or self.centers.shape[1] != 2:
            raise ValueError("centers must have shape (k, 2)")
        if self.assignment.ndim != 1:
            raise ValueError("assignment must be 1-D")
        k = self.centers.shape[0]
        if k < 1:
            raise ValueError("need at least one cluster")
        if self.assignment.min(initial=0) < 0 or self.assignment.max(initial=0) >= k:
            raise ValueError("assignment labels out of range")
        sizes = np.bincount(self.assignment, minlength=k)
        if np.any(sizes == 0):
            raise ValueError("every cluster must be non-empty")

    @property
    def k(self) -> int:
        return int(self.centers.shape[0])


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix of a (n, 2) point set."""
    points = np.asarray(points, dtype=np.float64)
    return np.hypot(
        points[:, 0][:, None] - points[:, 0][None, :],
        points[:, 1][:, None] - points[:, 1][None, :],
    )


def _as_points(points) -> np.ndarray:
    """Accept a (n, 2) array or a KeyBlockSet and return the coordinates."""
    if isinstance(points, KeyBlockSet):
        points = points.points
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    if points.shape[0] == 0:
        raise ValueError("points must be non-empty")
    return points


def _farthest_point_init(points: np.ndarray, k: int, rng: np.random.Generator, restarts: int) -> np.ndarray:
    """Greedy farthest-point centers per restart; only the first pick is random.

    Works in squared distances (argmax position is unaffected) and runs all
    restarts in lockstep. Returns (restarts, k, 2) centers.
    """
    n = points.shape[0]
    centers = np.empty((restarts, k, 2))
    centers[:, 0] = points[rng.integers(n, size=restarts)]
    diff = points[None, :, :] - centers[:, 0][:, None, :]
    mind = (diff**2).sum(axis=2)
    for j in range(1, k):
        centers[:, j] = points[np.argmax(mind, axis=1)]
        diff = points[None, :, :] - centers[:, j][:, None, :]
        np.minimum(mind, (diff**2).sum(axis=2), out=mind)
    return centers


def partition_k(
    points: np.ndarray,
    k: int,
    seed=0,
    weights: np.ndarray | None = None,
    n_init: int = DEFAULT_N_INIT,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Partition:
    """Partition points into exactly `k` clusters by weighted Lloyd iteration.

    Each of `n_init` restarts is seeded by greedy farthest-point
    initialization from an independent random starting point, then refined
    with Lloyd updates (nearest-center assignment with ties to the lowest
    index, weight-weighted centroid recomputation). A cluster left empty is
    re-seeded with the point farthest from its assigned center. The restart
    with the lowest weighted within-cluster sum of squared distances wins.

    Parameters
    ----------
    points : np.ndarray or KeyBlockSet
        (n, 2) point set, n >= k. A KeyBlockSet contributes its heights as
        the default weights.
    k : int
        Number of clusters, 1 <= k <= n.
    seed : int, SeedSequence or Generator
        Controls the restart starting points.
    weights : np.ndarray, optional
        Positive per-point weights; defaults to the key-block heights when
        a KeyBlockSet is given, else to 1.
    n_init : int
        Independent restarts, at least 1.
    max_iter : int
        Lloyd iteration cap per restart.

    Returns
    -------
    Partition
        Exactly `k` non-empty clusters.
    """
    if isinstance(points, KeyBlockSet) and weights is None:
        weights = points.heights.astype(np.float64)
    points = _as_points(points)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= len(points)")
    if n_init < 1 or max_iter < 1:
        raise ValueError("n_init and max_iter must be >= 1")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (n,):
            raise ValueError("weights must match points")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")

    if k == n:
        return Partition(centers=points.copy(), assignment=np.arange(n))

    rng = np.random.default_rng(seed)
    r = n_init
    centers = _farthest_point_init(points, k, rng, r)

    x_sq = (points**2).sum(axis=1)
    offsets = (np.arange(r) * k)[:, None]
    w_tiled = np.tile(w, r)
    wx_tiled = np.tile(w * points[:, 0], r)
    wy_tiled = np.tile(w * points[:, 1], r)
    score = np.empty((n, r * k))
    labels = np.full((r, n), -1, dtype=np.int64)
    converged = False
    for _ in range(max_iter):
        # score = |x - c|^2 - |x|^2; the dropped |x|^2 never affects the argmin,
        # and ties still resolve to the lowest cluster index
        flat_centers = centers.reshape(r * k, 2)
        np.matmul(points, flat_centers.T, out=score)
        score *= -2.0
        score += (flat_centers**2).sum(axis=1)
        new_labels = np.ascontiguousarray(score.reshape(n, r, k).argmin(axis=2).T)

        reseeded = False
        own = None
        while True:
            flat = (new_labels + offsets).ravel()
            wsum = np.bincount(flat, weights=w_tiled, minlength=r * k)
            empty = np.nonzero(wsum.reshape(r, k) == 0)
            if empty[0].size == 0:
                break
            # re-seed each empty cluster with the worst-represented point;
            # a move can empty a singleton donor, hence the outer loop
            reseeded = True
            if own is None:
                own = np.take_along_axis(
                    score.reshape(n, r, k), new_labels.T[:, :, None], axis=2
                )[:, :, 0].T + x_sq
            for ri, ki in zip(*empty):
                far = int(np.argmax(own[ri]))
                centers[ri, ki] = points[far]
                new_labels[ri, far] = ki
                own[ri, far] = -np.inf

        converged = not reseeded and bool(np.array_equal(new_labels, labels))
        labels = new_labels
        if converged:
            # at a fixed point the centroid update is a no-op, so labels,
            # centers, and score are already mutually consistent
            break
        centers[:, :, 0] = (np.bincount(flat, weights=wx_tiled, minlength=r * k) / wsum).reshape(r, k)
        centers[:, :, 1] = (np.bincount(flat, weights=wy_tiled, minlength=r * k) / wsum).reshape(r, k)

    if not converged:
        # stopped at the iteration cap; realign assignment with the centers
        flat_centers = centers.reshape(r * k, 2)
        np.matmul(points, flat_centers.T, out=score)
        score *= -2.0
        score += (flat_centers**2).sum(axis=1)
        labels = np.ascontiguousarray(score.reshape(n, r, k).argmin(axis=2).T)

    own = np.take_along_axis(score.reshape(n, r, k), labels.T[:, :, None], axis=2)[:, :, 0].T + x_sq
    wcss = (np.maximum(own, 0.0) * w[None, :]).sum(axis=1)
    best = int(np.argmin(wcss))

    final_labels = labels[best].copy()
    final_centers = centers[best].copy()
    own_b = own[best].copy()
    while True:
        # a cap-stop realignment may have emptied a cluster; repair until none
        sizes = np.bincount(final_labels, minlength=k)
        empties = np.nonzero(sizes == 0)[0]
        if empties.size == 0:
            break
        for ki in empties:
            far = int(np.argmax(own_b))
            final_centers[ki] = points[far]
            final_labels[far] = ki
            own_b[far] = -np.inf
    return Partition(centers=final_centers, assignment=final_labels)


def _lloyd_refine(
    points: np.ndarray,
    w: np.ndarray,
    centers: np.ndarray,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Refine one set of centers in place; returns (centers, labels).

    Same update rules as partition_k (nearest center with ties to the
    lowest index, weighted centroids, empty clusters re-seeded with the
    worst-represented point) for a single start.
    """
    n = points.shape[0]
    k = centers.shape[0]
    x_sq = (points**2).sum(axis=1)
    wx = w * points[:, 0]
    wy = w * points[:, 1]
    score = np.empty((n, k))
    labels = np.full(n, -1, dtype=np.int64)
    converged = False
    for _ in range(max_iter):
        np.matmul(points, centers.T, out=score)
        score *= -2.0
        score += (centers**2).sum(axis=1)
        new_labels = score.argmin(axis=1)

        reseeded = False
        own = None
        while True:
            wsum = np.bincount(new_labels, weights=w, minlength=k)
            empty = np.nonzero(wsum == 0)[0]
            if empty.size == 0:
                break
            reseeded = True
            if own is None:
                own = score[np.arange(n), new_labels] + x_sq
            for ki in empty:
                far = int(np.argmax(own))
                centers[ki] = points[far]
                new_labels[far] = ki
                own[far] = -np.inf

        converged = not reseeded and bool(np.array_equal(new_labels, labels))
        labels = new_labels
        if converged:
            break
        centers[:, 0] = np.bincount(labels, weights=wx, minlength=k) / wsum
        centers[:, 1] = np.bincount(labels, weights=wy, minlength=k) / wsum

    if not converged:
        np.matmul(points, centers.T, out=score)
        score *= -2.0
        score += (centers**2).sum(axis=1)
        labels = score.argmin(axis=1)
        own = score[np.arange(n), labels] + x_sq
        while True:
            sizes = np.bincount(labels, minlength=k)
            empties = np.nonzero(sizes == 0)[0]
            if empties.size == 0:
                break
            for ki in empties:
                far = int(np.argmax(own))
                centers[ki] = points[far]
                labels[far] = ki
                own[far] = -np.inf
    return centers, labels


def _cluster_mean_distances(dist: np.ndarray, assignment: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean distance from every point to every cluster, plus cluster sizes.

    Returns ``(m, sizes)`` where ``m[i, q]`` averages over all members of
    cluster q, including point i itself when it belongs to q.
    """
    order = np.argsort(assignment, kind="stable")
    sizes = np.bincount(assignment, minlength=k)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    sums = np.add.reduceat(dist[:, order], starts, axis=1)
    return sums / sizes, sizes


def silhouette_values(
    points: np.ndarray,
    assignment: np.ndarray,
    mode: str = "self_inclusive",
    dist: np.ndarray | None = None,
) -> np.ndarray:
    """Per-point silhouette of a partition into at least two clusters.

    In ``"self_inclusive"`` mode the in-cluster mean distance divides by the full
    cluster size (the point's zero self-distance is included), and a 0/0
    score is defined as 0. In ``"classical"`` mode the divisor is
    ``size - 1`` and singleton clusters score 0.

    Parameters
    ----------
    points : np.ndarray
        (n, 2) point set.
    assignment : np.ndarray
        Cluster label per point; every label in ``range(k)`` must occur.
    mode : str
        ``"self_inclusive"`` or ``"classical"``.
    dist : np.ndarray, optional
        Precomputed (n, n) distance matrix.

    Returns
    -------
    np.ndarray
        Silhouette value per point, each in [-1, 1].
    """
    points = _as_points(points)
    assignment = np.asarray(assignment, dtype=np.int64)
    n = points.shape[0]
    if assignment.shape != (n,):
        raise ValueError("assignment must match points")
    if mode not in ("self_inclusive", "classical"):
        raise ValueError("mode must be 'self_inclusive' or 'classical'")
    k = int(assignment.max()) + 1
    if k < 2:
        raise ValueError("silhouette needs at least two clusters")
    sizes = np.bincount(assignment, minlength=k)
    if np.any(sizes == 0):
        raise ValueError("every cluster must be non-empty")
    if dist is None:
        dist = pairwise_distances(points)

    m, sizes = _cluster_mean_distances(dist, assignment, k)
    idx = np.arange(n)
    inner = m[idx, assignment]
    m_out = m.copy()
    m_out[idx, assignment] = np.inf
    outer = m_out.min(axis=1)

    if mode == "classical":
        own_size = sizes[assignment]
        with np.errstate(invalid="ignore"):
            inner = np.where(own_size > 1, inner * own_size / np.maximum(own_size - 1, 1), 0.0)
        sil = np.zeros(n)
        nontrivial = own_size > 1
        denom = np.maximum(inner, outer)
        np.divide(outer - inner, denom, out=sil, where=nontrivial & (denom > 0))
        return sil

    denom = np.maximum(inner, outer)
    sil = np.zeros(n)
    np.divide(outer - inner, denom, out=sil, where=denom > 0)
    return sil


def silhouette_f(
    points: np.ndarray,
    assignment: np.ndarray,
    mode: str = "self_inclusive",
    dist: np.ndarray | None = None,
) -> float:
    """Partition figure of merit: the mean per-point silhouette."""
    return float(np.mean(silhouette_values(points, assignment, mode=mode, dist=dist)))


@dataclass
class KsweepResult:
    """Outcome of scoring every candidate cluster count up to the limit m."""

    k_values: np.ndarray
    f_values: np.ndarray
    k_star: int
    m: int = DEFAULT_MAX_K

    def __post_init__(self) -> None:
        self.k_values = np.asarray(self.k_values, dtype=np.int64)
        self.f_values = np.asarray(self.f_values, dtype=np.float64)
        if self.k_values.shape != self.f_values.shape or self.k_values.ndim != 1:
            raise ValueError("k_values and f_values must be matching 1-D arrays")

    @property
    def f_star(self) -> float:
        return float(self.f_values[int(np.argmax(self.f_values))])

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(f) for k, f in zip(self.k_values, self.f_values)}

    def to_csv(self) -> str:
        lines = ["k,f"]
        lines += [f"{int(k)},{f:.12g}" for k, f in zip(self.k_values, self.f_values)]
        return "\n".join(lines) + "\n"


def best_k(
    points: np.ndarray,
    m: int = DEFAULT_MAX_K,
    seed=0,
    weights: np.ndarray | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    mode: str = "self_inclusive",
) -> KsweepResult:
    """Sweep cluster counts k = 2..min(m, n) and maximize the silhouette f.

    The candidate partitions form a chain: each k starts from the refined
    centers of k - 1 plus one new center at the point farthest from all
    current centers, then is refined with the same weighted Lloyd updates
    as :func:`partition_k`. The chain starts at the weighted mean (k = 1).
    Growing the series this way keeps consecutive partitions comparable
    and makes the sweep fully deterministic for a given point set.

    The partition at each k uses the given weights; the silhouette itself
    is always evaluated on the unweighted point set. Ties in f resolve to
    the smallest k.

    Parameters
    ----------
    points : np.ndarray or KeyBlockSet
        (n, 2) point set with n >= 2. A KeyBlockSet contributes its heights
        as the default partition weights (pass ``points.points`` to sweep
        unweighted).
    m : int
        Upper end of the sweep, at least 2.
    seed : int
        Accepted for interface stability; the chained sweep draws no
        random numbers.
    weights : np.ndarray, optional
        Positive per-point partition weights.
    max_iter : int
        Lloyd iteration cap per k.
    mode : str
        Silhouette convention, ``"self_inclusive"`` or ``"classical"``.

    Returns
    -------
    KsweepResult
    """
    if isinstance(points, KeyBlockSet) and weights is None:
        weights = points.heights.astype(np.float64)
    points = _as_points(points)
    n = points.shape[0]
    if n < 2:
        raise ValueError("need at least two points to sweep k")
    if m < 2:
        raise ValueError("m must be >= 2")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (n,):
            raise ValueError("weights must match points")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
    ks = np.arange(2, min(m, n) + 1)
    dist = pairwise_distances(points)
    fs = np.empty(ks.size)
    centers = (w @ points / w.sum())[None, :]
    labels = np.zeros(n, dtype=np.int64)
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for i in range(ks.size):
        far = int(np.argmax(d2))
        centers = np.vstack([centers, points[far][None, :]])
        centers, labels = _lloyd_refine(points, w, centers, max_iter)
        fs[i] = silhouette_f(points, labels, mode=mode, dist=dist)
        d2 = ((points - centers[labels]) ** 2).sum(axis=1)
    k_star = int(ks[int(np.argmax(fs))])
    return KsweepResult(k_values=ks, f_values=fs, k_star=k_star, m=int(m))
