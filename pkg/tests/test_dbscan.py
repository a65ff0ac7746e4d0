"""Density-clustering baseline tests, including a brute-force oracle."""

import numpy as np
import pytest

from mfikit.dbscan import (
    NOISE,
    DbscanParams,
    calibrated_params,
    cluster_count,
    dbscan,
    dbscan_mfi,
)
from mfikit.sim import ModFormat
from tests.conftest import received_symbols


def naive_dbscan(points, eps, min_pts):
    """Reference implementation with quadratic neighbor search.

    Mirrors the production semantics exactly: points are visited in index
    order, clusters expand breadth-first, border points keep the label of
    the first cluster that reaches them.
    """
    n = points.shape[0]
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    neigh = [np.nonzero(d2[i] <= eps * eps)[0] for i in range(n)]
    labels = np.full(n, -2, dtype=np.int64)
    cid = 0
    for i in range(n):
        if labels[i] != -2:
            continue
        if neigh[i].size < min_pts:
            labels[i] = NOISE
            continue
        labels[i] = cid
        queue = []
        for j in neigh[i]:
            if labels[j] in (NOISE, -2):
                if labels[j] == -2:
                    queue.append(int(j))
                labels[j] = cid
        while queue:
            p = queue.pop(0)
            if neigh[p].size < min_pts:
                continue
            for j in neigh[p]:
                if labels[j] in (NOISE, -2):
                    if labels[j] == -2:
                        queue.append(int(j))
                    labels[j] = cid
        cid += 1
    return labels


def mixed_instance(rng):
    """Random mix of tight blobs and background scatter."""
    blobs = int(rng.integers(1, 5))
    parts = []
    for _ in range(blobs):
        c = rng.uniform(-2, 2, size=2)
        parts.append(c + rng.normal(scale=rng.uniform(0.02, 0.3), size=(int(rng.integers(10, 80)), 2)))
    parts.append(rng.uniform(-3, 3, size=(int(rng.integers(5, 40)), 2)))
    return np.concatenate(parts)


class TestDbscan:
    def test_two_separated_groups(self):
        rng = np.random.default_rng(0)
        eps = 0.25
        a = rng.normal(scale=0.1, size=(50, 2))
        b = np.array([10 * eps, 0.0]) + rng.normal(scale=0.1, size=(50, 2))
        labels = dbscan(np.concatenate([a, b]), DbscanParams(eps=eps, min_pts=5))
        assert cluster_count(labels) == 2
        assert np.count_nonzero(labels == NOISE) == 0
        assert len(set(labels[:50].tolist())) == 1
        assert len(set(labels[50:].tolist())) == 1

    def test_all_isolated_points_are_noise(self):
        xs = np.arange(20, dtype=np.float64) * 5.0
        pts = np.column_stack([xs, np.zeros(20)])
        labels = dbscan(pts, DbscanParams(eps=1.0, min_pts=2))
        assert np.all(labels == NOISE)
        assert cluster_count(labels) == 0

    def test_min_pts_one_makes_every_point_core(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(-5, 5, size=(40, 2))
        labels = dbscan(pts, DbscanParams(eps=0.5, min_pts=1))
        assert np.count_nonzero(labels == NOISE) == 0

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(2)
        for trial in range(50):
            pts = mixed_instance(rng)
            eps = float(rng.uniform(0.05, 0.6))
            min_pts = int(rng.integers(2, 12))
            got = dbscan(pts, DbscanParams(eps=eps, min_pts=min_pts))
            want = naive_dbscan(pts, eps, min_pts)
            assert np.array_equal(got, want), trial

    def test_cluster_count_invariant_under_shuffles(self):
        rng = np.random.default_rng(3)
        pts = mixed_instance(rng)
        params = DbscanParams(eps=0.2, min_pts=5)
        base = cluster_count(dbscan(pts, params))
        for _ in range(10):
            perm = rng.permutation(pts.shape[0])
            assert cluster_count(dbscan(pts[perm], params)) == base

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        pts = mixed_instance(rng)
        params = DbscanParams(eps=0.15, min_pts=4)
        assert np.array_equal(dbscan(pts, params), dbscan(pts, params))

    def test_params_validated(self):
        with pytest.raises(ValueError):
            DbscanParams(eps=0.0, min_pts=3)
        with pytest.raises(ValueError):
            DbscanParams(eps=0.1, min_pts=0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dbscan(np.empty((0, 2)), DbscanParams(eps=0.1, min_pts=2))


class TestCalibratedParams:
    def test_min_pts_scales_with_capture_length(self):
        full = calibrated_params(ModFormat.QAM16, 65536)
        tenth = calibrated_params(ModFormat.QAM16, 6554)
        assert full.eps == tenth.eps
        assert abs(tenth.min_pts - full.min_pts / 10) <= 1

    def test_floor_for_tiny_captures(self):
        tiny = calibrated_params(ModFormat.QAM64, 10)
        assert tiny.min_pts >= 4


class TestDbscanMfi:
    def test_qpsk_at_20db(self):
        sym = received_symbols(ModFormat.QPSK, 20.0, 301, n=32768)
        fmt = dbscan_mfi(sym, calibrated_params(ModFormat.QPSK, sym.size))
        assert fmt is ModFormat.QPSK

    def test_8psk_at_20db(self):
        sym = received_symbols(ModFormat.PSK8, 20.0, 302, n=32768)
        fmt = dbscan_mfi(sym, calibrated_params(ModFormat.PSK8, sym.size))
        assert fmt is ModFormat.PSK8

    def test_16qam_at_25db_sixteen_clusters(self):
        from mfikit.frontend import BpsConfig, bps_4qam, power_normalize

        sym = received_symbols(ModFormat.QAM16, 25.0, 303)
        rec = power_normalize(bps_4qam(power_normalize(sym), BpsConfig()))
        pts = np.column_stack([rec.real, rec.imag])
        labels = dbscan(pts, calibrated_params(ModFormat.QAM16, sym.size))
        assert cluster_count(labels) == 16

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dbscan_mfi(np.array([], dtype=np.complex128), DbscanParams(eps=0.1, min_pts=2))
