"""Histogram accumulation and key-block selection tests."""

import numpy as np
import pytest

from mfikit.histokey import (
    Histogram2D,
    KeyBlockSet,
    build_histogram,
    histogram_to_csv,
    select_key_blocks,
)


def complex_cloud(rng, n, scale=1.0):
    return (rng.normal(size=n) + 1j * rng.normal(size=n)) * scale


class TestBuildHistogram:
    def test_point_mass_at_origin(self):
        sym = np.zeros(1000, dtype=np.complex128)
        hist = build_histogram(sym, 80, 1.6)
        assert hist.counts[40, 40] == 1000
        assert hist.total == 1000
        assert np.count_nonzero(hist.counts) == 1

    def test_count_conservation(self):
        rng = np.random.default_rng(1)
        sym = complex_cloud(rng, 20000)
        hist = build_histogram(sym, 80, 1.6)
        assert hist.total == 20000

    def test_out_of_extent_clamps_to_edges(self):
        sym = np.array([10 + 10j, -10 - 10j, 10 - 10j, -10 + 10j, 0j])
        hist = build_histogram(sym, 80, 1.6)
        assert hist.total == 5
        assert hist.counts[79, 79] == 1
        assert hist.counts[0, 0] == 1
        assert hist.counts[0, 79] + hist.counts[79, 0] == 2

    def test_bin_geometry(self):
        # one symbol just right of the origin lands in bin (40, 40)
        hist = build_histogram(np.array([0.01 + 0.01j]), 80, 1.6)
        assert hist.counts[40, 40] == 1
        centers = hist.bin_centers(np.array([40]), np.array([40]))
        assert np.max(np.abs(centers - np.array([[0.02, 0.02]]))) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_histogram(np.array([], dtype=np.complex128), 80, 1.6)

    def test_bad_extent_rejected(self):
        with pytest.raises(ValueError):
            build_histogram(np.ones(4, dtype=np.complex128), 80, 0.0)


class TestSelectKeyBlocks:
    def test_single_nonzero_bin(self):
        hist = build_histogram(np.zeros(10, dtype=np.complex128), 80, 1.6)
        blocks = select_key_blocks(hist)
        assert len(blocks) == 1
        assert blocks.heights[0] == 10

    def test_cardinality_is_min_of_limit_and_nonzero(self):
        rng = np.random.default_rng(2)
        for n, scale in ((50, 0.3), (5000, 1.0), (200000, 1.0)):
            hist = build_histogram(complex_cloud(rng, n), 80, 1.6)
            blocks = select_key_blocks(hist, 640)
            nonzero = int(np.count_nonzero(hist.counts))
            assert len(blocks) == min(640, nonzero)

    def test_height_ordering(self):
        rng = np.random.default_rng(3)
        hist = build_histogram(complex_cloud(rng, 100000), 80, 1.6)
        blocks = select_key_blocks(hist, 640)
        unselected = hist.counts.copy().astype(np.int64)
        rows = np.round((blocks.points[:, 0] + 1.6) / (3.2 / 80) - 0.5).astype(int)
        cols = np.round((blocks.points[:, 1] + 1.6) / (3.2 / 80) - 0.5).astype(int)
        unselected[rows, cols] = -1
        floor = unselected.max()
        assert blocks.heights.min() >= floor

    def test_tie_break_deterministic_700_equal_bins(self):
        counts = np.zeros((80, 80), dtype=np.int64)
        flat = np.arange(700)
        counts[flat // 80, flat % 80] = 1
        hist = Histogram2D(counts=counts, extent=1.6, grid_size=80)
        a = select_key_blocks(hist, 640)
        b = select_key_blocks(hist, 640)
        assert len(a) == 640
        assert np.array_equal(a.points, b.points)
        # ties resolve by row then column: the last 60 flat positions lose
        kept_flat = np.sort(
            np.round((a.points[:, 0] + 1.6) / 0.04 - 0.5) * 80
            + np.round((a.points[:, 1] + 1.6) / 0.04 - 0.5)
        ).astype(int)
        assert np.array_equal(kept_flat, np.arange(640))

    def test_points_distinct(self):
        rng = np.random.default_rng(4)
        hist = build_histogram(complex_cloud(rng, 30000), 80, 1.6)
        blocks = select_key_blocks(hist, 640)
        assert np.unique(blocks.points, axis=0).shape[0] == len(blocks)

    def test_all_zero_histogram_rejected(self):
        hist = Histogram2D(counts=np.zeros((80, 80), dtype=np.int64), extent=1.6, grid_size=80)
        with pytest.raises(ValueError):
            select_key_blocks(hist)

    def test_quarter_turn_rotates_histogram_exactly(self):
        rng = np.random.default_rng(5)
        sym = complex_cloud(rng, 50000, scale=0.5)
        base = build_histogram(sym, 80, 1.6)
        turned = build_histogram(sym * 1j, 80, 1.6)
        # (x, y) -> (-y, x): new row 79 - col, new column the old row
        assert np.array_equal(turned.counts, np.flipud(base.counts.T))

    def test_quarter_turn_preserves_downstream_cluster_count(self):
        from mfikit.cluster import best_k

        rng = np.random.default_rng(7)
        centers = np.array([a + 1j * b for a in (-1, 1) for b in (-1, 1)]) / np.sqrt(2)
        sym = (
            np.repeat(centers, 4000)
            + (rng.normal(size=16000) + 1j * rng.normal(size=16000)) * 0.05
        )
        k_base = best_k(select_key_blocks(build_histogram(sym, 80, 1.6), 640), seed=0).k_star
        k_turn = best_k(select_key_blocks(build_histogram(sym * 1j, 80, 1.6), 640), seed=0).k_star
        assert k_base == k_turn == 4


class TestCsvExport:
    def test_shape_and_conservation(self):
        rng = np.random.default_rng(6)
        hist = build_histogram(complex_cloud(rng, 5000), 80, 1.6)
        text = histogram_to_csv(hist)
        rows = text.strip().split("\n")
        assert len(rows) == 80
        total = sum(sum(int(v) for v in row.split(",")) for row in rows)
        assert total == hist.total
        assert all(len(row.split(",")) == 80 for row in rows)
