"""Clustering and cluster-count selection tests.

The silhouette implementation is checked against a deliberately naive
oracle written straight from the defining sums, one point at a time.
"""

import numpy as np
import pytest

from mfikit.cluster import (
    KsweepResult,
    best_k,
    pairwise_distances,
    partition_k,
    silhouette_f,
    silhouette_values,
)
from mfikit.histokey import KeyBlockSet


def naive_silhouette(points, labels, mode="self_inclusive"):
    """Direct per-point evaluation of both silhouette conventions.

    Triple loop, no shared intermediates: the in-cluster term averages
    distances over the point's own cluster (including the zero distance
    to itself in "self_inclusive" mode, over the other members in "classical"
    mode), the out term is the smallest mean distance to another cluster,
    and 0/0 scores 0.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    n = points.shape[0]
    k = int(labels.max()) + 1
    vals = np.empty(n)
    for i in range(n):
        own = labels[i]
        d_own = [float(np.hypot(*(points[i] - points[j]))) for j in range(n) if labels[j] == own]
        if mode == "self_inclusive":
            inner = sum(d_own) / len(d_own)
        else:
            if len(d_own) == 1:
                vals[i] = 0.0
                continue
            inner = (sum(d_own) - 0.0) / (len(d_own) - 1)
        outer = min(
            float(
                np.mean([np.hypot(*(points[i] - points[j])) for j in range(n) if labels[j] == q])
            )
            for q in range(k)
            if q != own
        )
        top = outer - inner
        bottom = max(inner, outer)
        vals[i] = 0.0 if bottom == 0.0 else top / bottom
    return float(np.mean(vals)), vals


def random_instance(rng, n_max=50):
    """Random labeled point set; sometimes degenerate on purpose."""
    n = int(rng.integers(4, n_max + 1))
    k = int(rng.integers(2, min(6, n) + 1))
    pts = rng.normal(size=(n, 2)) * rng.choice([0.01, 1.0, 10.0])
    if rng.random() < 0.3:
        # duplicate a few points to exercise zero distances
        dup = rng.integers(0, n, size=max(2, n // 5))
        pts[dup] = pts[int(dup[0])]
    labels = rng.integers(0, k, size=n)
    # force every cluster to be populated
    labels[rng.permutation(n)[:k]] = np.arange(k)
    return pts, labels


class TestSilhouetteOracle:
    def test_matches_naive_oracle_both_modes(self):
        rng = np.random.default_rng(42)
        for trial in range(200):
            pts, labels = random_instance(rng)
            for mode in ("self_inclusive", "classical"):
                want_f, want_vals = naive_silhouette(pts, labels, mode)
                got_vals = silhouette_values(pts, labels, mode=mode)
                got_f = silhouette_f(pts, labels, mode=mode)
                assert np.max(np.abs(got_vals - want_vals)) < 1e-9, (trial, mode)
                assert abs(got_f - want_f) < 1e-9, (trial, mode)

    def test_worked_two_cluster_instance(self):
        pts = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
        labels = np.array([0, 0, 1, 1])
        # every point: inner mean (with self) = (0 + 1)/2, outer = (10 + sqrt(101))/2
        outer = (10.0 + np.sqrt(101.0)) / 2.0
        want = (outer - 0.5) / outer
        f = silhouette_f(pts, labels, mode="self_inclusive")
        assert abs(f - want) < 1e-12
        assert abs(f - 0.95012) < 1e-4
        # the conventional divisor gives a visibly different value
        f_classical = silhouette_f(pts, labels, mode="classical")
        assert abs(f_classical - (outer - 1.0) / outer) < 1e-12
        assert abs(f_classical - 0.90025) < 1e-4

    def test_singleton_cluster_conventions(self):
        pts = np.array([[0.0, 0.0], [0.2, 0.0], [5.0, 0.0]])
        labels = np.array([0, 0, 1])
        vals_p = silhouette_values(pts, labels, mode="self_inclusive")
        assert vals_p[2] == 1.0
        vals_c = silhouette_values(pts, labels, mode="classical")
        assert vals_c[2] == 0.0

    def test_coincident_points_score_zero(self):
        pts = np.zeros((6, 2))
        labels = np.array([0, 0, 0, 1, 1, 1])
        assert silhouette_f(pts, labels, mode="self_inclusive") == 0.0

    def test_bounds_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            pts, labels = random_instance(rng)
            vals = silhouette_values(pts, labels)
            assert np.all(vals <= 1.0) and np.all(vals >= -1.0)

    def test_rejects_single_cluster(self):
        pts = np.random.default_rng(0).normal(size=(5, 2))
        with pytest.raises(ValueError):
            silhouette_f(pts, np.zeros(5, dtype=int))

    def test_rejects_bad_mode(self):
        pts = np.zeros((4, 2))
        with pytest.raises(ValueError):
            silhouette_f(pts, np.array([0, 0, 1, 1]), mode="other")


class TestPairwiseDistances:
    def test_matches_direct_evaluation(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(40, 2))
        d = pairwise_distances(pts)
        for i in range(40):
            for j in range(40):
                want = float(np.hypot(*(pts[i] - pts[j])))
                assert abs(d[i, j] - want) < 1e-12
        assert np.all(np.diag(d) == 0.0)
        assert np.array_equal(d, d.T)


def four_groups(rng, spread=0.05, per_group=160):
    centers = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    pts = np.concatenate([c + rng.normal(scale=spread, size=(per_group, 2)) for c in centers])
    return pts, centers


class TestPartitionK:
    def test_single_center_is_weighted_mean(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(30, 2))
        w = rng.uniform(1.0, 5.0, size=30)
        part = partition_k(pts, 1, seed=0, weights=w)
        want = (w[:, None] * pts).sum(axis=0) / w.sum()
        assert np.max(np.abs(part.centers[0] - want)) < 1e-12
        assert np.all(part.assignment == 0)

    def test_k_equals_n_zero_dispersion(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(12, 2))
        part = partition_k(pts, 12, seed=0)
        d = pts - part.centers[part.assignment]
        assert np.max(np.abs(d)) < 1e-12
        assert len(set(part.assignment.tolist())) == 12

    def test_recovers_four_planted_groups(self):
        rng = np.random.default_rng(5)
        pts, centers = four_groups(rng)
        part = partition_k(pts, 4, seed=0)
        for c in centers:
            gap = np.hypot(*(part.centers - c).T).min()
            assert gap < 0.02

    def test_assignment_is_nearest_center(self):
        rng = np.random.default_rng(6)
        pts = rng.normal(size=(80, 2))
        part = partition_k(pts, 5, seed=1)
        d2 = ((pts[:, None, :] - part.centers[None, :, :]) ** 2).sum(axis=2)
        own = d2[np.arange(80), part.assignment]
        assert np.all(own <= d2.min(axis=1) + 1e-12)

    def test_no_empty_clusters(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(size=(25, 2))
        for k in (2, 7, 13, 25):
            part = partition_k(pts, k, seed=0)
            assert len(set(part.assignment.tolist())) == k

    def test_k_larger_than_n_rejected(self):
        pts = np.zeros((3, 2))
        with pytest.raises(ValueError):
            partition_k(pts, 4, seed=0)

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(9)
        pts = rng.normal(size=(60, 2))
        a = partition_k(pts, 6, seed=3)
        b = partition_k(pts, 6, seed=3)
        assert np.array_equal(a.centers, b.centers)
        assert np.array_equal(a.assignment, b.assignment)


def sixteen_groups(rng, spread=0.03, per_group=40):
    levels = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)
    centers = np.array([[x, y] for x in levels for y in levels])
    return np.concatenate([c + rng.normal(scale=spread, size=(per_group, 2)) for c in centers])


class TestBestK:
    def test_sixteen_separated_groups(self):
        rng = np.random.default_rng(11)
        pts = sixteen_groups(rng)
        res = best_k(pts, m=30, seed=0)
        assert res.k_star == 16

    def test_four_separated_groups(self):
        rng = np.random.default_rng(12)
        pts, _ = four_groups(rng)
        res = best_k(pts, m=20, seed=0)
        assert res.k_star == 4

    def test_sweep_covers_two_to_min_m_n(self):
        rng = np.random.default_rng(13)
        pts = rng.normal(size=(9, 2))
        res = best_k(pts, m=100, seed=0)
        assert res.k_values.tolist() == list(range(2, 10))
        res = best_k(pts, m=5, seed=0)
        assert res.k_values.tolist() == [2, 3, 4, 5]

    def test_k_star_is_smallest_argmax(self):
        rng = np.random.default_rng(14)
        for _ in range(200):
            n = int(rng.integers(4, 9))
            pts = rng.integers(0, 2, size=(n, 2)).astype(float)
            pts += rng.integers(0, 2, size=(n, 1)) * 4.0
            res = best_k(pts, m=8, seed=0)
            top = res.k_values[res.f_values == res.f_values.max()]
            assert res.k_star == int(top[0])

    def test_all_coincident_points_tie_resolves_to_two(self):
        # every partition of identical points scores 0, so every k ties
        res = best_k(np.zeros((5, 2)), m=5, seed=0)
        assert np.all(res.f_values == 0.0)
        assert res.k_star == 2

    def test_f_curve_exactly_invariant_under_binary_scaling(self):
        rng = np.random.default_rng(15)
        pts = rng.normal(size=(50, 2))
        base = best_k(pts, m=12, seed=0)
        for s in (0.5, 2.0, 4.0):
            scaled = best_k(pts * s, m=12, seed=0)
            assert np.array_equal(base.f_values, scaled.f_values)
            assert scaled.k_star == base.k_star

    def test_f_curve_stable_under_generic_scaling(self):
        rng = np.random.default_rng(16)
        pts = rng.normal(size=(40, 2))
        base = best_k(pts, m=10, seed=0)
        scaled = best_k(pts * 1.7, m=10, seed=0)
        assert np.max(np.abs(base.f_values - scaled.f_values)) < 1e-9
        assert scaled.k_star == base.k_star

    def test_deterministic_and_seed_independent(self):
        rng = np.random.default_rng(17)
        pts = rng.normal(size=(70, 2))
        a = best_k(pts, m=15, seed=0)
        b = best_k(pts, m=15, seed=99)
        assert np.array_equal(a.f_values, b.f_values)
        assert a.k_star == b.k_star

    def test_weights_from_key_block_set(self):
        rng = np.random.default_rng(18)
        pts = sixteen_groups(rng, per_group=10)
        heights = rng.integers(1, 50, size=pts.shape[0])
        blocks = KeyBlockSet(points=pts, heights=heights)
        via_set = best_k(blocks, m=20, seed=0)
        via_args = best_k(pts, m=20, seed=0, weights=heights.astype(float))
        assert np.array_equal(via_set.f_values, via_args.f_values)

    def test_f_values_within_bounds(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            pts = rng.normal(size=(int(rng.integers(5, 40)), 2))
            res = best_k(pts, m=10, seed=0)
            assert np.all(res.f_values <= 1.0) and np.all(res.f_values >= -1.0)

    def test_rejects_degenerate_input(self):
        with pytest.raises(ValueError):
            best_k(np.zeros((1, 2)), m=10, seed=0)
        with pytest.raises(ValueError):
            best_k(np.zeros((5, 2)), m=1, seed=0)

    def test_csv_export_shape(self):
        rng = np.random.default_rng(20)
        res = best_k(rng.normal(size=(12, 2)), m=6, seed=0)
        lines = res.to_csv().strip().split("\n")
        assert lines[0] == "k,f"
        assert len(lines) == 1 + res.k_values.size


class TestKsweepResult:
    def test_validates_shapes(self):
        with pytest.raises(ValueError):
            KsweepResult(k_values=np.array([2, 3]), f_values=np.array([0.1]), k_star=2)

    def test_f_star_and_dict(self):
        res = KsweepResult(
            k_values=np.array([2, 3, 4]),
            f_values=np.array([0.2, 0.9, 0.4]),
            k_star=3,
        )
        assert res.f_star == 0.9
        assert res.as_dict() == {2: 0.2, 3: 0.9, 4: 0.4}
