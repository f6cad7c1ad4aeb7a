import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import multivariate_normal

from hmmar.kde import (Bandwidth, EmbeddedSample, conditional_weights, embed,
                       embedding_heads, kde_eval, oversmoothed_bandwidth,
                       ucv_bandwidth, ucv_objective)


def generic_ucv(vectors: np.ndarray, H: np.ndarray) -> float:
    """UCV for an arbitrary bandwidth matrix with the normal kernel.

    Independent of the implementation under test: builds on the convolution
    identity (normal * normal = normal with summed covariances) and
    R(kernel) = (4 pi)^(-d/2) for the standard d-variate normal.
    """
    N, d = vectors.shape
    conv = multivariate_normal(mean=np.zeros(d), cov=2.0 * H)
    kern = multivariate_normal(mean=np.zeros(d), cov=H)
    total = 0.0
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            delta = vectors[i] - vectors[j]
            total += conv.pdf(delta) - 2.0 * kern.pdf(delta)
    total /= N * (N - 1)
    return total + (4.0 * math.pi) ** (-d / 2.0) / (N * math.sqrt(np.linalg.det(H)))


class TestEmbed:
    def test_four_points_dim2(self):
        emb = embed(np.array([1.0, 2.0, 3.0, 4.0]), d=2, l=1)
        np.testing.assert_array_equal(emb.vectors, [[1, 2], [2, 3], [3, 4]])
        assert emb.N == 3

    def test_stride_two(self):
        emb = embed(np.array([1.0, 2.0, 3.0, 4.0, 5.0]), d=2, l=2)
        np.testing.assert_array_equal(emb.vectors, [[1, 2], [3, 4]])
        assert emb.N == 2

    def test_count_formula(self):
        emb = embed(np.zeros(600), d=3, l=1)
        assert emb.N == 598

    def test_too_short_series_rejected(self):
        with pytest.raises(ValueError):
            embed(np.array([1.0, 2.0]), d=3, l=1)


class TestKdeEval:
    def test_single_kernel_at_center(self):
        sample = EmbeddedSample(vectors=np.array([[0.0]]), d=1, l=1)
        got = kde_eval(sample, Bandwidth(1.0), 0.0)
        assert got == pytest.approx(0.3989422804014327, abs=1e-15)

    def test_symmetry_under_negation(self):
        sample = EmbeddedSample(vectors=np.array([[-1.3], [1.3]]), d=1, l=1)
        flipped = EmbeddedSample(vectors=-sample.vectors, d=1, l=1)
        bw = Bandwidth(0.8)
        assert kde_eval(sample, bw, 0.0) == pytest.approx(kde_eval(flipped, bw, 0.0), rel=1e-14)
        assert kde_eval(sample, bw, 0.4) == pytest.approx(kde_eval(flipped, bw, -0.4), rel=1e-14)

    def test_recovers_standard_normal(self):
        rng = np.random.default_rng(0)
        emb = embed(rng.standard_normal(1000), d=1, l=1)
        bw = ucv_bandwidth(emb)
        ys = np.linspace(-3.0, 3.0, 61)
        errs = [abs(kde_eval(emb, bw, y) - math.exp(-y * y / 2) / math.sqrt(2 * math.pi))
                for y in ys]
        assert max(errs) < 0.05

    def test_integrates_to_one_1d(self):
        sample = EmbeddedSample(vectors=np.array([[-0.7], [0.2], [2.5]]), d=1, l=1)
        bw = Bandwidth(0.6)
        total, _ = quad(lambda t: kde_eval(sample, bw, t), -np.inf, np.inf)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_integrates_to_one_2d(self):
        rng = np.random.default_rng(3)
        sample = EmbeddedSample(vectors=rng.normal(size=(5, 2)), d=2, l=1)
        h = 0.7
        bw = Bandwidth(h)
        pts = sample.vectors
        nodes = 160
        total = 0.0
        # tensor Gauss-Legendre over a box padded by 8h around the data
        gx, gwx = np.polynomial.legendre.leggauss(nodes)
        lo = pts.min(axis=0) - 8 * h
        hi = pts.max(axis=0) + 8 * h
        xs = 0.5 * (hi[0] - lo[0]) * gx + 0.5 * (hi[0] + lo[0])
        ys = 0.5 * (hi[1] - lo[1]) * gx + 0.5 * (hi[1] + lo[1])
        wx = 0.5 * (hi[0] - lo[0]) * gwx
        wy = 0.5 * (hi[1] - lo[1]) * gwx
        for x, w1 in zip(xs, wx):
            row = sum(w2 * kde_eval(sample, bw, (x, y)) for y, w2 in zip(ys, wy))
            total += w1 * row
        assert total == pytest.approx(1.0, abs=1e-6)


class TestUcvObjective:
    def test_two_point_case_matches_generic_form(self):
        for c in (0.5, 1.0, 2.3):
            sample = EmbeddedSample(vectors=np.array([[0.0], [c]]), d=1, l=1)
            got = ucv_objective(sample, 1.0)
            want = generic_ucv(sample.vectors, np.eye(1))
            assert got == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_matches_generic_form_on_random_samples(self, d):
        rng = np.random.default_rng(17 + d)
        for _ in range(7):
            N = rng.integers(4, 12)
            vectors = rng.normal(size=(N, d))
            h = rng.uniform(0.3, 1.5)
            sample = EmbeddedSample(vectors=vectors, d=d, l=1)
            got = ucv_objective(sample, h)
            want = generic_ucv(vectors, h * h * np.eye(d))
            assert got == pytest.approx(want, abs=1e-12)

    def test_translation_invariance(self):
        rng = np.random.default_rng(2)
        sample = embed(rng.standard_normal(80), d=2, l=1)
        shifted = EmbeddedSample(vectors=sample.vectors + 37.5, d=2, l=1)
        for h in (0.2, 0.7):
            assert ucv_objective(sample, h) == pytest.approx(
                ucv_objective(shifted, h), rel=1e-9)

    def test_interior_minimum_for_normal_data(self):
        rng = np.random.default_rng(4)
        sample = embed(rng.standard_normal(200), d=1, l=1)
        h_plus = oversmoothed_bandwidth(sample)
        grid = np.geomspace(1e-4 * h_plus, h_plus, 400)
        vals = [ucv_objective(sample, h) for h in grid]
        k = int(np.argmin(vals))
        assert 0 < k < len(grid) - 1

    def test_requires_two_vectors(self):
        sample = EmbeddedSample(vectors=np.array([[0.0]]), d=1, l=1)
        with pytest.raises(ValueError):
            ucv_objective(sample, 1.0)


class TestOversmoothedBandwidth:
    def test_reference_value_1d(self):
        # 100 points, sample std exactly 1 -> (4/300)^(1/5)
        pts = np.tile([1.0, -1.0], 50) * math.sqrt(0.99)
        sample = EmbeddedSample(vectors=pts[:, None], d=1, l=1)
        assert oversmoothed_bandwidth(sample) == pytest.approx(0.42168460634274996, rel=1e-12)

    def test_reference_value_2d(self):
        # 50 points with per-coordinate sample stds (1, 2) -> (4/200)^(1/6) * 2
        base = np.tile([1.0, -1.0], 25) * math.sqrt(0.98)
        vectors = np.column_stack([base, 2.0 * base])
        sample = EmbeddedSample(vectors=vectors, d=2, l=1)
        assert oversmoothed_bandwidth(sample) == pytest.approx(1.0420014619173827, rel=1e-12)

    def test_scales_homogeneously(self):
        rng = np.random.default_rng(9)
        vectors = rng.normal(size=(40, 2))
        sample = EmbeddedSample(vectors=vectors, d=2, l=1)
        scaled = EmbeddedSample(vectors=3.5 * vectors, d=2, l=1)
        assert oversmoothed_bandwidth(scaled) == pytest.approx(
            3.5 * oversmoothed_bandwidth(sample), rel=1e-12)

    def test_constant_sample_rejected(self):
        sample = EmbeddedSample(vectors=np.full((10, 1), 2.0), d=1, l=1)
        with pytest.raises(ValueError):
            oversmoothed_bandwidth(sample)


class TestUcvBandwidth:
    def test_clustered_data_prefers_smaller_h(self):
        rng = np.random.default_rng(21)
        x = np.concatenate([rng.normal(-8.0, 0.5, 150), rng.normal(8.0, 0.5, 150)])
        sample = embed(rng.permutation(x), d=1, l=1)
        bw = ucv_bandwidth(sample)
        assert bw.h < oversmoothed_bandwidth(sample)

    def test_matches_dense_grid_scan(self):
        rng = np.random.default_rng(6)
        sample = embed(rng.standard_normal(150), d=1, l=1)
        bw = ucv_bandwidth(sample)
        h_plus = oversmoothed_bandwidth(sample)
        grid = np.geomspace(1e-6 * h_plus, h_plus, 10_000)
        grid_min = min(ucv_objective(sample, h) for h in grid)
        assert ucv_objective(sample, bw.h) <= grid_min + 1e-6

    def test_translation_leaves_selection_unchanged(self):
        rng = np.random.default_rng(13)
        sample = embed(rng.standard_normal(120), d=2, l=1)
        shifted = EmbeddedSample(vectors=sample.vectors + 11.0, d=2, l=1)
        h1 = ucv_bandwidth(sample).h
        h2 = ucv_bandwidth(shifted).h
        assert h1 == pytest.approx(h2, rel=1e-9)


class TestConditionalWeights:
    def test_uniform_when_candidates_identical(self):
        x = np.full(30, 1.5)
        beta = conditional_weights(x, n=30, tau=1, l=1, h=0.5)
        N = 1 + (29 - 2) // 1
        np.testing.assert_allclose(beta, np.full(N, 1.0 / N), atol=1e-14)

    def test_concentrates_on_exact_match_as_h_vanishes(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=40)
        x[20:22] = x[37:39]  # candidate window 21 replays the query window
        beta = conditional_weights(x, n=40, tau=2, l=1, h=1e-3)
        assert np.argmax(beta) == 20
        assert beta[20] > 0.999

    def test_matches_naive_formula(self):
        rng = np.random.default_rng(15)
        x = rng.normal(size=60)
        n, tau, l, h = 60, 2, 1, 0.5
        beta = conditional_weights(x, n, tau, l, h)
        xs = x[:n - 1]
        N = 1 + (len(xs) - (tau + 1)) // l
        raw = np.empty(N)
        for i in range(1, N + 1):  # 1-based candidate index
            sq = 0.0
            for j in range(-tau, 0):
                sq += (xs[(n + j) - 1] - xs[(i - 1) * l + j + tau + 1 - 1]) ** 2
            raw[i - 1] = math.exp(-sq / (2 * h * h))
        np.testing.assert_allclose(beta, raw / raw.sum(), atol=1e-12)

    def test_stride_matches_naive_formula(self):
        rng = np.random.default_rng(16)
        x = rng.normal(size=61)
        n, tau, l, h = 61, 3, 2, 0.8
        beta = conditional_weights(x, n, tau, l, h)
        xs = x[:n - 1]
        N = 1 + (len(xs) - (tau + 1)) // l
        assert beta.shape == (N,)
        raw = np.empty(N)
        for i in range(1, N + 1):
            sq = sum((xs[(n + j) - 1] - xs[(i - 1) * l + j + tau]) ** 2
                     for j in range(-tau, 0))
            raw[i - 1] = math.exp(-sq / (2 * h * h))
        np.testing.assert_allclose(beta, raw / raw.sum(), atol=1e-12)

    def test_huge_distances_stay_finite(self):
        x = np.concatenate([np.zeros(20), [1e4], np.zeros(9)])
        beta = conditional_weights(x, n=30, tau=2, l=1, h=0.1)
        assert np.all(np.isfinite(beta))
        assert np.all(beta >= 0.0) and np.all(beta <= 1.0)
        assert beta.sum() == pytest.approx(1.0, abs=1e-12)

    def test_requires_enough_history(self):
        with pytest.raises(ValueError):
            conditional_weights(np.zeros(10), n=3, tau=2, l=1, h=0.5)


def test_embedding_heads_align_with_weights():
    rng = np.random.default_rng(19)
    x = rng.normal(size=50)
    for l in (1, 2, 3):
        n, tau = 50, 2
        heads = embedding_heads(x, n, tau, l)
        beta = conditional_weights(x, n, tau, l, h=0.5)
        assert heads.shape == beta.shape
        xs = x[:n - 1]
        want = [xs[(i - 1) * l + tau] for i in range(1, len(beta) + 1)]
        np.testing.assert_array_equal(heads, want)
