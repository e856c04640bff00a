"""Numba and numpy kernel backends must agree on their shared contracts."""

import numpy as np
import pytest

from beamprobe import _kernels_numpy as knp

knb = pytest.importorskip("beamprobe._kernels_numba")


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(99)


class TestLevenshtein:
    def test_cost_matrices_identical(self, rng):
        for _ in range(60):
            a = rng.integers(0, 5, size=rng.integers(0, 12)).astype(np.int64)
            b = rng.integers(0, 5, size=rng.integers(0, 12)).astype(np.int64)
            assert np.array_equal(knb.levenshtein_costs(a, b), knp.levenshtein_costs(a, b))

    def test_distances_identical(self, rng):
        for _ in range(60):
            a = rng.integers(0, 4, size=rng.integers(0, 30)).astype(np.int64)
            b = rng.integers(0, 4, size=rng.integers(0, 30)).astype(np.int64)
            assert knb.edit_distance(a, b) == knp.edit_distance(a, b)


class TestPairwiseAndAffinities:
    def test_pairwise_sq_distances_close(self, rng):
        x = rng.normal(size=(25, 7))
        d_nb = knb.pairwise_sq_distances(x)
        d_np = knp.pairwise_sq_distances(x)
        ref = ((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
        assert np.allclose(d_nb, ref, atol=1e-10)
        assert np.allclose(d_np, ref, atol=1e-10)

    def test_conditional_probs_calibrated_both_backends(self, rng):
        x = rng.normal(size=(18, 6))
        d2 = knp.pairwise_sq_distances(x)
        for impl in (knb, knp):
            p, betas = impl.gaussian_conditional_probs(d2, 4.0, tol=1e-6)
            assert np.all(betas > 0)
            for i in range(18):
                row = np.delete(p[i], i)
                nz = row > 0
                h = -np.sum(row[nz] * np.log2(row[nz]))
                assert 2.0**h == pytest.approx(4.0, abs=1e-5)
        p_nb, _ = knb.gaussian_conditional_probs(d2, 4.0, tol=1e-6)
        p_np, _ = knp.gaussian_conditional_probs(d2, 4.0, tol=1e-6)
        assert np.allclose(p_nb, p_np, atol=1e-9)


class TestTsneKernel:
    def test_kl_and_grad_agree(self, rng):
        n = 16
        p = np.abs(rng.normal(size=(n, n)))
        p = (p + p.T) / 2
        np.fill_diagonal(p, 0.0)
        p /= p.sum()
        y = rng.normal(size=(n, 2))
        kl_nb, g_nb = knb.tsne_kl_grad(p, y)
        kl_np, g_np = knp.tsne_kl_grad(p, y)
        assert kl_nb == pytest.approx(kl_np, rel=1e-12, abs=1e-12)
        assert np.allclose(g_nb, g_np, atol=1e-12)

    def test_gradient_matches_finite_differences(self, rng):
        n = 7
        p = np.abs(rng.normal(size=(n, n)))
        p = (p + p.T) / 2
        np.fill_diagonal(p, 0.0)
        p /= p.sum()
        y = rng.normal(size=(n, 2))
        _, grad = knp.tsne_kl_grad(p, y)
        eps = 1e-6
        for i in range(n):
            for d in range(2):
                y_hi, y_lo = y.copy(), y.copy()
                y_hi[i, d] += eps
                y_lo[i, d] -= eps
                kl_hi, _ = knp.tsne_kl_grad(p, y_hi)
                kl_lo, _ = knp.tsne_kl_grad(p, y_lo)
                numeric = (kl_hi - kl_lo) / (2 * eps)
                assert grad[i, d] == pytest.approx(numeric, rel=2e-4, abs=2e-6)


class TestPermutationKernel:
    def test_counts_identical_across_backends(self, rng):
        for seed in (0, 1, 42, 2**40):
            x = rng.normal(size=20)
            y = rng.normal(size=20)
            xc, yc = x - x.mean(), y - y.mean()
            denom = float(np.linalg.norm(xc) * np.linalg.norm(yc))
            args = (xc, yc, 0.3, denom, 500, seed)
            assert knb.perm_abs_exceed_count(*args) == knp.perm_abs_exceed_count(*args)
