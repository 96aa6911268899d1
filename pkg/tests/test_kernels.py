import numpy as np
import pytest
import scipy.special
import scipy.stats

from skillrepro import _kernels
from skillrepro._kernels import fallback


def has_native():
    return _kernels.using_native()


def random_spd_banded(rng, T, bw, scale=1.0):
    """Dense SPD matrix with the given scalar bandwidth, plus its banded form."""
    N = T
    A = np.zeros((N, N))
    for i in range(N):
        for j in range(max(0, i - bw), min(N, i + bw + 1)):
            A[i, j] = rng.normal(0.0, scale) if i != j else 0.0
    A = 0.5 * (A + A.T)
    A += np.eye(N) * (np.abs(A).sum(axis=1).max() + 1.0)  # diagonally dominant
    ab = np.zeros((bw + 1, N))
    for r in range(bw + 1):
        ab[r, : N - r] = np.diag(A, -r)
    return A, ab


def gmm_instance(rng, S=40, d=3, K=4):
    data = rng.normal(size=(S, d))
    means = rng.normal(size=(K, d))
    chols = np.zeros((K, d, d))
    for k in range(K):
        M = rng.normal(size=(d, d)) * 0.3
        cov = M @ M.T + np.eye(d)
        chols[k] = np.linalg.cholesky(cov)
    pri = rng.uniform(0.5, 2.0, size=K)
    log_priors = np.log(pri / pri.sum())
    return data, means, chols, log_priors


class TestEStep:
    def test_matches_scipy_log_pdf(self, rng):
        data, means, chols, log_priors = gmm_instance(rng)
        resp, loglik = _kernels.estep_responsibilities(data, means, chols, log_priors)
        K = means.shape[0]
        logp = np.empty((data.shape[0], K))
        for k in range(K):
            cov = chols[k] @ chols[k].T
            logp[:, k] = log_priors[k] + scipy.stats.multivariate_normal.logpdf(
                data, means[k], cov)
        ref_ll = float(np.sum(scipy.special.logsumexp(logp, axis=1)))
        ref_resp = np.exp(logp - scipy.special.logsumexp(logp, axis=1, keepdims=True))
        assert loglik == pytest.approx(ref_ll, abs=1e-9)
        np.testing.assert_allclose(resp, ref_resp, atol=1e-12)

    def test_rows_sum_to_one(self, rng):
        data, means, chols, log_priors = gmm_instance(rng, S=100, d=2, K=3)
        resp, _ = _kernels.estep_responsibilities(data, means, chols, log_priors)
        np.testing.assert_allclose(resp.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(resp >= 0)

    def test_far_outlier_does_not_overflow(self):
        data = np.array([[1e3, -1e3], [0.0, 0.0]])
        means = np.zeros((2, 2))
        means[1] = (1.0, 1.0)
        chols = np.tile(np.eye(2), (2, 1, 1))
        log_priors = np.log([0.5, 0.5])
        resp, loglik = _kernels.estep_responsibilities(data, means, chols, log_priors)
        assert np.isfinite(loglik)
        np.testing.assert_allclose(resp.sum(axis=1), 1.0, atol=1e-12)


class TestBandedSolve:
    @pytest.mark.parametrize("T,bw", [(10, 1), (50, 3), (120, 5)])
    def test_matches_dense_solve(self, rng, T, bw):
        A, ab = random_spd_banded(rng, T, bw)
        rhs = rng.normal(size=T)
        x = _kernels.banded_spd_solve(ab, rhs)
        np.testing.assert_allclose(x, np.linalg.solve(A, rhs), atol=1e-9)

    def test_indefinite_raises(self):
        ab = np.array([[1.0, -1.0, 1.0], [0.9, 0.9, 0.0]])  # 3x3, not PD
        with pytest.raises(np.linalg.LinAlgError):
            _kernels.banded_spd_solve(ab, np.ones(3))

    def test_identity(self):
        ab = np.zeros((2, 6))
        ab[0] = 1.0
        rhs = np.arange(6.0)
        np.testing.assert_allclose(_kernels.banded_spd_solve(ab, rhs), rhs, atol=1e-14)


class TestSignedField:
    def naive(self, x, centers, signs, sigmas):
        T, n = x.shape
        D = centers.shape[0]
        value = 0.0
        grad = np.zeros_like(x)
        for d in range(D):
            for t in range(T):
                diff = x[t] - centers[d, t]
                var = sigmas[d, t] ** 2
                dens = signs[d] * (2 * np.pi * var) ** (-n / 2) * np.exp(
                    -0.5 * diff @ diff / var)
                value += dens
                grad[t] += -dens / var * diff
        return value, grad

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_naive_loops(self, rng, n):
        T, D = 12, 2
        x = rng.normal(size=(T, n))
        centers = rng.normal(size=(D, T, n))
        signs = np.array([1.0, -1.0])
        sigmas = rng.uniform(0.3, 1.2, size=(D, T))
        v, g = _kernels.signed_gaussian_field(x, centers, signs, sigmas)
        v_ref, g_ref = self.naive(x, centers, signs, sigmas)
        assert v == pytest.approx(v_ref, rel=1e-12)
        np.testing.assert_allclose(g, g_ref, atol=1e-12)

    def test_gradient_is_central_difference(self, rng):
        T, n = 6, 2
        x = rng.normal(size=(T, n))
        centers = rng.normal(size=(1, T, n))
        signs = np.array([-1.0])
        sigmas = np.full((1, T), 0.7)
        _, g = _kernels.signed_gaussian_field(x, centers, signs, sigmas)
        eps = 1e-6
        for t in range(T):
            for j in range(n):
                xp, xm = x.copy(), x.copy()
                xp[t, j] += eps
                xm[t, j] -= eps
                vp, _ = _kernels.signed_gaussian_field(xp, centers, signs, sigmas)
                vm, _ = _kernels.signed_gaussian_field(xm, centers, signs, sigmas)
                assert g[t, j] == pytest.approx((vp - vm) / (2 * eps), abs=1e-6)


@pytest.mark.skipif(not has_native(), reason="compiled extension not built")
class TestBackendAgreement:
    """The compiled extension and the NumPy fallback must agree to roundoff."""

    def test_estep(self, rng):
        data, means, chols, log_priors = gmm_instance(rng, S=60, d=3, K=5)
        from skillrepro._kernels import _native
        r_n, ll_n = _native.estep_responsibilities(data, means, chols, log_priors)
        r_f, ll_f = fallback.estep_responsibilities(data, means, chols, log_priors)
        np.testing.assert_allclose(r_n, r_f, atol=1e-12)
        assert ll_n == pytest.approx(ll_f, abs=1e-9)

    def test_banded_solve(self, rng):
        from skillrepro._kernels import _native
        _, ab = random_spd_banded(rng, 80, 4)
        rhs = rng.normal(size=80)
        np.testing.assert_allclose(
            _native.banded_spd_solve(ab, rhs), fallback.banded_spd_solve(ab, rhs),
            atol=1e-10)

    def test_signed_field(self, rng):
        from skillrepro._kernels import _native
        x = rng.normal(size=(20, 2))
        centers = rng.normal(size=(3, 20, 2))
        signs = np.array([1.0, -1.0, -1.0])
        sigmas = rng.uniform(0.2, 1.0, size=(3, 20))
        v_n, g_n = _native.signed_gaussian_field(x, centers, signs, sigmas)
        v_f, g_f = fallback.signed_gaussian_field(x, centers, signs, sigmas)
        assert v_n == pytest.approx(v_f, rel=1e-12)
        np.testing.assert_allclose(g_n, g_f, atol=1e-12)

    def test_readonly_inputs_accepted(self, rng):
        # frozen dataclasses hand the kernels read-only views
        from skillrepro._kernels import _native
        _, ab = random_spd_banded(rng, 12, 2)
        rhs = rng.normal(size=12)
        ab.setflags(write=False)
        rhs.setflags(write=False)
        _native.banded_spd_solve(ab, rhs)
