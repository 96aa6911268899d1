"""Pure NumPy/SciPy implementations of the hot kernels.

Used when the compiled extension is unavailable (or disabled via the
SKILLREPRO_NO_NATIVE environment variable). Signatures and numerical
conventions mirror ``_native`` exactly so either backend can serve the
rest of the package.
"""

import numpy as np
from scipy.linalg import solve_triangular, solveh_banded

_LOG_2PI = float(np.log(2.0 * np.pi))


def estep_responsibilities(data, means, chols, log_priors):
    """E-step of EM for a Gaussian mixture.

    data: (S, d) sample rows. means: (K, d). chols: (K, d, d) lower
    Cholesky factors of the component covariances. log_priors: (K,).
    Returns (resp, loglik) where resp is the (S, K) responsibility
    matrix (rows sum to 1) and loglik the total data log-likelihood.
    """
    S, d = data.shape
    K = means.shape[0]
    logp = np.empty((S, K))
    for k in range(K):
        L = chols[k]
        diff = (data - means[k]).T
        sol = solve_triangular(L, diff, lower=True, check_finite=False)
        maha = np.einsum("is,is->s", sol, sol)
        logdet = np.sum(np.log(np.diag(L)))
        logp[:, k] = log_priors[k] - logdet - 0.5 * (d * _LOG_2PI + maha)
    m = np.max(logp, axis=1)
    shifted = np.exp(logp - m[:, None])
    norm = np.sum(shifted, axis=1)
    resp = shifted / norm[:, None]
    loglik = float(np.sum(m + np.log(norm)))
    return resp, loglik


def banded_spd_solve(ab, rhs):
    """Solve A x = rhs for symmetric positive definite banded A.

    ab is the lower-form banded storage ab[i, j] = A[j + i, j] with
    shape (bandwidth + 1, N). Raises numpy.linalg.LinAlgError when the
    matrix is not positive definite.
    """
    try:
        return solveh_banded(ab, rhs, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise
    except ValueError as exc:  # scipy signals some non-SPD cases this way
        raise np.linalg.LinAlgError(str(exc)) from exc


def signed_gaussian_field(x, centers, signs, sigmas):
    """Signed sum of isotropic Gaussian densities along a trajectory.

    x: (T, n) trajectory points. centers: (D, T, n) per-source,
    per-timestep density centers. signs: (D,) in {+1, -1}.
    sigmas: (D, T) per-source, per-timestep spreads.

    Returns (value, grad) with
    value = sum_{d,t} s_d N(x_t; centers[d,t], sigmas[d,t]) and grad
    its (T, n) gradient in x.
    """
    T, n = x.shape
    diff = x[None, :, :] - centers
    r2 = np.einsum("dti,dti->dt", diff, diff)
    var = sigmas * sigmas
    dens = signs[:, None] * (2.0 * np.pi * var) ** (-0.5 * n) * np.exp(-0.5 * r2 / var)
    value = float(np.sum(dens))
    grad = -np.einsum("dt,dti->ti", dens / var, diff)
    return value, grad
