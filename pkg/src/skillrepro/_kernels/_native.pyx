# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels.

Same contracts as ``fallback``: EM responsibilities, banded SPD solve,
and the signed Gaussian field sum. Kept loop-for-loop close to the
NumPy versions so both backends agree to rounding.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt, pi

cnp.import_array()

cdef double _LOG_2PI = log(2.0 * pi)


def estep_responsibilities(const double[:, ::1] data, const double[:, ::1] means,
                           const double[:, :, ::1] chols, const double[::1] log_priors):
    cdef Py_ssize_t S = data.shape[0]
    cdef Py_ssize_t d = data.shape[1]
    cdef Py_ssize_t K = means.shape[0]
    cdef cnp.ndarray[double, ndim=2] logp_arr = np.empty((S, K))
    cdef double[:, ::1] logp = logp_arr
    cdef cnp.ndarray[double, ndim=2] resp_arr = np.empty((S, K))
    cdef double[:, ::1] resp = resp_arr
    cdef double[::1] logdet = np.empty(K)
    cdef double[::1] y = np.empty(d)
    cdef Py_ssize_t s, k, i, j
    cdef double acc, maha, m, norm, loglik

    for k in range(K):
        acc = 0.0
        for i in range(d):
            acc += log(chols[k, i, i])
        logdet[k] = acc

    loglik = 0.0
    for s in range(S):
        for k in range(K):
            # forward substitution: y = L^-1 (x - mu)
            maha = 0.0
            for i in range(d):
                acc = data[s, i] - means[k, i]
                for j in range(i):
                    acc -= chols[k, i, j] * y[j]
                y[i] = acc / chols[k, i, i]
                maha += y[i] * y[i]
            logp[s, k] = log_priors[k] - logdet[k] - 0.5 * (d * _LOG_2PI + maha)
        m = logp[s, 0]
        for k in range(1, K):
            if logp[s, k] > m:
                m = logp[s, k]
        norm = 0.0
        for k in range(K):
            resp[s, k] = exp(logp[s, k] - m)
            norm += resp[s, k]
        for k in range(K):
            resp[s, k] /= norm
        loglik += m + log(norm)
    return resp_arr, loglik


def banded_spd_solve(const double[:, ::1] ab, const double[::1] rhs):
    """Cholesky-factor and solve a lower-banded SPD system in place copies."""
    cdef Py_ssize_t bw = ab.shape[0] - 1
    cdef Py_ssize_t N = ab.shape[1]
    cdef cnp.ndarray[double, ndim=2] L_arr = np.array(ab, copy=True)
    cdef double[:, ::1] L = L_arr
    cdef cnp.ndarray[double, ndim=1] x_arr = np.array(rhs, copy=True)
    cdef double[::1] x = x_arr
    cdef Py_ssize_t j, r, i, lim
    cdef double s

    for j in range(N):
        s = L[0, j]
        lim = bw if j >= bw else j
        for i in range(1, lim + 1):
            s -= L[i, j - i] * L[i, j - i]
        if s <= 0.0:
            raise np.linalg.LinAlgError("matrix is not positive definite")
        L[0, j] = sqrt(s)
        lim = bw if j + bw < N else N - 1 - j
        for r in range(1, lim + 1):
            s = L[r, j]
            i = 1
            while i + r <= bw and i <= j:
                s -= L[i + r, j - i] * L[i, j - i]
                i += 1
            L[r, j] = s / L[0, j]

    # forward solve L y = rhs
    for j in range(N):
        s = x[j]
        lim = bw if j >= bw else j
        for i in range(1, lim + 1):
            s -= L[i, j - i] * x[j - i]
        x[j] = s / L[0, j]
    # back solve L^T x = y
    for j in range(N - 1, -1, -1):
        s = x[j]
        lim = bw if j + bw < N else N - 1 - j
        for i in range(1, lim + 1):
            s -= L[i, j] * x[j + i]
        x[j] = s / L[0, j]
    return x_arr


def signed_gaussian_field(const double[:, ::1] x, const double[:, :, ::1] centers,
                          const double[::1] signs, const double[:, ::1] sigmas):
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t D = centers.shape[0]
    cdef cnp.ndarray[double, ndim=2] grad_arr = np.zeros((T, n))
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t d, t, i
    cdef double value = 0.0
    cdef double r2, var, dens, diff_i

    for d in range(D):
        for t in range(T):
            var = sigmas[d, t] * sigmas[d, t]
            r2 = 0.0
            for i in range(n):
                diff_i = x[t, i] - centers[d, t, i]
                r2 += diff_i * diff_i
            dens = signs[d] * (2.0 * pi * var) ** (-0.5 * n) * exp(-0.5 * r2 / var)
            value += dens
            for i in range(n):
                grad[t, i] -= dens / var * (x[t, i] - centers[d, t, i])
    return value, grad_arr
