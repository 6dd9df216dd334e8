# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: the fused PLSA E+M pass and the collapsed Gibbs
sweeps. Semantics match divtopic._kernels_py; the Gibbs sweeps are
bit-identical to the fallback given the same uniforms.
"""

from libc.math cimport log, INFINITY

import numpy as np

BACKEND_NAME = "cython"


def plsa_em_pass(const long[::1] indptr, const int[::1] indices,
                 const long[::1] counts,
                 const double[:, ::1] theta, const double[:, ::1] phi,
                 double[:, ::1] theta_acc, double[:, ::1] phi_acc,
                 double[::1] sizes, Py_ssize_t doc_start, Py_ssize_t doc_end):
    """Fused E+M accumulation over docs [doc_start, doc_end); returns the
    log-likelihood of (theta, phi) on those documents."""
    cdef Py_ssize_t K = phi.shape[0]
    cdef Py_ssize_t d, j, k, w
    cdef double n, s, p, ll = 0.0
    cdef double[::1] numer = np.empty(K, dtype=np.float64)

    with nogil:
        for d in range(doc_start, doc_end):
            for j in range(indptr[d], indptr[d + 1]):
                w = indices[j]
                n = <double> counts[j]
                s = 0.0
                for k in range(K):
                    numer[k] = theta[d, k] * phi[k, w]
                    s += numer[k]
                if s > 0.0:
                    ll += n * log(s)
                    for k in range(K):
                        p = n * numer[k] / s
                        theta_acc[d, k] += p
                        phi_acc[k, w] += p
                        sizes[k] += p
                else:
                    ll = -INFINITY
                    for k in range(K):
                        p = n * theta[d, k]
                        theta_acc[d, k] += p
                        phi_acc[k, w] += p
                        sizes[k] += p
    return ll


def mixture_log_likelihood(const long[::1] indptr, const int[::1] indices,
                           const long[::1] counts,
                           const double[:, ::1] theta,
                           const double[:, ::1] phi,
                           Py_ssize_t doc_start, Py_ssize_t doc_end):
    """sum over (d,w) of n(d,w) * log(theta[d] . phi[:,w])."""
    cdef Py_ssize_t K = phi.shape[0]
    cdef Py_ssize_t d, j, k, w
    cdef double s, ll = 0.0
    with nogil:
        for d in range(doc_start, doc_end):
            for j in range(indptr[d], indptr[d + 1]):
                w = indices[j]
                s = 0.0
                for k in range(K):
                    s += theta[d, k] * phi[k, w]
                if s > 0.0:
                    ll += counts[j] * log(s)
                else:
                    ll = -INFINITY
    return ll


def gibbs_sweep(const long[::1] doc_offsets, const int[::1] token_words,
                int[::1] z, long[:, ::1] n_dk, long[:, ::1] n_kw,
                long[::1] n_k, const double[::1] alpha, double beta,
                const unsigned char[::1] active, const double[::1] u1):
    """One collapsed Gibbs sweep over every token, in place."""
    cdef Py_ssize_t D = doc_offsets.shape[0] - 1
    cdef Py_ssize_t K = n_kw.shape[0]
    cdef Py_ssize_t V = n_kw.shape[1]
    cdef double vbeta = V * beta
    cdef Py_ssize_t d, t, k, w, k_old, k_new
    cdef double wt, total, r, cum
    cdef double[::1] weights = np.empty(K, dtype=np.float64)

    with nogil:
        for d in range(D):
            for t in range(doc_offsets[d], doc_offsets[d + 1]):
                w = token_words[t]
                k_old = z[t]
                n_dk[d, k_old] -= 1
                n_kw[k_old, w] -= 1
                n_k[k_old] -= 1

                total = 0.0
                for k in range(K):
                    if active[k]:
                        wt = ((n_dk[d, k] + alpha[k])
                              * (n_kw[k, w] + beta) / (n_k[k] + vbeta))
                    else:
                        wt = 0.0
                    weights[k] = wt
                    total += wt
                r = u1[t] * total
                cum = 0.0
                k_new = K - 1
                for k in range(K):
                    cum += weights[k]
                    if r < cum:
                        k_new = k
                        break

                n_dk[d, k_new] += 1
                n_kw[k_new, w] += 1
                n_k[k_new] += 1
                z[t] = k_new


def gibbs_sweep_walk(const long[::1] doc_offsets, const int[::1] token_words,
                     int[::1] z, long[:, ::1] n_dk, long[:, ::1] n_kw,
                     long[::1] n_k, const double[::1] alpha, double beta,
                     const unsigned char[::1] active,
                     const double[:, ::1] p_cum, const long[::1] last_pos,
                     const double[::1] u1, const double[::1] u2):
    """Gibbs sweep with one sampled step through the reinforced transition
    matrix (row cumulative sums in p_cum) before counts are incremented."""
    cdef Py_ssize_t D = doc_offsets.shape[0] - 1
    cdef Py_ssize_t K = n_kw.shape[0]
    cdef Py_ssize_t V = n_kw.shape[1]
    cdef double vbeta = V * beta
    cdef Py_ssize_t d, t, k, j, w, k_old, k_mid, k_new
    cdef double wt, total, r, cum, r2
    cdef double[::1] weights = np.empty(K, dtype=np.float64)

    with nogil:
        for d in range(D):
            for t in range(doc_offsets[d], doc_offsets[d + 1]):
                w = token_words[t]
                k_old = z[t]
                n_dk[d, k_old] -= 1
                n_kw[k_old, w] -= 1
                n_k[k_old] -= 1

                total = 0.0
                for k in range(K):
                    if active[k]:
                        wt = ((n_dk[d, k] + alpha[k])
                              * (n_kw[k, w] + beta) / (n_k[k] + vbeta))
                    else:
                        wt = 0.0
                    weights[k] = wt
                    total += wt
                r = u1[t] * total
                cum = 0.0
                k_mid = K - 1
                for k in range(K):
                    cum += weights[k]
                    if r < cum:
                        k_mid = k
                        break

                r2 = u2[t]
                k_new = last_pos[k_mid]
                for j in range(K):
                    if r2 < p_cum[k_mid, j]:
                        k_new = j
                        break

                n_dk[d, k_new] += 1
                n_kw[k_new, w] += 1
                n_k[k_new] += 1
                z[t] = k_new
