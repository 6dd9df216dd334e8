"""Pure-Python fallback kernels.

Mirrors divtopic._kernels (the Cython extension) exactly: the EM pass is
equivalent up to float associativity, and the Gibbs sweeps are bit-identical
given the same uniforms because weights are computed and scanned in the same
order with the same double-precision operations.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# nnz entries processed per vectorized block in the EM pass
_BLOCK_NNZ = 65536


def plsa_em_pass(indptr, indices, counts, theta, phi,
                 theta_acc, phi_acc, sizes, doc_start, doc_end):
    """Fused E+M accumulation over docs [doc_start, doc_end).

    Adds n(d,w) * p(k|d,w) into theta_acc rows, phi_acc columns and sizes,
    and returns the log-likelihood of (theta, phi) on those documents.
    A (d,w) whose posterior numerator is all zero falls back to theta[d]
    and contributes -inf to the likelihood.
    """
    V = phi.shape[1]
    ll = 0.0
    d = doc_start
    while d < doc_end:
        d_hi = d + 1
        while d_hi < doc_end and indptr[d_hi + 1] - indptr[d] <= _BLOCK_NNZ:
            d_hi += 1
        lo, hi = int(indptr[d]), int(indptr[d_hi])
        w = indices[lo:hi]
        n = counts[lo:hi].astype(np.float64)
        docs = np.repeat(np.arange(d, d_hi),
                         np.diff(indptr[d:d_hi + 1]).astype(np.int64))

        numer = theta[docs] * phi[:, w].T
        s = numer.sum(axis=1)
        nz = s > 0.0
        post = np.empty_like(numer)
        post[nz] = numer[nz] / s[nz, None]
        if not nz.all():
            post[~nz] = theta[docs[~nz]]
        with np.errstate(divide="ignore"):
            ll += float(n @ np.log(s))

        weighted = post * n[:, None]
        starts = (indptr[d:d_hi] - lo).astype(np.int64)
        theta_acc[d:d_hi] += np.add.reduceat(weighted, starts, axis=0)
        for k in range(phi.shape[0]):
            phi_acc[k] += np.bincount(w, weights=weighted[:, k], minlength=V)
        sizes += weighted.sum(axis=0)
        d = d_hi
    return ll


def mixture_log_likelihood(indptr, indices, counts, theta, phi,
                           doc_start, doc_end):
    """sum over (d,w) of n(d,w) * log(theta[d] . phi[:,w])."""
    ll = 0.0
    d = doc_start
    while d < doc_end:
        d_hi = d + 1
        while d_hi < doc_end and indptr[d_hi + 1] - indptr[d] <= _BLOCK_NNZ:
            d_hi += 1
        lo, hi = int(indptr[d]), int(indptr[d_hi])
        w = indices[lo:hi]
        n = counts[lo:hi].astype(np.float64)
        docs = np.repeat(np.arange(d, d_hi),
                         np.diff(indptr[d:d_hi + 1]).astype(np.int64))
        s = np.einsum("ij,ij->i", theta[docs], phi[:, w].T)
        with np.errstate(divide="ignore"):
            ll += float(n @ np.log(s))
        d = d_hi
    return ll


def gibbs_sweep(doc_offsets, token_words, z, n_dk, n_kw, n_k,
                alpha, beta, active, u1):
    """One collapsed Gibbs sweep over every token, in place.

    Per token: decrement its counts, compute the conditional
    (n_dk + alpha_k) * (n_kw + beta) / (n_k + V*beta) over active topics,
    sample with the token's uniform, increment.
    """
    D = doc_offsets.size - 1
    K, V = n_kw.shape
    vbeta = V * beta
    ndk = n_dk.tolist()
    nkw = n_kw.tolist()
    nk = n_k.tolist()
    zz = z.tolist()
    words = token_words.tolist()
    offs = doc_offsets.tolist()
    al = alpha.tolist()
    act = [bool(a) for a in active]
    uu = u1.tolist()
    weights = [0.0] * K

    for d in range(D):
        row = ndk[d]
        for t in range(offs[d], offs[d + 1]):
            w = words[t]
            k_old = zz[t]
            row[k_old] -= 1
            nkw[k_old][w] -= 1
            nk[k_old] -= 1

            total = 0.0
            for k in range(K):
                if act[k]:
                    wt = (row[k] + al[k]) * (nkw[k][w] + beta) / (nk[k] + vbeta)
                else:
                    wt = 0.0
                weights[k] = wt
                total += wt
            r = uu[t] * total
            cum = 0.0
            k_new = K - 1
            for k in range(K):
                cum += weights[k]
                if r < cum:
                    k_new = k
                    break

            row[k_new] += 1
            nkw[k_new][w] += 1
            nk[k_new] += 1
            zz[t] = k_new

    z[:] = zz
    n_dk[:] = ndk
    n_kw[:] = nkw
    n_k[:] = nk


def gibbs_sweep_walk(doc_offsets, token_words, z, n_dk, n_kw, n_k,
                     alpha, beta, active, p_cum, last_pos, u1, u2):
    """Gibbs sweep where each freshly sampled assignment takes one sampled
    step through the reinforced transition matrix before counts are
    incremented.

    ``p_cum`` holds row cumulative sums of the transition matrix; ``last_pos``
    holds each row's last positive column (float-edge fallback).
    """
    D = doc_offsets.size - 1
    K, V = n_kw.shape
    vbeta = V * beta
    ndk = n_dk.tolist()
    nkw = n_kw.tolist()
    nk = n_k.tolist()
    zz = z.tolist()
    words = token_words.tolist()
    offs = doc_offsets.tolist()
    al = alpha.tolist()
    act = [bool(a) for a in active]
    pc = p_cum.tolist()
    lp = last_pos.tolist()
    uu1 = u1.tolist()
    uu2 = u2.tolist()
    weights = [0.0] * K

    for d in range(D):
        row = ndk[d]
        for t in range(offs[d], offs[d + 1]):
            w = words[t]
            k_old = zz[t]
            row[k_old] -= 1
            nkw[k_old][w] -= 1
            nk[k_old] -= 1

            total = 0.0
            for k in range(K):
                if act[k]:
                    wt = (row[k] + al[k]) * (nkw[k][w] + beta) / (nk[k] + vbeta)
                else:
                    wt = 0.0
                weights[k] = wt
                total += wt
            r = uu1[t] * total
            cum = 0.0
            k_mid = K - 1
            for k in range(K):
                cum += weights[k]
                if r < cum:
                    k_mid = k
                    break

            r2 = uu2[t]
            cum_row = pc[k_mid]
            k_new = lp[k_mid]
            for j in range(K):
                if r2 < cum_row[j]:
                    k_new = j
                    break

            row[k_new] += 1
            nkw[k_new][w] += 1
            nk[k_new] += 1
            zz[t] = k_new

    z[:] = zz
    n_dk[:] = ndk
    n_kw[:] = nkw
    n_k[:] = nk
