"""Collapsed Gibbs LDA with asymmetric document-topic concentrations.

The per-token conditional is (n_dk + alpha_k) * (n_kw + beta) / (n_k + V*beta)
with the current token excluded from all counts. The alpha vector is
re-estimated by the standard fixed-point update; beta stays a symmetric
scalar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from . import _backend
from .corpus import Corpus


@dataclass
class LdaState:
    """Token assignments plus the count tables they imply.

    ``token_words``/``doc_offsets`` are the corpus token stream the
    assignments are aligned with.
    """

    z: np.ndarray            # int32, one topic per token occurrence
    token_words: np.ndarray  # int32
    doc_offsets: np.ndarray  # int64, D+1
    n_dk: np.ndarray         # int64, D x K
    n_kw: np.ndarray         # int64, K x V
    n_k: np.ndarray          # int64, K
    alpha_vec: np.ndarray    # float64, K
    beta: float

    @property
    def K(self) -> int:
        return self.n_kw.shape[0]

    @property
    def V(self) -> int:
        return self.n_kw.shape[1]

    def check_counts(self):
        """Exact integer bookkeeping invariants."""
        D = self.doc_offsets.size - 1
        lens = np.diff(self.doc_offsets)
        assert np.array_equal(self.n_dk.sum(axis=1), lens)
        assert np.array_equal(self.n_kw.sum(axis=1), self.n_k)
        assert self.n_k.sum() == self.token_words.size
        assert np.array_equal(
            np.vstack([np.bincount(self.z[self.doc_offsets[d]:
                                          self.doc_offsets[d + 1]],
                                   minlength=self.K) for d in range(D)]),
            self.n_dk)


def init_state(corpus: Corpus, K: int, rng, alpha0=None,
               beta: float = 0.01) -> LdaState:
    """Uniform-random token assignments; alpha defaults to symmetric 50/K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if beta <= 0:
        raise ValueError("beta must be > 0")
    rng = np.random.default_rng(rng)
    token_words, doc_offsets = corpus.token_stream()
    z = rng.integers(0, K, size=token_words.size).astype(np.int32)

    D = corpus.num_docs
    V = corpus.vocab_size
    n_dk = np.zeros((D, K), dtype=np.int64)
    for d in range(D):
        seg = z[doc_offsets[d]:doc_offsets[d + 1]]
        n_dk[d] = np.bincount(seg, minlength=K)
    n_kw = np.zeros((K, V), dtype=np.int64)
    np.add.at(n_kw, (z, token_words), 1)
    n_k = n_kw.sum(axis=1)

    if alpha0 is None:
        alpha0 = 50.0 / K
    alpha_vec = np.full(K, float(alpha0))
    if np.any(alpha_vec <= 0):
        raise ValueError("alpha entries must be > 0")
    return LdaState(z=z, token_words=token_words, doc_offsets=doc_offsets,
                    n_dk=n_dk, n_kw=n_kw, n_k=n_k, alpha_vec=alpha_vec,
                    beta=float(beta))


def gibbs_conditional(state: LdaState, d: int, w: int) -> np.ndarray:
    """Unnormalized conditional over topics for a token of word w in doc d,
    assuming the token has already been decremented from all counts."""
    return ((state.n_dk[d] + state.alpha_vec)
            * (state.n_kw[:, w] + state.beta)
            / (state.n_k + state.V * state.beta))


def sweep(state: LdaState, rng, active=None) -> LdaState:
    """Resample every token once, in place. Deterministic given the rng."""
    if active is None:
        active = np.ones(state.K, dtype=np.uint8)
    else:
        active = np.asarray(active).astype(np.uint8)
    u1 = rng.random(state.token_words.size)
    _backend.kernels.gibbs_sweep(state.doc_offsets, state.token_words,
                                 state.z, state.n_dk, state.n_kw, state.n_k,
                                 state.alpha_vec, state.beta, active, u1)
    return state


def estimate_theta(state: LdaState) -> np.ndarray:
    """theta[d, k] = (n_dk + alpha_k) / sum_k' (n_dk' + alpha_k')."""
    num = state.n_dk + state.alpha_vec[None, :]
    return num / num.sum(axis=1, keepdims=True)


def estimate_phi(state: LdaState) -> np.ndarray:
    """phi[k, w] = (n_kw + beta) / (n_k + V*beta)."""
    return ((state.n_kw + state.beta)
            / (state.n_k + state.V * state.beta)[:, None])


def log_likelihood(corpus: Corpus, state: LdaState) -> float:
    """Mixture log-likelihood of the corpus under the current theta/phi
    point estimates."""
    indptr, indices, counts = corpus.csr()
    return float(_backend.kernels.mixture_log_likelihood(
        indptr, indices, counts, estimate_theta(state), estimate_phi(state),
        0, corpus.num_docs))


def _tail_counts(values: np.ndarray, max_value: int) -> np.ndarray:
    """tail[i] = number of entries strictly greater than i, for i < max."""
    hist = np.bincount(values, minlength=max_value + 1)
    tail = np.cumsum(hist[::-1])[::-1]
    return tail[1:]


def optimize_alpha(state: LdaState, tol: float = 1e-6, max_iter: int = 1000,
                   floor: float = 1e-8) -> np.ndarray:
    """Fixed-point concentration update

        alpha_k <- alpha_k * (sum_d Psi(n_dk + alpha_k) - D Psi(alpha_k))
                           / (sum_d Psi(len_d + s)     - D Psi(s)),  s = sum(alpha)

    iterated until the relative change drops below tol. Because the counts
    are integers, each digamma difference is evaluated exactly through the
    recurrence Psi(x + n) - Psi(x) = sum_{i<n} 1/(x + i), which only needs
    histogram tails of the counts. Entries are floored at ``floor``; a
    non-finite update aborts and keeps the previous vector.
    """
    n_dk = state.n_dk
    lens = n_dk.sum(axis=1)
    K = state.K
    max_n = int(n_dk.max()) if n_dk.size else 0
    max_len = int(lens.max()) if lens.size else 0
    if max_n == 0:
        return state.alpha_vec.copy()

    # tails[k][i] = #docs with n_dk > i; len_tail[i] = #docs with len > i
    tails = np.vstack([_tail_counts(n_dk[:, k], max_n) for k in range(K)])
    len_tail = _tail_counts(lens, max_len).astype(np.float64)
    steps = np.arange(max_len, dtype=np.float64)

    alpha = state.alpha_vec.copy()
    for _ in range(max_iter):
        s = alpha.sum()
        denom = float(np.sum(len_tail / (s + steps)))
        numer = (tails / (alpha[:, None] + steps[None, :max_n])).sum(axis=1)
        new = alpha * numer / denom
        if not np.all(np.isfinite(new)):
            return alpha
        new = np.maximum(new, floor)
        done = np.max(np.abs(new - alpha) / alpha) < tol
        alpha = new
        if done:
            break
    return alpha


def optimize_alpha_digamma(state: LdaState, tol: float = 1e-6,
                           max_iter: int = 1000,
                           floor: float = 1e-8) -> np.ndarray:
    """Reference implementation of the same fixed point using explicit
    digamma evaluations; kept as the slow oracle for tests."""
    n_dk = state.n_dk.astype(np.float64)
    lens = n_dk.sum(axis=1)
    alpha = state.alpha_vec.copy()
    for _ in range(max_iter):
        s = alpha.sum()
        numer = (digamma(n_dk + alpha[None, :]) - digamma(alpha)).sum(axis=0)
        denom = (digamma(lens + s) - digamma(s)).sum()
        new = alpha * numer / denom
        if not np.all(np.isfinite(new)):
            return alpha
        new = np.maximum(new, floor)
        done = np.max(np.abs(new - alpha) / alpha) < tol
        alpha = new
        if done:
            break
    return alpha


def train(corpus: Corpus, K: int, sweeps: int, burn_in: int, seed: int,
          alpha0=None, beta: float = 0.01) -> LdaState:
    """Random init then ``sweeps`` Gibbs sweeps, re-estimating alpha after
    every sweep past the burn-in."""
    rng = np.random.default_rng(seed)
    state = init_state(corpus, K, rng, alpha0=alpha0, beta=beta)
    for s in range(1, sweeps + 1):
        sweep(state, rng)
        if s > burn_in:
            state.alpha_vec = optimize_alpha(state)
    return state
