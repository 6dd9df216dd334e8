"""Classical PLSA trained with EM.

Serves both as a baseline and as the substrate the walk-augmented variant
extends. The E and M steps are fused into a single accumulation pass over
the sparse counts (posteriors are never materialized), so memory stays
O(K * (D + V)) and the pass can be partitioned across worker threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .corpus import Corpus

logger = logging.getLogger(__name__)


@dataclass
class PlsaState:
    """theta[d, k] = p(topic k | doc d); phi[k, w] = p(word w | topic k)."""

    theta: np.ndarray
    phi: np.ndarray

    @property
    def K(self) -> int:
        return self.phi.shape[0]


def init_random(corpus: Corpus, K: int, seed: int) -> PlsaState:
    """Random state: rows are normalized positive uniform draws."""
    if K < 1:
        raise ValueError("K must be >= 1")
    rng = np.random.default_rng(seed)
    theta = rng.random((corpus.num_docs, K)) + 1e-12
    theta /= theta.sum(axis=1, keepdims=True)
    phi = rng.random((K, corpus.vocab_size)) + 1e-12
    phi /= phi.sum(axis=1, keepdims=True)
    return PlsaState(theta=theta, phi=phi)


def e_step_posterior(state: PlsaState, d: int, w: int) -> np.ndarray:
    """p(z = k | d, w) proportional to theta[d, k] * phi[k, w].

    If every topic gives word w zero probability, falls back to the
    document's topic mixture so EM stays defined.
    """
    numer = state.theta[d] * state.phi[:, w]
    s = numer.sum()
    if s <= 0.0:
        return state.theta[d].copy()
    return numer / s


def accumulate_em(corpus: Corpus, state: PlsaState, threads: int = 1):
    """One fused E+M pass. Returns (log_likelihood_of_input_state,
    theta_acc, phi_acc, sizes) with accumulators unnormalized:
    theta_acc[d, k] = sum_w n(d,w) p(k|d,w), phi_acc[k, w] = sum_d ..., and
    sizes[k] the total token mass on topic k."""
    indptr, indices, counts = corpus.csr()
    D = corpus.num_docs
    K = state.K
    V = corpus.vocab_size
    state = PlsaState(theta=np.ascontiguousarray(state.theta),
                      phi=np.ascontiguousarray(state.phi))
    theta_acc = np.zeros((D, K))
    kern = _backend.kernels
    if threads <= 1 or D < 2 * threads:
        phi_acc = np.zeros((K, V))
        sizes = np.zeros(K)
        ll = kern.plsa_em_pass(indptr, indices, counts, state.theta, state.phi,
                               theta_acc, phi_acc, sizes, 0, D)
        return ll, theta_acc, phi_acc, sizes

    bounds = np.linspace(0, D, threads + 1).astype(np.int64)
    phi_accs = [np.zeros((K, V)) for _ in range(threads)]
    size_accs = [np.zeros(K) for _ in range(threads)]

    def work(i):
        return kern.plsa_em_pass(indptr, indices, counts, state.theta,
                                 state.phi, theta_acc, phi_accs[i],
                                 size_accs[i], int(bounds[i]), int(bounds[i + 1]))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        lls = list(pool.map(work, range(threads)))
    ll = float(np.sum(lls))
    phi_acc = np.sum(phi_accs, axis=0)
    sizes = np.sum(size_accs, axis=0)
    return ll, theta_acc, phi_acc, sizes


def state_from_accumulators(theta_acc, phi_acc, expect_alive=None) -> PlsaState:
    """Normalize accumulators into a new state. Topics with zero total mass
    get zero phi rows; those not already expected dead are flagged."""
    theta = theta_acc / theta_acc.sum(axis=1, keepdims=True)
    row_mass = phi_acc.sum(axis=1)
    phi = np.zeros_like(phi_acc)
    alive = row_mass > 0.0
    phi[alive] = phi_acc[alive] / row_mass[alive, None]
    unexpected = ~alive if expect_alive is None else expect_alive & ~alive
    if np.any(unexpected):
        logger.warning("m-step produced %d topic(s) with zero mass",
                       int(unexpected.sum()))
    return PlsaState(theta=theta, phi=phi)


def m_step(corpus: Corpus, posteriors) -> PlsaState:
    """M-step from explicit posteriors, one length-K row per nonzero (d, w)
    entry in corpus CSR order."""
    indptr, indices, counts = corpus.csr()
    posteriors = np.asarray(posteriors, dtype=np.float64)
    if posteriors.shape[0] != indices.size:
        raise ValueError("need one posterior row per nonzero (d, w) entry")
    weighted = posteriors * counts[:, None].astype(np.float64)
    theta_acc = np.add.reduceat(weighted, indptr[:-1], axis=0)
    K = posteriors.shape[1]
    phi_acc = np.zeros((K, corpus.vocab_size))
    for k in range(K):
        phi_acc[k] = np.bincount(indices, weights=weighted[:, k],
                                 minlength=corpus.vocab_size)
    return state_from_accumulators(theta_acc, phi_acc)


def log_likelihood(corpus: Corpus, state: PlsaState) -> float:
    """sum_{d,w} n(d,w) log sum_k theta[d,k] phi[k,w], in nats; -inf if any
    observed word has zero probability under the document's mixture."""
    indptr, indices, counts = corpus.csr()
    return float(_backend.kernels.mixture_log_likelihood(
        indptr, indices, counts, np.ascontiguousarray(state.theta),
        np.ascontiguousarray(state.phi), 0, corpus.num_docs))


def topic_sizes(corpus: Corpus, state: PlsaState) -> np.ndarray:
    """Expected token mass per topic: sum_d len(d) * theta[d, k]."""
    return corpus.doc_lengths().astype(np.float64) @ state.theta


def train(corpus: Corpus, K: int, iters: int, seed: int, tol: float = 0.0,
          threads: int = 1):
    """EM training. Returns (state, ll_trace) where ll_trace[i] is the
    log-likelihood of the state after i iterations (index 0 = random init).
    Stops early once the relative likelihood improvement drops below tol."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    state = init_random(corpus, K, seed)
    trace = []
    for _ in range(iters):
        ll_prev, theta_acc, phi_acc, _ = accumulate_em(corpus, state, threads)
        trace.append(ll_prev)
        state = state_from_accumulators(theta_acc, phi_acc)
        if tol > 0.0 and len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if np.isfinite(prev) and abs(cur - prev) < tol * abs(prev):
                break
    trace.append(log_likelihood(corpus, state))
    return state, trace
