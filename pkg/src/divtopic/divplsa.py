"""PLSA EM with a one-step size-reinforced random walk on the topic network.

After a warmup of plain EM iterations, each per-token posterior takes one
expected walk step through the reinforced transition matrix before the
M-step sums it up; topic sizes feed back into the transitions, so large
topics absorb similar smaller ones until the active-topic count converges.

Because the walk is one fixed linear map per iteration, walking every
posterior and then summing equals summing plain posteriors and walking the
accumulators; the trainer uses the latter (tests pin the equivalence).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import network as tn
from . import plsa
from .corpus import Corpus

logger = logging.getLogger(__name__)


@dataclass
class DivPlsaConfig:
    start_topics: int
    walk_alpha: float = 0.1
    gamma: float = 1.0
    warmup_iters: int = 50
    network_refresh_every: int = 10
    active_patience: int = 3
    max_iters: int = 300
    seed: int = 0
    tol: float = 1e-6
    active_threshold: float = 0.5  # soft masses below this many tokens die
    threads: int = 1

    def __post_init__(self):
        if self.start_topics < 1:
            raise ValueError("start_topics must be >= 1")
        if self.warmup_iters < 1:
            raise ValueError("warmup_iters must be >= 1")
        if self.network_refresh_every < 1:
            raise ValueError("network_refresh_every must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not 0.0 <= self.walk_alpha < 1.0:
            raise ValueError("walk_alpha must be in [0, 1)")


@dataclass
class DivPlsaTrace:
    """Per-iteration record; index 0 describes the random initialization."""

    likelihood: list = field(default_factory=list)
    active_count: list = field(default_factory=list)
    sizes: list = field(default_factory=list)


def e_step_with_walk(state: plsa.PlsaState, net: tn.TopicNetwork,
                     d: int, w: int) -> np.ndarray:
    """Posterior for (d, w) redistributed by one expected walk step."""
    return tn.walk_step(plsa.e_step_posterior(state, d, w), net.transition)


def m_step_with_sizes(corpus: Corpus, walked_posteriors):
    """M-step from walked posteriors plus the resulting topic sizes
    (token mass per topic)."""
    indptr, indices, counts = corpus.csr()
    walked = np.asarray(walked_posteriors, dtype=np.float64)
    state = plsa.m_step(corpus, walked)
    sizes = counts.astype(np.float64) @ walked
    return state, sizes


def _walk_accumulators(theta_acc, phi_acc, sizes, P):
    """Send every accumulated posterior through P (linearity makes this
    identical to walking each posterior before accumulation)."""
    return theta_acc @ P, P.T @ phi_acc, sizes @ P


def _prune(state: plsa.PlsaState, newly_dead, survivors, doc_lens):
    """Zero the word distributions and document mass of freshly absorbed
    topics, renormalize document mixtures over survivors, and return the
    redistributed sizes."""
    state.phi[newly_dead] = 0.0
    state.theta[:, newly_dead] = 0.0
    row = state.theta.sum(axis=1)
    starved = row <= 0.0
    if np.any(starved):
        state.theta[np.ix_(starved, survivors)] = 1.0 / int(survivors.sum())
        row = state.theta.sum(axis=1)
    state.theta /= row[:, None]
    return doc_lens @ state.theta


def _likelihood_settled(trace, tol, window=10):
    """True when each of the last ``window`` iteration steps changed the
    likelihood by less than ``tol`` relative."""
    lls = [x for x in trace if x is not None][-(window + 1):]
    if len(lls) < window + 1:
        return False
    lls = np.array(lls)
    if not np.all(np.isfinite(lls)):
        return False
    rel = np.abs(np.diff(lls)) / np.maximum(np.abs(lls[:-1]), 1e-300)
    return bool(np.max(rel) < tol)


def train(corpus: Corpus, config: DivPlsaConfig):
    """Returns (state compacted to the active topics, trace, network).

    Row i of the compacted state corresponds to original topic
    ``np.nonzero(network.active)[0][i]``.
    """
    K0 = config.start_topics
    doc_lens = corpus.doc_lengths().astype(np.float64)
    state = plsa.init_random(corpus, K0, config.seed)

    trace = DivPlsaTrace()
    trace.likelihood.append(None)  # L(init), filled by the first EM pass
    trace.active_count.append(K0)
    trace.sizes.append(doc_lens @ state.theta)

    net = None
    stable_refreshes = 0
    last_refresh_active = K0

    for it in range(1, config.max_iters + 1):
        ll_prev, theta_acc, phi_acc, sizes = plsa.accumulate_em(
            corpus, state, config.threads)
        trace.likelihood[it - 1] = ll_prev

        # The trace through it-1 now fully describes the previous state; if
        # it has converged, return that state rather than stepping past it.
        if (it - 1 > config.warmup_iters
                and stable_refreshes >= config.active_patience
                and _likelihood_settled(trace.likelihood, config.tol)):
            break

        walked = it > config.warmup_iters
        if walked:
            theta_acc, phi_acc, sizes = _walk_accumulators(
                theta_acc, phi_acc, sizes, net.transition)
        state = plsa.state_from_accumulators(
            theta_acc, phi_acc, expect_alive=None if net is None else net.active)

        if it == config.warmup_iters:
            net = tn.build_network(state.phi, sizes, config.walk_alpha,
                                   config.gamma, config.active_threshold)
            last_refresh_active = tn.active_count(net)
        elif walked and (it - config.warmup_iters) % config.network_refresh_every == 0:
            will_be_active = net.active & (sizes >= config.active_threshold)
            newly_dead = net.active & ~will_be_active
            if np.any(newly_dead):
                sizes = _prune(state, newly_dead, will_be_active, doc_lens)
            net = tn.build_network(state.phi, sizes, config.walk_alpha,
                                   config.gamma, config.active_threshold,
                                   active=will_be_active)
            k_star = tn.active_count(net)
            if k_star == last_refresh_active:
                stable_refreshes += 1
            else:
                stable_refreshes = 0
            last_refresh_active = k_star

        trace.likelihood.append(None)
        trace.active_count.append(tn.active_count(net) if net is not None else K0)
        trace.sizes.append(sizes.copy())

    if net is None:
        net = tn.build_network(state.phi, trace.sizes[-1], config.walk_alpha,
                               config.gamma, config.active_threshold)
    if trace.likelihood[-1] is None:
        trace.likelihood[-1] = plsa.log_likelihood(corpus, state)

    act = net.active
    compact = plsa.PlsaState(theta=state.theta[:, act].copy(),
                             phi=state.phi[act].copy())
    return compact, trace, net
