"""Collapsed Gibbs LDA where each freshly sampled assignment takes one
sampled step through the size-reinforced topic network before counts are
incremented.

Hard counts make absorption exact: a topic whose count hits zero at a
network refresh is pruned, excluded from the sampling candidate set, and
its transition column stays zero, so it can never regain tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from . import lda
from . import network as tn
from .corpus import Corpus


@dataclass
class DivLdaConfig:
    start_topics: int
    walk_alpha: float = 0.1
    gamma: float = 1.0
    warmup_sweeps: int = 500
    network_refresh_every: int = 50
    total_sweeps: int = 2000
    seed: int = 0
    beta: float = 0.01
    alpha0: float | None = None
    active_patience: int = 6  # hard-count absorption trickles; don't stop early
    active_threshold: float = 1.0  # integer counts: alive iff n_k >= 1

    def __post_init__(self):
        if self.start_topics < 1:
            raise ValueError("start_topics must be >= 1")
        if self.warmup_sweeps < 1:
            raise ValueError("warmup_sweeps must be >= 1")
        if self.network_refresh_every < 1:
            raise ValueError("network_refresh_every must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not 0.0 <= self.walk_alpha < 1.0:
            raise ValueError("walk_alpha must be in [0, 1)")


@dataclass
class DivLdaTrace:
    """Per-sweep record (index 0 describes the random initialization)."""

    likelihood: list = field(default_factory=list)
    active_count: list = field(default_factory=list)
    sizes: list = field(default_factory=list)


def _walk_tables(net: tn.TopicNetwork):
    """Row cumulative sums of the transition matrix plus each row's last
    positive column (used when a uniform lands past the float row sum)."""
    P = net.transition
    p_cum = np.cumsum(P, axis=1)
    last_pos = (P.shape[1] - 1
                - np.argmax(P[:, ::-1] > 0, axis=1)).astype(np.int64)
    return p_cum, last_pos


def sweep_with_walk(state: lda.LdaState, net: tn.TopicNetwork, rng) -> lda.LdaState:
    """One sweep: per token, decrement, sample from the collapsed conditional
    restricted to active topics, walk one sampled step, increment."""
    p_cum, last_pos = _walk_tables(net)
    active = net.active.astype(np.uint8)
    n = state.token_words.size
    u1 = rng.random(n)
    u2 = rng.random(n)
    _backend.kernels.gibbs_sweep_walk(state.doc_offsets, state.token_words,
                                      state.z, state.n_dk, state.n_kw,
                                      state.n_k, state.alpha_vec, state.beta,
                                      active, p_cum, last_pos, u1, u2)
    return state


def _build_net(state: lda.LdaState, config: DivLdaConfig, active=None):
    return tn.build_network(lda.estimate_phi(state),
                            state.n_k.astype(np.float64),
                            config.walk_alpha, config.gamma,
                            active_threshold=config.active_threshold,
                            active=active)


def train(corpus: Corpus, config: DivLdaConfig):
    """Returns (state compacted to the active topics, trace, network).

    Warmup sweeps are plain Gibbs; afterwards every token's assignment is
    walked. The network is rebuilt every ``network_refresh_every`` sweeps
    and alpha is re-estimated after every sweep. Training stops at
    ``total_sweeps`` or once the active count has been stable for
    ``active_patience`` consecutive refreshes.
    """
    rng = np.random.default_rng(config.seed)
    state = lda.init_state(corpus, config.start_topics, rng,
                           alpha0=config.alpha0, beta=config.beta)
    trace = DivLdaTrace()
    trace.likelihood.append(lda.log_likelihood(corpus, state))
    trace.active_count.append(int((state.n_k > 0).sum()))
    trace.sizes.append(state.n_k.copy())

    net = None
    stable_refreshes = 0
    last_refresh_active = None

    for s in range(1, config.total_sweeps + 1):
        if s <= config.warmup_sweeps:
            lda.sweep(state, rng)
        else:
            due = (s - config.warmup_sweeps - 1) % config.network_refresh_every == 0
            if net is None or due:
                prior_active = net.active if net is not None else None
                net = _build_net(state, config, active=prior_active)
                k_star = tn.active_count(net)
                if last_refresh_active is not None:
                    if k_star == last_refresh_active:
                        stable_refreshes += 1
                    else:
                        stable_refreshes = 0
                last_refresh_active = k_star
            sweep_with_walk(state, net, rng)
        state.alpha_vec = lda.optimize_alpha(state)

        trace.likelihood.append(lda.log_likelihood(corpus, state))
        trace.active_count.append(tn.active_count(net) if net is not None
                                  else int((state.n_k > 0).sum()))
        trace.sizes.append(state.n_k.copy())

        if stable_refreshes >= config.active_patience:
            break

    if net is None:
        net = _build_net(state, config)

    act = net.active
    idx = np.nonzero(act)[0]
    remap = np.full(config.start_topics, -1, dtype=np.int32)
    remap[idx] = np.arange(idx.size, dtype=np.int32)
    # masked-dead topics hold no tokens, so every assignment remaps
    assert np.all(remap[state.z] >= 0)
    compact = lda.LdaState(z=remap[state.z], token_words=state.token_words,
                           doc_offsets=state.doc_offsets,
                           n_dk=state.n_dk[:, act].copy(),
                           n_kw=state.n_kw[act].copy(),
                           n_k=state.n_k[act].copy(),
                           alpha_vec=state.alpha_vec[act].copy(),
                           beta=state.beta)
    return compact, trace, net
