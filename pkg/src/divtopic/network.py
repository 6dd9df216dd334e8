"""The "social network" of topics.

Topics form a complete weighted graph whose edge weights are cosine
similarities between topic-word distributions. A token assigned to topic i
leaves it with probability ``walk_alpha``, moving to neighbor j in proportion
to similarity; that organic transition is then reinforced by the target
topic's size raised to ``gamma`` and renormalized. Large topics thereby
absorb tokens from smaller, similar ones.

Inactive (absorbed) topics keep identity rows and zero columns so all
matrices retain their original dimension; compaction happens only at export.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class TopicNetwork:
    """Similarity graph plus organic and reinforced transition matrices.

    ``transition`` is frozen between :func:`refresh` calls; walk operations
    are read-only against it.
    """

    K: int
    similarity: np.ndarray     # K x K, symmetric, unit diagonal
    organic: np.ndarray        # K x K row-stochastic
    transition: np.ndarray     # K x K row-stochastic, size-reinforced
    sizes: np.ndarray          # token mass per topic, >= 0
    walk_alpha: float
    gamma: float
    active: np.ndarray         # bool mask; pruning is one-way
    active_threshold: float = 0.5


def cosine_similarity(phi_i, phi_j) -> float:
    """Cosine of two non-negative word distributions; in [0, 1]."""
    phi_i = np.asarray(phi_i, dtype=np.float64)
    phi_j = np.asarray(phi_j, dtype=np.float64)
    ni = np.linalg.norm(phi_i)
    nj = np.linalg.norm(phi_j)
    if ni == 0.0 or nj == 0.0:
        raise ValueError("cosine similarity undefined for a zero-norm topic; "
                         "exclude dead topics first")
    return float(phi_i @ phi_j / (ni * nj))


def similarity_matrix(phi, active) -> np.ndarray:
    """Pairwise cosine similarities over active topics.

    Inactive rows/columns are zeroed; the diagonal is 1 everywhere (it is
    never used in neighbor normalization).
    """
    phi = np.asarray(phi, dtype=np.float64)
    active = np.asarray(active, dtype=bool)
    K = phi.shape[0]
    W = np.zeros((K, K))
    idx = np.nonzero(active)[0]
    if idx.size:
        sub = phi[idx]
        norms = np.linalg.norm(sub, axis=1)
        if np.any(norms == 0.0):
            dead = idx[norms == 0.0]
            raise ValueError(f"active topic(s) {dead.tolist()} have zero-norm "
                             "word distributions")
        sims = (sub @ sub.T) / np.outer(norms, norms)
        np.clip(sims, 0.0, 1.0, out=sims)
        W[np.ix_(idx, idx)] = sims
    np.fill_diagonal(W, 1.0)
    return W


def build_organic(W, walk_alpha: float, active) -> np.ndarray:
    """Similarity-proportional transitions with self-loop ``1 - walk_alpha``.

    Off-diagonal mass for source i is ``walk_alpha`` split across active
    neighbors j != i in proportion to W[i, j]. A source with no positive
    similarity to any active neighbor keeps a self-loop of 1 (forced by
    row-stochasticity). Inactive sources get identity rows; inactive targets
    get zero columns.
    """
    if not 0.0 <= walk_alpha < 1.0:
        raise ValueError("walk_alpha must be in [0, 1)")
    W = np.asarray(W, dtype=np.float64)
    active = np.asarray(active, dtype=bool)
    K = W.shape[0]
    P0 = np.zeros((K, K))
    neighbor = np.outer(active, active) & ~np.eye(K, dtype=bool)
    weights = np.where(neighbor, W, 0.0)
    denom = weights.sum(axis=1)
    for i in range(K):
        if not active[i]:
            P0[i, i] = 1.0
        elif denom[i] <= 0.0:
            P0[i, i] = 1.0
        else:
            P0[i] = walk_alpha * weights[i] / denom[i]
            P0[i, i] = 1.0 - walk_alpha
    return P0


def reinforce(P0, sizes, gamma: float) -> np.ndarray:
    """Multiply each transition by the target's size to the power ``gamma``
    and renormalize rows (0**0 == 1, so gamma == 0 returns P0 unchanged).

    A row whose reachable targets all have zero reinforced mass degenerates
    to a self-loop.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    P0 = np.asarray(P0, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.float64)
    if np.any(sizes < 0):
        raise ValueError("topic sizes must be >= 0")
    factors = np.power(sizes, gamma)  # 0**0 == 1 per numpy
    raw = P0 * factors[None, :]
    denom = raw.sum(axis=1)
    P = np.zeros_like(P0)
    dead_rows = denom <= 0.0
    ok = ~dead_rows
    P[ok] = raw[ok] / denom[ok, None]
    if np.any(dead_rows):
        logger.warning("reinforce: %d row(s) had zero reachable mass; using "
                       "self-loops", int(dead_rows.sum()))
        P[np.nonzero(dead_rows)[0], np.nonzero(dead_rows)[0]] = 1.0
    return P


def walk_step(assignment, P) -> np.ndarray:
    """One expected walk step: redistribute a topic distribution through P."""
    assignment = np.asarray(assignment, dtype=np.float64)
    if abs(assignment.sum() - 1.0) > 1e-10:
        raise ValueError("assignment must sum to 1")
    return assignment @ np.asarray(P, dtype=np.float64)


def walk_sample(current_topic: int, P, rng) -> int:
    """Sample the next topic from row ``current_topic`` of P."""
    row = np.asarray(P, dtype=np.float64)[current_topic]
    cum = np.cumsum(row)
    r = rng.random() * cum[-1]
    return int(np.searchsorted(cum, r, side="left").clip(0, row.size - 1))


def build_network(phi, sizes, walk_alpha: float, gamma: float,
                  active_threshold: float = 0.5,
                  active=None) -> TopicNetwork:
    """Construct the network from topic-word distributions and sizes."""
    sizes = np.asarray(sizes, dtype=np.float64).copy()
    K = sizes.size
    if active is None:
        active = sizes >= active_threshold
    else:
        active = np.asarray(active, dtype=bool) & (sizes >= active_threshold)
    W = similarity_matrix(phi, active)
    P0 = build_organic(W, walk_alpha, active)
    # Inactive rows are identity in P0 and their columns are zero, so any
    # positive stand-in size leaves the result untouched while keeping the
    # degenerate-row warning reserved for anomalous active rows.
    P = reinforce(P0, np.where(active, sizes, 1.0), gamma)
    return TopicNetwork(K=K, similarity=W, organic=P0, transition=P,
                        sizes=sizes, walk_alpha=walk_alpha, gamma=gamma,
                        active=active, active_threshold=active_threshold)


def refresh(net: TopicNetwork, phi, sizes) -> TopicNetwork:
    """Recompute the active mask, similarities, organic and reinforced
    transitions, in that order. Pruning is one-way: a topic inactive in
    ``net`` stays inactive whatever its new size."""
    return build_network(phi, sizes, net.walk_alpha, net.gamma,
                         active_threshold=net.active_threshold,
                         active=net.active)


def active_count(net: TopicNetwork) -> int:
    return int(net.active.sum())
