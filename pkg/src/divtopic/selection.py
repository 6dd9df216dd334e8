"""Top-K topic selection: by size, by maximal marginal relevance, or by a
visit-reinforced diversity walk over the topic similarity graph."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model_io import TopicModel
from .network import similarity_matrix

import logging

logger = logging.getLogger(__name__)


@dataclass
class TopicRanking:
    """Ordered (topic_id, score, proportion) triples, best first.
    ``truncated`` is set when fewer topics than requested were available."""

    entries: list = field(default_factory=list)  # (topic_id, score, proportion)
    method: str = ""
    truncated: bool = False

    def topic_ids(self):
        return [e[0] for e in self.entries]

    def __len__(self):
        return len(self.entries)


def _proportions(model: TopicModel) -> np.ndarray:
    return model.sizes / model.token_total


def top_k_by_size(model: TopicModel, K: int) -> TopicRanking:
    """Largest topics first; ties broken by lower topic id."""
    sizes = model.sizes
    props = _proportions(model)
    order = np.lexsort((np.arange(sizes.size), -sizes))
    truncated = K > sizes.size
    if truncated:
        logger.warning("requested top %d of %d topics; returning all", K,
                       sizes.size)
    picks = order[:min(K, sizes.size)]
    entries = [(int(t), float(sizes[t]), float(props[t])) for t in picks]
    return TopicRanking(entries=entries, method="topk", truncated=truncated)


def mmr_select(model: TopicModel, K: int, lam: float) -> TopicRanking:
    """Greedy maximal marginal relevance.

    Relevance is the topic's share of the corpus tokens; redundancy is the
    max cosine similarity to any already selected topic. Each pick maximizes
    lam * relevance - (1 - lam) * redundancy, ties by lower id.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    n = model.sizes.size
    rel = _proportions(model)
    sim = similarity_matrix(model.phi, np.ones(n, dtype=bool))
    truncated = K > n
    K = min(K, n)

    selected = []
    scores = []
    candidates = rel.copy()  # first pick: pure relevance
    for _ in range(K):
        pick = int(np.argmax(candidates))  # argmax takes the lowest id on ties
        selected.append(pick)
        scores.append(float(candidates[pick]))
        max_sim = sim[:, selected].max(axis=1)
        candidates = lam * rel - (1.0 - lam) * max_sim
        candidates[selected] = -np.inf
    entries = [(t, s, float(rel[t])) for t, s in zip(selected, scores)]
    return TopicRanking(entries=entries, method="mmr", truncated=truncated)


def divrank_select(model: TopicModel, K: int, alpha_dr: float,
                   lambda_dr: float, iters: int = 200,
                   tol: float = 1e-10) -> TopicRanking:
    """Cumulative diversity ranking on the topic similarity graph.

    Transitions are row-normalized cosine similarities with self-loop weight
    ``alpha_dr``; topic proportions act as the preference (teleport) vector.
    Each iteration re-weights transitions by accumulated visit mass, so
    prominent nodes drain score from their neighborhoods:

        pi'(j) = (1 - lambda_dr) pref(j)
                 + lambda_dr * sum_i pi(i) p0(i,j) V(j) / sum_j' p0(i,j') V(j')

    with V incremented by pi after every iteration (V starts at 1).
    """
    if not 0.0 < lambda_dr < 1.0:
        raise ValueError("lambda_dr must be in (0, 1)")
    if not 0.0 <= alpha_dr < 1.0:
        raise ValueError("alpha_dr must be in [0, 1)")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    n = model.sizes.size
    pref = _proportions(model)
    pref = pref / pref.sum()

    sim = similarity_matrix(model.phi, np.ones(n, dtype=bool))
    off = sim * (1.0 - np.eye(n))
    denom = off.sum(axis=1)
    p0 = np.zeros((n, n))
    for i in range(n):
        if denom[i] > 0:
            p0[i] = (1.0 - alpha_dr) * off[i] / denom[i]
            p0[i, i] = alpha_dr
        else:
            p0[i, i] = 1.0

    visits = np.ones(n)
    pi = pref.copy()
    converged = False
    for _ in range(iters):
        raw = p0 * visits[None, :]
        trans = raw / raw.sum(axis=1, keepdims=True)
        new = (1.0 - lambda_dr) * pref + lambda_dr * (pi @ trans)
        visits = visits + new
        if np.abs(new - pi).max() < tol:
            pi = new
            converged = True
            break
        pi = new
    if not converged:
        logger.warning("diversity walk did not converge in %d iterations", iters)

    order = np.lexsort((np.arange(n), -pi))
    truncated = K > n
    picks = order[:min(K, n)]
    props = _proportions(model)
    entries = [(int(t), float(pi[t]), float(props[t])) for t in picks]
    return TopicRanking(entries=entries, method="divrank", truncated=truncated)


def restrict_model(model: TopicModel, ranking: TopicRanking) -> TopicModel:
    """Keep only the ranked topics (phi rows copied); document mixtures over
    the restriction are re-derived at evaluation time by fold-in."""
    if len(ranking) == 0:
        raise ValueError("ranking is empty")
    ids = ranking.topic_ids()
    if len(set(ids)) != len(ids):
        raise ValueError("ranking contains duplicate topics")
    for t in ids:
        if not 0 <= t < model.sizes.size:
            raise ValueError(f"ranking references unknown topic {t}")
    sel = np.array(ids, dtype=np.int64)
    return TopicModel(kind=model.kind, phi=model.phi[sel].copy(),
                      sizes=model.sizes[sel].copy(),
                      token_total=model.token_total,
                      topic_ids=[model.topic_ids[t] for t in ids],
                      theta=None if model.theta is None
                      else model.theta[:, sel].copy(),
                      alpha=None if model.alpha is None
                      else model.alpha[sel].copy(),
                      beta=model.beta, iteration=model.iteration,
                      likelihood=model.likelihood, num_docs=model.num_docs)
