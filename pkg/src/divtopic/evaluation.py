"""Summarization quality metrics.

Semantic coherence: mean pairwise pointwise mutual information of each
topic's top-N words, with probabilities taken from document frequencies in a
reference corpus. Information coverage: perplexity of held-out predict
tokens under document mixtures folded in from the observed tokens with the
topic-word rows frozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, cooccurrence

DEFAULT_TOP_N = 20
TOKEN_PROB_FLOOR = 1e-12


@dataclass
class EvalReport:
    per_topic_pmi: list | None = None
    mean_pmi: float | None = None
    perplexity: float | None = None
    k_used: int = 0
    config: dict = field(default_factory=dict)
    zero_pair_count: int = 0     # word pairs that needed joint-count smoothing
    floored_tokens: int = 0      # predict tokens that hit the probability floor


def pmi_coherence(topics, reference: Corpus, top_n: int = DEFAULT_TOP_N,
                  smoothing_eps: float = 1.0) -> EvalReport:
    """Per-topic and mean PMI of the top-n word pairs.

    A pair's joint document count of zero is replaced by ``smoothing_eps``
    (and counted in the report) so the score stays finite; nonzero counts are
    used as is, which keeps pairs that are exactly independent at PMI 0.
    """
    topics = np.asarray(topics, dtype=np.float64)
    if top_n < 2:
        raise ValueError("top_n must be >= 2")
    if reference.num_docs == 0:
        raise ValueError("reference corpus is empty")

    K = topics.shape[0]
    top_words = []
    for k in range(K):
        p = topics[k]
        order = np.lexsort((np.arange(p.size), -p))[:top_n]
        top_words.append([int(w) for w in order])

    wanted = set(w for ws in top_words for w in ws)
    stats = cooccurrence(reference, wanted)
    n_docs = stats.doc_count

    zero_pairs = 0
    per_topic = []
    for words in top_words:
        total = 0.0
        n_pairs = 0
        for a_i in range(len(words)):
            for b_i in range(a_i + 1, len(words)):
                a, b = words[a_i], words[b_i]
                joint = stats.pair(a, b)
                df_a = stats.doc_freq[a]
                df_b = stats.doc_freq[b]
                if joint == 0:
                    joint = smoothing_eps
                    zero_pairs += 1
                if df_a == 0:
                    df_a = smoothing_eps
                    zero_pairs += 1
                if df_b == 0:
                    df_b = smoothing_eps
                    zero_pairs += 1
                p_ab = joint / n_docs
                p_a = df_a / n_docs
                p_b = df_b / n_docs
                total += math.log(p_ab / (p_a * p_b))
                n_pairs += 1
        per_topic.append(total / n_pairs)

    return EvalReport(per_topic_pmi=per_topic,
                      mean_pmi=float(np.mean(per_topic)),
                      k_used=K,
                      config={"top_n": top_n, "smoothing_eps": smoothing_eps,
                              "smoothing": "zero-only"},
                      zero_pair_count=zero_pairs)


def fold_in_theta(phi, document, iters: int = 50) -> np.ndarray:
    """EM for one document's topic mixture with phi frozen, from uniform."""
    phi = np.asarray(phi, dtype=np.float64)
    K = phi.shape[0]
    cols = phi[:, document.word_ids].T          # (n_unique, K)
    counts = document.counts.astype(np.float64)
    theta = np.full(K, 1.0 / K)
    for _ in range(iters):
        numer = cols * theta[None, :]
        s = numer.sum(axis=1)
        ok = s > 0.0
        post = np.zeros_like(numer)
        post[ok] = numer[ok] / s[ok, None]
        post[~ok] = theta[None, :]
        theta = counts @ post
        theta /= theta.sum()
    return theta


def perplexity(selected_phi, holdout, fold_in_iters: int = 50) -> EvalReport:
    """exp of the mean negative log probability per predict token.

    Each held-out document's mixture is folded in from its observed part;
    predict tokens with zero probability under every selected topic are
    floored (and counted).
    """
    phi = np.asarray(selected_phi, dtype=np.float64)
    if not holdout:
        raise ValueError("holdout list is empty")
    total_logp = 0.0
    total_tokens = 0
    floored = 0
    for split in holdout:
        theta = fold_in_theta(phi, split.observed, iters=fold_in_iters)
        probs = theta @ phi[:, split.predict.word_ids]
        low = probs < TOKEN_PROB_FLOOR
        if np.any(low):
            floored += int(split.predict.counts[low].sum())
            probs = np.maximum(probs, TOKEN_PROB_FLOOR)
        total_logp += float(split.predict.counts @ np.log(probs))
        total_tokens += split.predict.total_tokens
    value = math.exp(-total_logp / total_tokens)
    return EvalReport(perplexity=value, k_used=phi.shape[0],
                      config={"fold_in_iters": fold_in_iters},
                      floored_tokens=floored)
