"""Shared trained-model container and its on-disk text format.

All four trainers export the same structure: a header, per-topic sizes, and
dense topic-word rows, with document mixtures as an optional section. Floats
are written with repr-level precision so a save/load round trip is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

FORMAT_TAG = "divtopic-model v1"


@dataclass
class TopicModel:
    kind: str                 # plsa | lda | divplsa | divlda
    phi: np.ndarray           # K x V topic-word rows
    sizes: np.ndarray         # token mass per topic
    token_total: float
    topic_ids: list           # original topic indices before compaction
    theta: np.ndarray | None = None
    alpha: np.ndarray | None = None
    beta: float | None = None
    iteration: int = 0
    likelihood: float = float("nan")
    num_docs: int = 0         # training documents (theta rows when embedded)

    @property
    def K(self) -> int:
        return self.phi.shape[0]

    @property
    def V(self) -> int:
        return self.phi.shape[1]

    def top_words(self, topic: int, n: int, vocabulary=None):
        """Top-n word ids (or terms) of a topic, ties broken by lower id."""
        p = self.phi[topic]
        order = np.lexsort((np.arange(p.size), -p))[:n]
        if vocabulary is None:
            return [int(w) for w in order]
        return [vocabulary.terms[int(w)] for w in order]


def from_plsa(state, sizes, token_total, iteration, likelihood,
              topic_ids=None, keep_theta=False) -> TopicModel:
    return TopicModel(kind="plsa", phi=state.phi.copy(),
                      sizes=np.asarray(sizes, dtype=np.float64).copy(),
                      token_total=float(token_total),
                      topic_ids=list(topic_ids) if topic_ids is not None
                      else list(range(state.K)),
                      theta=state.theta.copy() if keep_theta else None,
                      iteration=iteration, likelihood=likelihood,
                      num_docs=state.theta.shape[0])


def from_lda(state, token_total, iteration, likelihood, topic_ids=None,
             keep_theta=False, kind="lda") -> TopicModel:
    from . import lda
    return TopicModel(kind=kind, phi=lda.estimate_phi(state),
                      sizes=state.n_k.astype(np.float64),
                      token_total=float(token_total),
                      topic_ids=list(topic_ids) if topic_ids is not None
                      else list(range(state.K)),
                      theta=lda.estimate_theta(state) if keep_theta else None,
                      alpha=state.alpha_vec.copy(), beta=state.beta,
                      iteration=iteration, likelihood=likelihood,
                      num_docs=state.n_dk.shape[0])


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def save_model(model: TopicModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {FORMAT_TAG}\n")
        fh.write(f"model {model.kind}\n")
        fh.write(f"K {model.K}\n")
        fh.write(f"V {model.V}\n")
        D = (model.theta.shape[0] if model.theta is not None
             else model.num_docs)
        fh.write(f"D {D}\n")
        fh.write(f"iteration {model.iteration}\n")
        fh.write(f"likelihood {model.likelihood!r}\n")
        fh.write(f"token_total {model.token_total!r}\n")
        fh.write(f"topic_ids {' '.join(str(t) for t in model.topic_ids)}\n")
        fh.write(f"sizes {_fmt(model.sizes)}\n")
        if model.alpha is not None:
            fh.write(f"alpha {_fmt(model.alpha)}\n")
        if model.beta is not None:
            fh.write(f"beta {model.beta!r}\n")
        fh.write("phi\n")
        for k in range(model.K):
            fh.write(_fmt(model.phi[k]) + "\n")
        if model.theta is not None:
            fh.write("theta\n")
            for d in range(model.theta.shape[0]):
                fh.write(_fmt(model.theta[d]) + "\n")
        fh.write("end\n")


def load_model(path) -> TopicModel:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != f"# {FORMAT_TAG}":
        raise DataError(f"{path}: not a {FORMAT_TAG} file")

    header = {}
    i = 1
    while i < len(lines) and lines[i] != "phi":
        key, _, value = lines[i].partition(" ")
        header[key] = value
        i += 1
    if i == len(lines):
        raise DataError(f"{path}: missing phi section")
    try:
        K = int(header["K"])
        V = int(header["V"])
        D = int(header["D"])
        kind = header["model"]
        iteration = int(header["iteration"])
        likelihood = float(header["likelihood"])
        token_total = float(header["token_total"])
        topic_ids = [int(t) for t in header["topic_ids"].split()]
        sizes = np.array([float(x) for x in header["sizes"].split()])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad model header ({exc})") from exc
    alpha = (np.array([float(x) for x in header["alpha"].split()])
             if "alpha" in header else None)
    beta = float(header["beta"]) if "beta" in header else None
    if len(topic_ids) != K or sizes.size != K:
        raise DataError(f"{path}: header vectors do not match K={K}")

    def read_rows(start, count, width, what):
        rows = np.empty((count, width))
        for r in range(count):
            parts = lines[start + r].split()
            if len(parts) != width:
                raise DataError(f"{path}: {what} row {r} has {len(parts)} "
                                f"values, expected {width}")
            rows[r] = [float(x) for x in parts]
        return rows

    i += 1
    if i + K > len(lines):
        raise DataError(f"{path}: truncated phi section")
    phi = read_rows(i, K, V, "phi")
    i += K
    theta = None
    if i < len(lines) and lines[i] == "theta":
        i += 1
        if i + D > len(lines):
            raise DataError(f"{path}: truncated theta section")
        theta = read_rows(i, D, K, "theta")
        i += D
    if i >= len(lines) or lines[i] != "end":
        raise DataError(f"{path}: missing end marker")
    return TopicModel(kind=kind, phi=phi, sizes=sizes, token_total=token_total,
                      topic_ids=topic_ids, theta=theta, alpha=alpha, beta=beta,
                      iteration=iteration, likelihood=likelihood, num_docs=D)
