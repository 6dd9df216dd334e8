#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--docs N] [--vocab V] [--topics K]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from divtopic import _backend  # noqa: E402
from divtopic.corpus import generate_synthetic  # noqa: E402


def planted(n_topics, V, focus=0.95):
    block = V // n_topics
    topics = np.full((n_topics, V), (1 - focus) / V)
    for k in range(n_topics):
        topics[k, k * block:(k + 1) * block] += focus / block
    return topics


def bench_em(kern, corpus, K, repeats):
    indptr, indices, counts = corpus.csr()
    rng = np.random.default_rng(0)
    theta = rng.random((corpus.num_docs, K))
    theta /= theta.sum(axis=1, keepdims=True)
    phi = rng.random((K, corpus.vocab_size))
    phi /= phi.sum(axis=1, keepdims=True)
    best = float("inf")
    for _ in range(repeats):
        theta_acc = np.zeros_like(theta)
        phi_acc = np.zeros_like(phi)
        sizes = np.zeros(K)
        t0 = time.perf_counter()
        kern.plsa_em_pass(indptr, indices, counts, theta, phi,
                          theta_acc, phi_acc, sizes, 0, corpus.num_docs)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_gibbs(kern, corpus, K, repeats, walk=False):
    rng = np.random.default_rng(1)
    words, offsets = corpus.token_stream()
    z = rng.integers(0, K, size=words.size).astype(np.int32)
    D = corpus.num_docs
    n_dk = np.zeros((D, K), dtype=np.int64)
    for d in range(D):
        n_dk[d] = np.bincount(z[offsets[d]:offsets[d + 1]], minlength=K)
    n_kw = np.zeros((K, corpus.vocab_size), dtype=np.int64)
    np.add.at(n_kw, (z, words), 1)
    n_k = n_kw.sum(axis=1)
    alpha = np.full(K, 50.0 / K)
    active = np.ones(K, dtype=np.uint8)
    P = rng.random((K, K)) + 0.1
    P /= P.sum(axis=1, keepdims=True)
    p_cum = np.cumsum(P, axis=1)
    last_pos = np.full(K, K - 1, dtype=np.int64)

    best = float("inf")
    for _ in range(repeats):
        u1 = rng.random(words.size)
        u2 = rng.random(words.size)
        t0 = time.perf_counter()
        if walk:
            kern.gibbs_sweep_walk(offsets, words, z, n_dk, n_kw, n_k, alpha,
                                  0.01, active, p_cum, last_pos, u1, u2)
        else:
            kern.gibbs_sweep(offsets, words, z, n_dk, n_kw, n_k, alpha,
                             0.01, active, u1)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--docs", type=int, default=2000)
    parser.add_argument("--vocab", type=int, default=500)
    parser.add_argument("--doc-len", type=int, default=100)
    parser.add_argument("--topics", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    corpus, _ = generate_synthetic(planted(5, args.vocab), 0.05, args.docs,
                                   args.doc_len, seed=42)
    backends = _backend.available_backends()
    print(f"corpus: {corpus.num_docs} docs, {corpus.token_total} tokens, "
          f"{len(corpus.csr()[1])} nonzeros; K={args.topics}")
    if "cython" not in backends:
        print("note: compiled kernels unavailable; showing python only")

    rows = []
    for name in ("em_pass", "gibbs_sweep", "gibbs_sweep_walk"):
        timings = {}
        for backend, kern in backends.items():
            if name == "em_pass":
                t = bench_em(kern, corpus, args.topics, args.repeats)
            else:
                t = bench_gibbs(kern, corpus, args.topics, args.repeats,
                                walk=name.endswith("walk"))
            timings[backend] = t
        rows.append((name, timings))

    print(f"\n{'kernel':<18}" + "".join(f"{b:>14}" for b in backends)
          + ("       speedup" if len(backends) > 1 else ""))
    for name, timings in rows:
        line = f"{name:<18}" + "".join(f"{timings[b] * 1e3:>12.2f}ms"
                                       for b in backends)
        if "cython" in timings and "python" in timings:
            line += f"{timings['python'] / timings['cython']:>12.1f}x"
        print(line)


if __name__ == "__main__":
    main()
