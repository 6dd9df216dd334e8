import numpy as np
import pytest

from divtopic.corpus import Corpus, Document, Vocabulary, generate_synthetic


def pytest_addoption(parser):
    parser.addoption("--run-20ng", action="store_true", default=False,
                     help="run the optional 20 Newsgroups smoke test "
                          "(needs DIVTOPIC_20NG_DOCS/VOCAB env vars)")


def planted_topics(n_topics=5, V=500, focus=0.95):
    """Block-structured word distributions: each topic concentrates
    ``focus`` of its mass on its own V/n_topics word block, the rest spread
    uniformly. focus=1.0 gives fully disjoint supports."""
    block = V // n_topics
    topics = np.full((n_topics, V), (1.0 - focus) / V)
    for k in range(n_topics):
        topics[k, k * block:(k + 1) * block] += focus / block
    return topics


def make_corpus(rows, V=None):
    """Corpus from a list of {word_id: count} dicts."""
    if V is None:
        V = 1 + max(w for row in rows for w in row)
    docs = []
    for row in rows:
        ids = sorted(row)
        docs.append(Document(np.array(ids, dtype=np.int32),
                             np.array([row[w] for w in ids], dtype=np.int64)))
    return Corpus(Vocabulary(tuple(f"w{i}" for i in range(V))), docs)


def random_corpus(rng, n_docs=10, V=12, max_len=30):
    rows = []
    for _ in range(n_docs):
        n = rng.integers(1, max_len + 1)
        words = rng.integers(0, V, size=n)
        row = {}
        for w in words:
            row[int(w)] = row.get(int(w), 0) + 1
        rows.append(row)
    return make_corpus(rows, V=V)


@pytest.fixture(scope="session")
def small_planted():
    """Tiny well-separated corpus for fast training tests."""
    corpus, record = generate_synthetic(planted_topics(3, V=60, focus=1.0),
                                        doc_topic_prior=0.05, n_docs=120,
                                        doc_len=40, seed=7)
    return corpus, record
