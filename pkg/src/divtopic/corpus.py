"""Sparse bag-of-words corpora: loading, validation, holdout splits,
document co-occurrence counts, and synthetic corpus generation.

The canonical on-disk format is the UCI bag-of-words layout: three header
lines (document count D, vocabulary size W, triple count NNZ) followed by
NNZ lines of ``docID wordID count`` with 1-based ids.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Vocabulary:
    """Ordered list of unique terms; word id = position in ``terms``."""

    terms: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise DataError("vocabulary contains duplicate terms")
        if any(not t for t in self.terms):
            raise DataError("vocabulary contains an empty term")

    @property
    def size(self) -> int:
        return len(self.terms)


class Document:
    """Sparse word-count vector: unique sorted word ids with counts >= 1."""

    __slots__ = ("word_ids", "counts", "total_tokens")

    def __init__(self, word_ids, counts):
        word_ids = np.asarray(word_ids, dtype=np.int32)
        counts = np.asarray(counts, dtype=np.int64)
        if word_ids.shape != counts.shape or word_ids.ndim != 1:
            raise DataError("word_ids and counts must be 1-d and equal length")
        if word_ids.size and np.any(np.diff(word_ids) <= 0):
            raise DataError("word ids must be unique and sorted ascending")
        if np.any(counts < 1):
            raise DataError("every word count must be >= 1")
        self.word_ids = word_ids
        self.counts = counts
        self.total_tokens = int(counts.sum())

    def __len__(self):
        return self.word_ids.size

    def __eq__(self, other):
        return (isinstance(other, Document)
                and np.array_equal(self.word_ids, other.word_ids)
                and np.array_equal(self.counts, other.counts))

    def token_stream(self) -> np.ndarray:
        """Word ids expanded to one entry per token occurrence."""
        return np.repeat(self.word_ids, self.counts)


def document_from_pairs(pairs) -> Document:
    """Build a Document from (word_id, count) pairs, summing duplicates."""
    acc: dict[int, int] = {}
    for w, c in pairs:
        acc[w] = acc.get(w, 0) + c
    ids = sorted(acc)
    return Document(np.array(ids, dtype=np.int32),
                    np.array([acc[w] for w in ids], dtype=np.int64))


class Corpus:
    """Immutable collection of non-empty documents over a shared vocabulary."""

    def __init__(self, vocabulary: Vocabulary, documents, n_dropped_empty: int = 0):
        documents = tuple(documents)
        V = vocabulary.size
        for i, doc in enumerate(documents):
            if doc.total_tokens == 0:
                raise DataError(f"document {i} is empty")
            if doc.word_ids.size and int(doc.word_ids[-1]) >= V:
                raise DataError(
                    f"document {i} references word id {int(doc.word_ids[-1])} "
                    f">= vocabulary size {V}")
        self.vocabulary = vocabulary
        self.documents = documents
        self.token_total = int(sum(d.total_tokens for d in documents))
        self.n_dropped_empty = n_dropped_empty
        self._csr = None

    @property
    def num_docs(self) -> int:
        return len(self.documents)

    @property
    def vocab_size(self) -> int:
        return self.vocabulary.size

    def doc_lengths(self) -> np.ndarray:
        return np.array([d.total_tokens for d in self.documents], dtype=np.int64)

    def csr(self):
        """CSR view (indptr, word_ids, counts) shared by the numeric kernels."""
        if self._csr is None:
            nnz = np.array([len(d) for d in self.documents], dtype=np.int64)
            indptr = np.zeros(self.num_docs + 1, dtype=np.int64)
            np.cumsum(nnz, out=indptr[1:])
            if self.num_docs:
                indices = np.concatenate([d.word_ids for d in self.documents])
                counts = np.concatenate([d.counts for d in self.documents])
            else:
                indices = np.zeros(0, dtype=np.int32)
                counts = np.zeros(0, dtype=np.int64)
            self._csr = (indptr, indices.astype(np.int32), counts.astype(np.int64))
        return self._csr

    def token_stream(self):
        """Flat (token word ids, per-document offsets) for samplers."""
        indptr, indices, counts = self.csr()
        words = np.repeat(indices, counts).astype(np.int32)
        offsets = np.zeros(self.num_docs + 1, dtype=np.int64)
        np.cumsum(self.doc_lengths(), out=offsets[1:])
        return words, offsets

    def __eq__(self, other):
        return (isinstance(other, Corpus)
                and self.vocabulary == other.vocabulary
                and self.documents == other.documents)


@dataclass(frozen=True)
class HoldoutSplit:
    """One held-out document split into an observed and a predict part."""

    doc_index: int
    observed: Document
    predict: Document

    def __post_init__(self):
        if self.predict.total_tokens == 0:
            raise DataError("predict part of a holdout split must be non-empty")


@dataclass
class CooccurrenceStats:
    """Document frequencies and pairwise joint document frequencies.

    ``pair_doc_freq`` keys are (min_id, max_id) tuples; use :meth:`pair` for
    order-independent lookup.
    """

    doc_count: int
    doc_freq: dict[int, int]
    pair_doc_freq: dict[tuple[int, int], int] = field(default_factory=dict)

    def pair(self, a: int, b: int) -> int:
        return self.pair_doc_freq.get((min(a, b), max(a, b)), 0)


def load_vocabulary(vocab_path) -> Vocabulary:
    with open(vocab_path, encoding="utf-8") as fh:
        terms = [line.rstrip("\n") for line in fh]
    while terms and terms[-1] == "":
        terms.pop()
    return Vocabulary(tuple(terms))


def load_bow(docs_path, vocab_path) -> Corpus:
    """Load a corpus from UCI bag-of-words triples plus a one-term-per-line
    vocabulary file.

    Duplicate (doc, word) triples are summed. Documents that end up empty are
    dropped with a logged warning. Malformed lines, out-of-range ids, and
    non-positive counts raise :class:`DataError` with the offending line
    number.
    """
    vocab = load_vocabulary(vocab_path)

    def parse_int(text, lineno, what):
        try:
            return int(text)
        except ValueError:
            raise DataError(f"{docs_path}: line {lineno}: expected integer {what}, "
                            f"got {text!r}") from None

    with open(docs_path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 3:
        raise DataError(f"{docs_path}: expected 3 header lines (D, W, NNZ)")
    n_docs = parse_int(lines[0].strip(), 1, "document count")
    n_words = parse_int(lines[1].strip(), 2, "vocabulary size")
    nnz = parse_int(lines[2].strip(), 3, "triple count")
    if n_words != vocab.size:
        raise DataError(f"{docs_path}: header vocabulary size {n_words} does not "
                        f"match vocabulary file ({vocab.size} terms)")
    if len(lines) - 3 != nnz:
        raise DataError(f"{docs_path}: header declares {nnz} triples but file "
                        f"has {len(lines) - 3}")

    per_doc: list[dict[int, int]] = [dict() for _ in range(n_docs)]
    for offset, line in enumerate(lines[3:]):
        lineno = offset + 4
        parts = line.split()
        if len(parts) != 3:
            raise DataError(f"{docs_path}: line {lineno}: expected "
                            f"'docID wordID count', got {line!r}")
        d = parse_int(parts[0], lineno, "doc id")
        w = parse_int(parts[1], lineno, "word id")
        c = parse_int(parts[2], lineno, "count")
        if not 1 <= d <= n_docs:
            raise DataError(f"{docs_path}: line {lineno}: doc id {d} out of "
                            f"range 1..{n_docs}")
        if not 1 <= w <= n_words:
            raise DataError(f"{docs_path}: line {lineno}: word id {w} out of "
                            f"range 1..{n_words}")
        if c <= 0:
            raise DataError(f"{docs_path}: line {lineno}: non-positive count {c}")
        entries = per_doc[d - 1]
        entries[w - 1] = entries.get(w - 1, 0) + c

    documents = []
    n_dropped = 0
    for entries in per_doc:
        if not entries:
            n_dropped += 1
            continue
        ids = sorted(entries)
        documents.append(Document(np.array(ids, dtype=np.int32),
                                  np.array([entries[w] for w in ids],
                                           dtype=np.int64)))
    if n_dropped:
        logger.warning("dropped %d empty document(s) while loading %s",
                       n_dropped, docs_path)
    return Corpus(vocab, documents, n_dropped_empty=n_dropped)


def save_bow(corpus: Corpus, docs_path, vocab_path=None) -> None:
    """Write a corpus back to the bag-of-words triple format (1-based ids)."""
    indptr, indices, counts = corpus.csr()
    with open(docs_path, "w", encoding="utf-8") as fh:
        fh.write(f"{corpus.num_docs}\n{corpus.vocab_size}\n{len(indices)}\n")
        for d in range(corpus.num_docs):
            for j in range(indptr[d], indptr[d + 1]):
                fh.write(f"{d + 1} {indices[j] + 1} {counts[j]}\n")
    if vocab_path is not None:
        with open(vocab_path, "w", encoding="utf-8") as fh:
            for term in corpus.vocabulary.terms:
                fh.write(term + "\n")


def split_holdout(corpus: Corpus, doc_fraction: float, word_fraction: float,
                  seed: int):
    """Hold out a seeded-random document subset and split each held-out
    document's shuffled token stream into observed/predict parts.

    Returns ``(train_corpus, holdout_splits)``. Held-out documents whose
    split would leave the predict part empty are skipped (dropped from both
    outputs).
    """
    if not 0 < doc_fraction < 1:
        raise ValueError("doc_fraction must be in (0, 1)")
    if not 0 < word_fraction < 1:
        raise ValueError("word_fraction must be in (0, 1)")
    D = corpus.num_docs
    n_hold = int(round(doc_fraction * D))
    if n_hold < 1 or D - n_hold < 1:
        raise DataError(f"corpus with {D} documents is too small to hold out "
                        f"{n_hold} and still keep a training set")
    rng = np.random.default_rng(seed)
    held = set(rng.choice(D, size=n_hold, replace=False).tolist())

    train_docs = [doc for i, doc in enumerate(corpus.documents) if i not in held]
    splits = []
    for i in sorted(held):
        doc = corpus.documents[i]
        stream = doc.token_stream()
        rng.shuffle(stream)
        n_obs = int(round(word_fraction * stream.size))
        if stream.size - n_obs < 1 or n_obs < 1:
            continue
        observed = document_from_pairs(
            zip(*np.unique(stream[:n_obs], return_counts=True)))
        predict = document_from_pairs(
            zip(*np.unique(stream[n_obs:], return_counts=True)))
        splits.append(HoldoutSplit(doc_index=i, observed=observed, predict=predict))
    train = Corpus(corpus.vocabulary, train_docs)
    return train, splits


HOLDOUT_TAG = "divtopic-holdout v1"


def save_holdout(splits, vocab_size: int, path) -> None:
    """Write holdout splits as sparse observed/predict entry lists."""

    def entry_text(doc: Document):
        return " ".join(f"{w}:{c}" for w, c in zip(doc.word_ids, doc.counts))

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {HOLDOUT_TAG}\n")
        fh.write(f"count {len(splits)} vocab {vocab_size}\n")
        for split in splits:
            fh.write(f"doc {split.doc_index}\n")
            fh.write(f"obs {entry_text(split.observed)}\n")
            fh.write(f"pred {entry_text(split.predict)}\n")
        fh.write("end\n")


def load_holdout(path) -> list[HoldoutSplit]:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != f"# {HOLDOUT_TAG}":
        raise DataError(f"{path}: not a {HOLDOUT_TAG} file")

    def parse_entries(text, lineno):
        pairs = []
        for item in text.split():
            w, _, c = item.partition(":")
            try:
                pairs.append((int(w), int(c)))
            except ValueError:
                raise DataError(f"{path}: line {lineno}: bad entry "
                                f"{item!r}") from None
        return document_from_pairs(pairs)

    try:
        count = int(lines[1].split()[1])
    except (IndexError, ValueError):
        raise DataError(f"{path}: bad holdout header") from None
    splits = []
    i = 2
    for _ in range(count):
        if i + 2 >= len(lines) or not lines[i].startswith("doc "):
            raise DataError(f"{path}: truncated holdout file at line {i + 1}")
        doc_index = int(lines[i].split()[1])
        observed = parse_entries(lines[i + 1].removeprefix("obs "), i + 2)
        predict = parse_entries(lines[i + 2].removeprefix("pred "), i + 3)
        splits.append(HoldoutSplit(doc_index=doc_index, observed=observed,
                                   predict=predict))
        i += 3
    if i >= len(lines) or lines[i] != "end":
        raise DataError(f"{path}: missing end marker")
    return splits


def cooccurrence(corpus: Corpus, word_set) -> CooccurrenceStats:
    """Document frequencies and all pairwise joint document frequencies over
    ``word_set``, counted against ``corpus``."""
    words = sorted(set(int(w) for w in word_set))
    if not words:
        raise ValueError("word_set must be non-empty")
    V = corpus.vocab_size
    for w in words:
        if not 0 <= w < V:
            raise DataError(f"word id {w} out of vocabulary range 0..{V - 1}")

    # One sorted array of doc indices per requested word.
    doc_sets = {w: [] for w in words}
    wanted = set(words)
    for i, doc in enumerate(corpus.documents):
        for w in doc.word_ids:
            w = int(w)
            if w in wanted:
                doc_sets[w].append(i)
    doc_sets = {w: np.array(ds, dtype=np.int64) for w, ds in doc_sets.items()}

    doc_freq = {w: int(ds.size) for w, ds in doc_sets.items()}
    pair_doc_freq = {}
    for ai in range(len(words)):
        for bi in range(ai + 1, len(words)):
            a, b = words[ai], words[bi]
            joint = np.intersect1d(doc_sets[a], doc_sets[b],
                                   assume_unique=True).size
            pair_doc_freq[(a, b)] = int(joint)
    return CooccurrenceStats(doc_count=corpus.num_docs, doc_freq=doc_freq,
                             pair_doc_freq=pair_doc_freq)


@dataclass(frozen=True)
class SyntheticRecord:
    """Parameters used to generate a synthetic corpus, kept for oracle tests."""

    true_topics: np.ndarray
    doc_topic_prior: float
    n_docs: int
    doc_len: int
    seed: int
    doc_mixtures: np.ndarray


def generate_synthetic(true_topics, doc_topic_prior: float, n_docs: int,
                       doc_len: int, seed: int):
    """Draw a corpus from the standard generative story: per document a
    topic mixture from a symmetric Dirichlet, then ``doc_len`` tokens.

    ``doc_topic_prior == 0`` is the degenerate limit: each document draws a
    single topic uniformly. Returns ``(corpus, record)``.
    """
    topics = np.asarray(true_topics, dtype=np.float64)
    if topics.ndim != 2:
        raise ValueError("true_topics must be a 2-d array (n_topics x V)")
    if np.any(topics < 0):
        raise ValueError("topic distributions must be non-negative")
    sums = topics.sum(axis=1)
    if np.any(sums <= 0):
        raise DataError("degenerate topic distribution with zero total mass")
    topics = topics / sums[:, None]
    n_topics, V = topics.shape
    if doc_topic_prior < 0:
        raise ValueError("doc_topic_prior must be >= 0")

    rng = np.random.default_rng(seed)
    mixtures = np.empty((n_docs, n_topics))
    documents = []
    for d in range(n_docs):
        if doc_topic_prior == 0:
            mix = np.zeros(n_topics)
            mix[rng.integers(n_topics)] = 1.0
        else:
            mix = rng.dirichlet(np.full(n_topics, doc_topic_prior))
        mixtures[d] = mix
        word_probs = mix @ topics
        counts = rng.multinomial(doc_len, word_probs)
        ids = np.nonzero(counts)[0]
        documents.append(Document(ids.astype(np.int32),
                                  counts[ids].astype(np.int64)))
    vocab = Vocabulary(tuple(f"w{i}" for i in range(V)))
    record = SyntheticRecord(true_topics=topics, doc_topic_prior=doc_topic_prior,
                             n_docs=n_docs, doc_len=doc_len, seed=seed,
                             doc_mixtures=mixtures)
    return Corpus(vocab, documents), record
