"""Corpus ingestion: tokenization, vocabulary construction, and id encoding.

One document per input line. Both the topic-model trainer and the
embedding trainer consume the `EncodedCorpus` produced here.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError
from .rng import Lcg

logger = logging.getLogger(__name__)


def tokenize(line: str) -> list[str]:
    """Split one document's text into normalized tokens.

    Lowercases (casefold), splits on Unicode whitespace, strips leading and
    trailing non-alphanumeric characters from each token, and drops tokens
    that become empty. Interior punctuation is kept ("rock-n-roll").
    """
    out = []
    for tok in line.casefold().split():
        start, end = 0, len(tok)
        while start < end and not tok[start].isalnum():
            start += 1
        while end > start and not tok[end - 1].isalnum():
            end -= 1
        if end > start:
            out.append(tok[start:end])
    return out


@dataclass
class Vocabulary:
    """Dense word<->id mapping, ordered by descending corpus frequency.

    Ties are broken by ascending lexicographic order, so construction is
    deterministic for a given token stream.
    """

    words: list[str]
    counts: np.ndarray  # int64, aligned with words
    index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if not self.index:
            self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def id_of(self, word: str) -> int:
        return self.index[word]


@dataclass
class EncodedCorpus:
    """Documents as integer id sequences. Documents that lost every token
    to vocabulary filtering are dropped and tallied in `skipped_docs`."""

    docs: list[np.ndarray]
    skipped_docs: int = 0

    @property
    def doc_count(self) -> int:
        return len(self.docs)

    @property
    def total_tokens(self) -> int:
        return sum(len(d) for d in self.docs)

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        """Concatenated token ids plus doc start offsets (length D+1)."""
        offsets = np.zeros(len(self.docs) + 1, dtype=np.int64)
        for i, d in enumerate(self.docs):
            offsets[i + 1] = offsets[i] + len(d)
        if self.docs:
            tokens = np.concatenate(self.docs).astype(np.int32)
        else:
            tokens = np.zeros(0, dtype=np.int32)
        return tokens, offsets


def read_documents(path) -> Iterator[list[str]]:
    """Stream tokenized documents from a one-document-per-line UTF-8 file.

    Malformed byte sequences are replaced, never fatal.
    """
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            yield tokenize(line)


def build_vocabulary(
    doc_stream: Iterable[list[str]],
    min_count: int = 1,
    max_vocab: int | None = None,
) -> Vocabulary:
    """Count tokens and keep words with frequency >= min_count, truncated
    to the max_vocab most frequent."""
    if min_count < 1:
        raise ConfigError(f"min_count must be >= 1, got {min_count}")
    if max_vocab is not None and max_vocab < 1:
        raise ConfigError(f"max_vocab must be >= 1, got {max_vocab}")
    counts: Counter[str] = Counter()
    for doc in doc_stream:
        counts.update(doc)
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    if max_vocab is not None:
        kept = kept[:max_vocab]
    if not kept:
        raise ConfigError(
            f"vocabulary is empty after filtering (min_count={min_count})"
        )
    words = [w for w, _ in kept]
    freqs = np.array([c for _, c in kept], dtype=np.int64)
    return Vocabulary(words=words, counts=freqs)


def encode_corpus(
    doc_stream: Iterable[list[str]], vocab: Vocabulary
) -> EncodedCorpus:
    """Map documents to id sequences, silently dropping OOV tokens.

    Document order is preserved; all-OOV documents are dropped and counted.
    """
    index = vocab.index
    docs: list[np.ndarray] = []
    skipped = 0
    for doc in doc_stream:
        ids = [index[t] for t in doc if t in index]
        if ids:
            docs.append(np.asarray(ids, dtype=np.int32))
        else:
            skipped += 1
    if skipped:
        logger.info("encode_corpus: dropped %d all-OOV documents", skipped)
    return EncodedCorpus(docs=docs, skipped_docs=skipped)


def decode_document(doc: np.ndarray, vocab: Vocabulary) -> list[str]:
    """Inverse of encoding for a single document (used by round-trip tests)."""
    return [vocab.words[i] for i in doc]


def subsample_corpus(
    corpus: EncodedCorpus, vocab: Vocabulary, threshold: float, seed: int
) -> EncodedCorpus:
    """Optional word2vec-style frequent-word subsampling. Off by default
    in the pipeline; only applied when explicitly requested.

    A token of word w survives with probability min(1, sqrt(t/f(w)) + t/f(w))
    where f(w) is the word's corpus frequency fraction and t the threshold.
    """
    if threshold <= 0:
        raise ConfigError(f"subsample threshold must be > 0, got {threshold}")
    total = vocab.counts.sum()
    freq = vocab.counts / total
    keep = np.minimum(1.0, np.sqrt(threshold / freq) + threshold / freq)
    rng = Lcg(seed)
    docs: list[np.ndarray] = []
    skipped = corpus.skipped_docs
    for doc in corpus.docs:
        kept = [w for w in doc if rng.next_double() < keep[w]]
        if kept:
            docs.append(np.asarray(kept, dtype=np.int32))
        else:
            skipped += 1
    return EncodedCorpus(docs=docs, skipped_docs=skipped)
