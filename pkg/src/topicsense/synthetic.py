"""Synthetic corpora with known structure.

Generators for controlled experiments: a two-topic corpus with disjoint
vocabularies (topic recovery), a pivot-word corpus whose two sublanguages
share exactly one ambiguous word (sense separation), and a larger themed
corpus with derived similarity judgments (end-to-end smoke runs).
"""

from __future__ import annotations

import numpy as np


def two_topic_corpus(
    n_docs: int = 200,
    doc_len: int = 50,
    words_per_topic: int = 50,
    seed: int = 0,
):
    """Documents drawn from one of two topics with disjoint vocabularies.

    Returns (docs, token_topics, topic_words): token strings per document,
    the generator's per-token topic labels, and the two word inventories.
    """
    rng = np.random.default_rng(seed)
    topic_words = [
        [f"a{i:03d}" for i in range(words_per_topic)],
        [f"b{i:03d}" for i in range(words_per_topic)],
    ]
    docs = []
    token_topics = []
    for d in range(n_docs):
        topic = d % 2
        ids = rng.integers(0, words_per_topic, size=doc_len)
        docs.append([topic_words[topic][i] for i in ids])
        token_topics.append(np.full(doc_len, topic, dtype=np.int64))
    return docs, token_topics, topic_words


def pivot_corpus(
    n_docs: int = 400,
    doc_len: int = 40,
    words_per_side: int = 30,
    pivot_rate: float = 0.12,
    seed: int = 0,
):
    """Two sublanguages with disjoint vocabularies except one shared pivot
    word; every document belongs to exactly one sublanguage.

    Returns (docs, doc_sides, side_words, pivot): the pivot replaces a
    token with probability pivot_rate, so it co-occurs with both sides.
    """
    rng = np.random.default_rng(seed)
    side_words = [
        [f"left{i:03d}" for i in range(words_per_side)],
        [f"right{i:03d}" for i in range(words_per_side)],
    ]
    pivot = "pivot"
    docs = []
    doc_sides = []
    for d in range(n_docs):
        side = d % 2
        ids = rng.integers(0, words_per_side, size=doc_len)
        is_pivot = rng.random(doc_len) < pivot_rate
        docs.append(
            [pivot if p else side_words[side][i] for i, p in zip(ids, is_pivot)]
        )
        doc_sides.append(side)
    return docs, doc_sides, side_words, pivot


def themed_corpus(
    n_themes: int = 10,
    words_per_theme: int = 400,
    common_words: int = 100,
    n_docs: int = 50_000,
    doc_len: int = 100,
    common_rate: float = 0.2,
    zipf_shift: float = 2.7,
    seed: int = 0,
):
    """A larger corpus of theme-pure documents over Zipf-weighted theme
    vocabularies plus a shared high-frequency vocabulary.

    Returns (docs, doc_themes, theme_words). Document d belongs to theme
    d % n_themes, so theme sizes are balanced.
    """
    rng = np.random.default_rng(seed)
    theme_words = [
        [f"t{t:02d}w{i:03d}" for i in range(words_per_theme)]
        for t in range(n_themes)
    ]
    shared = [f"common{i:03d}" for i in range(common_words)]
    ranks = np.arange(words_per_theme, dtype=np.float64)
    weights = 1.0 / (ranks + zipf_shift)
    weights /= weights.sum()

    shared_arr = np.array(shared)
    grouped: list[list[list[str]]] = []
    for t in range(n_themes):
        rows = len(range(t, n_docs, n_themes))
        theme_ids = rng.choice(words_per_theme, size=(rows, doc_len), p=weights)
        common_ids = rng.integers(0, common_words, size=(rows, doc_len))
        use_common = rng.random((rows, doc_len)) < common_rate
        vocab = np.array(theme_words[t])
        grouped.append(
            [
                np.where(use_common[r], shared_arr[common_ids[r]], vocab[theme_ids[r]])
                .tolist()
                for r in range(rows)
            ]
        )
    docs = [grouped[d % n_themes][d // n_themes] for d in range(n_docs)]
    doc_themes = [d % n_themes for d in range(n_docs)]
    return docs, doc_themes, theme_words


def similarity_pairs_for_themes(
    theme_words: list[list[str]],
    n_same: int = 25,
    n_cross: int = 25,
    top_words: int = 12,
    seed: int = 0,
):
    """Scored word pairs whose gold judgments follow theme membership:
    same-theme pairs score high, cross-theme pairs low.

    Returns (word1, word2, gold) tuples drawn from each theme's most
    frequent words.
    """
    rng = np.random.default_rng(seed)
    n_themes = len(theme_words)
    rows = []
    for _ in range(n_same):
        t = int(rng.integers(n_themes))
        i, j = rng.choice(top_words, size=2, replace=False)
        rows.append(
            (theme_words[t][i], theme_words[t][j], 8.0 + 2.0 * rng.random())
        )
    for _ in range(n_cross):
        t1, t2 = rng.choice(n_themes, size=2, replace=False)
        i = int(rng.integers(top_words))
        j = int(rng.integers(top_words))
        rows.append(
            (theme_words[t1][i], theme_words[t2][j], 3.0 * rng.random())
        )
    return rows


def write_corpus(path, docs):
    """One document per line, tokens space-separated."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(" ".join(doc) + "\n")


def write_similarity_tsv(path, rows):
    """Rows of (word1, word2, gold) as the 3-column similarity format."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for w1, w2, gold in rows:
            fh.write(f"{w1}\t{w2}\t{gold:.4f}\n")
