"""Contextual word vectors and nearest-neighbor queries.

Neighbor search is an exhaustive cosine scan; any later indexing must keep
identical top-n results.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .embeddings import EmbeddingStore
from .errors import ConfigError


class Neighbor(NamedTuple):
    word_id: int
    sense: int | None  # topic index for sense-scope results, else None
    score: float


def contextual_embedding(
    store: EmbeddingStore, topic_weights, word_id: int
) -> np.ndarray:
    """Convex combination of the word's sense vectors under the given topic
    weights, restricted and renormalized over the word's trainable senses.

    Falls back to uniform weights over the mask when the weights put no
    mass there.
    """
    weights = np.asarray(topic_weights, dtype=np.float64)
    if weights.shape != (store.topics,):
        raise ConfigError(
            f"expected {store.topics} topic weights, got {weights.shape}"
        )
    if not 0 <= word_id < store.vocab_size:
        raise ConfigError(f"word id {word_id} out of range")
    mask_row = store.mask[word_id]
    w = np.where(mask_row, weights, 0.0)
    total = w.sum()
    if total > 0:
        w = w / total
    else:
        w = mask_row / mask_row.sum()
    return w @ store.sense_vectors[word_id]


def sense_vectors(
    store: EmbeddingStore, word_id: int
) -> list[tuple[int, np.ndarray]]:
    """The word's trainable (topic, vector) pairs in topic order; nonempty
    by the mask invariant."""
    if not 0 <= word_id < store.vocab_size:
        raise ConfigError(f"word id {word_id} out of range")
    return [
        (i, store.sense_vectors[word_id, i])
        for i in range(store.topics)
        if store.mask[word_id, i]
    ]


def _unit_rows(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(matrix, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return matrix / safe[:, None], norms


def nearest_neighbors(
    store: EmbeddingStore,
    query: np.ndarray,
    top_n: int,
    scope: str = "global",
    exclude_word: int | None = None,
) -> list[Neighbor]:
    """Exhaustive cosine scan over global vectors (scope="global") or all
    masked sense vectors (scope="sense").

    Results are sorted by descending score, ties by ascending word id (and
    topic index). All entries of `exclude_word` are dropped, so a query by
    word never returns itself.
    """
    if top_n < 1:
        raise ConfigError("top_n must be >= 1")
    query = np.asarray(query, dtype=np.float64)
    qnorm = np.linalg.norm(query)
    if qnorm == 0:
        raise ConfigError("cosine similarity is undefined for a zero query")
    q = query / qnorm

    if scope == "global":
        cand = store.global_vectors
        word_ids = np.arange(store.vocab_size)
        topics = None
    elif scope == "sense":
        word_ids, topics = np.nonzero(store.mask)
        cand = store.sense_vectors[word_ids, topics]
    else:
        raise ConfigError(f"unknown scope {scope!r}")

    unit, norms = _unit_rows(cand)
    scores = unit @ q
    scores[norms == 0] = -np.inf  # zero vectors cannot rank
    if exclude_word is not None:
        scores[word_ids == exclude_word] = -np.inf

    if topics is None:
        order = np.lexsort((word_ids, -scores))
    else:
        order = np.lexsort((topics, word_ids, -scores))
    out = []
    for idx in order[: min(top_n, len(order))]:
        if scores[idx] == -np.inf:
            break
        out.append(
            Neighbor(
                word_id=int(word_ids[idx]),
                sense=None if topics is None else int(topics[idx]),
                score=float(scores[idx]),
            )
        )
    return out
