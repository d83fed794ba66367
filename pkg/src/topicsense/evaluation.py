"""Word-similarity and word-analogy evaluation.

Three similarity measures over a store: cosine of the shared output
vectors (globalSim-style), mean pairwise cosine of trainable sense vectors
(avgSim-style), and the context-weighted variant that weights sense pairs
by inferred topic distributions. Scores correlate with human judgments via
Spearman's rho, reported x100.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .corpus import tokenize
from .embeddings import EmbeddingStore
from .errors import ConfigError, DataFormatError
from .lda import TopicModel, infer_topics

logger = logging.getLogger(__name__)


@dataclass
class SimilarityPair:
    word1: str
    word2: str
    gold: float
    context1: list[str] | None = None
    context2: list[str] | None = None


@dataclass
class AnalogyQuad:
    a: str
    b: str
    c: str
    d: str


def load_similarity_dataset(path) -> list[SimilarityPair]:
    """Read scored word pairs from a TSV file.

    Rows are either word1<TAB>word2<TAB>score or
    word1<TAB>word2<TAB>context1<TAB>context2<TAB>score. Contexts are
    tokenized with the corpus tokenizer. Malformed rows are fatal, reported
    with their line number.
    """
    pairs: list[SimilarityPair] = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) == 3:
                w1, w2, score = cols
                c1 = c2 = None
            elif len(cols) == 5:
                w1, w2, ctx1, ctx2, score = cols
                c1, c2 = tokenize(ctx1), tokenize(ctx2)
            else:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 3 or 5 tab-separated columns, "
                    f"got {len(cols)}"
                )
            try:
                gold = float(score)
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: non-numeric score {score!r}"
                ) from None
            if not np.isfinite(gold):
                raise DataFormatError(f"{path}:{lineno}: non-finite score")
            pairs.append(
                SimilarityPair(
                    word1=w1.strip().casefold(),
                    word2=w2.strip().casefold(),
                    gold=gold,
                    context1=c1,
                    context2=c2,
                )
            )
    if not pairs:
        raise DataFormatError(f"{path}: no valid rows")
    return pairs


def load_analogy_dataset(path) -> list[AnalogyQuad]:
    """Read analogy questions: four space-separated words per line; lines
    starting with ':' are section headers and skipped."""
    quads: list[AnalogyQuad] = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith(":"):
                continue
            parts = line.casefold().split()
            if len(parts) != 4:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 4 words, got {len(parts)}"
                )
            quads.append(AnalogyQuad(*parts))
    if not quads:
        raise DataFormatError(f"{path}: no analogy questions")
    return quads


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ConfigError("cosine similarity is undefined for a zero vector")
    return float(a @ b / (na * nb))


def _require_word(store: EmbeddingStore, word: str) -> int:
    wid = store.index.get(word)
    if wid is None:
        raise ConfigError(f"word {word!r} is not in the vocabulary")
    return wid


def global_sim(store: EmbeddingStore, w1: str, w2: str) -> float:
    """Cosine of the two words' shared output vectors."""
    return _cosine(
        store.global_vectors[_require_word(store, w1)],
        store.global_vectors[_require_word(store, w2)],
    )


def avg_sim(store: EmbeddingStore, w1: str, w2: str) -> float:
    """Mean pairwise cosine over both words' trainable sense vectors."""
    i1 = _require_word(store, w1)
    i2 = _require_word(store, w2)
    rows1 = store.sense_vectors[i1][store.mask[i1]]
    rows2 = store.sense_vectors[i2][store.mask[i2]]
    total = 0.0
    for a in rows1:
        for b in rows2:
            total += _cosine(a, b)
    return total / (len(rows1) * len(rows2))


def _masked_weights(weights: np.ndarray, mask_row: np.ndarray) -> np.ndarray:
    w = np.where(mask_row, weights, 0.0)
    total = w.sum()
    if total <= 0:
        w = mask_row.astype(np.float64)
        total = w.sum()
    return (w / total)[mask_row]


def avg_sim_weighted(
    store: EmbeddingStore,
    w1: str,
    w2: str,
    weights1: np.ndarray,
    weights2: np.ndarray,
) -> float:
    """Sense-pair cosines weighted by two topic distributions, each
    restricted and renormalized over its word's mask."""
    i1 = _require_word(store, w1)
    i2 = _require_word(store, w2)
    m1, m2 = store.mask[i1], store.mask[i2]
    ww1 = _masked_weights(np.asarray(weights1, dtype=np.float64), m1)
    ww2 = _masked_weights(np.asarray(weights2, dtype=np.float64), m2)
    rows1 = store.sense_vectors[i1][m1]
    rows2 = store.sense_vectors[i2][m2]
    total = 0.0
    for a, wa in zip(rows1, ww1):
        for b, wb in zip(rows2, ww2):
            total += wa * wb * _cosine(a, b)
    return total


def avg_sim_c(
    store: EmbeddingStore,
    topic_model: TopicModel,
    w1: str,
    context1: list[str],
    w2: str,
    context2: list[str],
    seed: int = 0,
    infer_iterations: int = 50,
) -> float:
    """Context-weighted sense similarity: topic weights for each side come
    from fold-in inference over its context tokens."""
    ids1 = [store.index[t] for t in context1 if t in store.index]
    ids2 = [store.index[t] for t in context2 if t in store.index]
    th1 = infer_topics(topic_model, ids1, iterations=infer_iterations, seed=seed)
    th2 = infer_topics(topic_model, ids2, iterations=infer_iterations, seed=seed + 1)
    return avg_sim_weighted(store, w1, w2, th1, th2)


def spearman(model_scores, gold_scores) -> float:
    """Spearman rank correlation: Pearson correlation of average-tie ranks.

    Computed as a single quotient of centered rank sums so that small
    integer-rank cases come out exact.
    """
    a = np.asarray(model_scores, dtype=np.float64)
    b = np.asarray(gold_scores, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ConfigError("score lists must be 1-D and equal length")
    if a.size < 2:
        raise ConfigError("need at least 2 score pairs")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ConfigError("rank correlation is undefined for constant scores")
    ra = stats.rankdata(a) - (a.size + 1) / 2.0
    rb = stats.rankdata(b) - (b.size + 1) / 2.0
    return float((ra @ rb) / np.sqrt((ra @ ra) * (rb @ rb)))


def evaluate_similarity(
    store: EmbeddingStore,
    topic_model: TopicModel | None,
    dataset: list[SimilarityPair],
    metric: str,
    seed: int = 0,
    infer_iterations: int = 50,
) -> tuple[float, int, int]:
    """Score every pair with the chosen measure and correlate with the gold
    judgments. Pairs with an out-of-vocabulary word are skipped and
    tallied. Returns (rho x 100, pairs_used, pairs_skipped)."""
    if metric not in ("global", "avg", "avgc"):
        raise ConfigError(f"unknown metric {metric!r}")
    if metric == "avgc":
        if topic_model is None:
            raise ConfigError("the context-weighted metric needs a topic model")
        missing = sum(1 for p in dataset if p.context1 is None or p.context2 is None)
        if missing:
            raise ConfigError(
                f"the context-weighted metric needs contexts; {missing} pairs have none"
            )
    model_scores: list[float] = []
    gold_scores: list[float] = []
    skipped = 0
    for p in dataset:
        if p.word1 not in store.index or p.word2 not in store.index:
            skipped += 1
            continue
        if metric == "global":
            score = global_sim(store, p.word1, p.word2)
        elif metric == "avg":
            score = avg_sim(store, p.word1, p.word2)
        else:
            score = avg_sim_c(
                store, topic_model, p.word1, p.context1, p.word2, p.context2,
                seed=seed, infer_iterations=infer_iterations,
            )
        model_scores.append(score)
        gold_scores.append(p.gold)
    if len(model_scores) < 2:
        raise DataFormatError(
            f"only {len(model_scores)} usable pairs after skipping {skipped}"
        )
    rho = spearman(model_scores, gold_scores)
    return rho * 100.0, len(model_scores), skipped


def solve_analogy(
    store: EmbeddingStore, a: str, b: str, c: str
) -> str | None:
    """Word whose global vector lies nearest (by cosine) to
    v(b) - v(a) + v(c), never returning a, b, or c themselves. None when
    the target vector is zero."""
    ia = _require_word(store, a)
    ib = _require_word(store, b)
    ic = _require_word(store, c)
    target = (
        store.global_vectors[ib] - store.global_vectors[ia] + store.global_vectors[ic]
    )
    tnorm = np.linalg.norm(target)
    if tnorm == 0:
        return None
    unit = target / tnorm
    norms = np.linalg.norm(store.global_vectors, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    scores = (store.global_vectors / safe[:, None]) @ unit
    scores[norms == 0] = -np.inf
    scores[[ia, ib, ic]] = -np.inf
    best = int(np.argmax(scores))  # first max: lowest word id wins ties
    if scores[best] == -np.inf:
        return None
    return store.words[best]


def evaluate_analogy(
    store: EmbeddingStore, dataset: list[AnalogyQuad]
) -> tuple[float, int, int]:
    """Accuracy over the answerable questions; questions containing any
    out-of-vocabulary word are skipped. Returns (accuracy %, answered,
    skipped)."""
    answered = 0
    correct = 0
    skipped = 0
    for q in dataset:
        if any(w not in store.index for w in (q.a, q.b, q.c, q.d)):
            skipped += 1
            continue
        predicted = solve_analogy(store, q.a, q.b, q.c)
        if predicted is None:
            skipped += 1
            continue
        answered += 1
        if predicted == q.d:
            correct += 1
    if answered == 0:
        raise DataFormatError("no answerable analogy questions")
    return 100.0 * correct / answered, answered, skipped
