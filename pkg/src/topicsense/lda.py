"""Topic model training and queries via collapsed Gibbs sampling.

Provides the per-document topic distributions and per-topic word
distributions that the embedding trainer and the contextual evaluator
consume, plus the diagnostics (perplexity, topic uniqueness, topic keys)
used to choose the topic count.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .corpus import EncodedCorpus
from .errors import ConfigError, DataFormatError

logger = logging.getLogger(__name__)

FOLD_IN_ITERATIONS = 50
FOLD_IN_BURN_IN = 10


@dataclass(eq=False)
class TopicModel:
    """Collapsed-Gibbs count tables plus the symmetric priors.

    Invariant: n_z[j] == column sums of both n_wz and n_dz, and the grand
    total equals the number of training tokens.
    """

    k: int
    alpha: float
    beta: float
    vocab_size: int
    n_wz: np.ndarray  # (V, k) int64 word-topic counts
    n_dz: np.ndarray  # (D, k) int64 document-topic counts
    n_z: np.ndarray  # (k,) int64 topic totals
    assignments: list[np.ndarray] | None = None  # per-doc token topic labels
    history: list[dict] = field(default_factory=list, repr=False)

    @property
    def doc_count(self) -> int:
        return self.n_dz.shape[0]

    @property
    def total_tokens(self) -> int:
        return int(self.n_z.sum())

    def validate(self):
        if self.k < 1:
            raise DataFormatError("topic model has k < 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise DataFormatError("topic model priors must be positive")
        if self.n_wz.shape != (self.vocab_size, self.k):
            raise DataFormatError("n_wz shape does not match header")
        if self.n_z.shape != (self.k,):
            raise DataFormatError("n_z shape does not match header")
        if (self.n_wz < 0).any() or (self.n_z < 0).any() or (self.n_dz < 0).any():
            raise DataFormatError("negative counts in topic model")
        if not np.array_equal(self.n_wz.sum(axis=0), self.n_z):
            raise DataFormatError("n_z inconsistent with word-topic counts")
        if self.n_dz.size and not np.array_equal(self.n_dz.sum(axis=0), self.n_z):
            raise DataFormatError("n_z inconsistent with document-topic counts")


def train_lda(
    corpus: EncodedCorpus,
    k: int,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 200,
    seed: int = 0,
    vocab_size: int | None = None,
    checkpoint_every: int = 0,
) -> TopicModel:
    """Train a topic model by collapsed Gibbs sampling.

    Each token's topic is resampled from the full conditional
    p(z=j | rest) ~ (n_dz[d,j]+alpha) * (n_wz[w,j]+beta) / (n_z[j]+V*beta)
    with the token's own counts removed first. Deterministic given `seed`.
    alpha defaults to 50/k, beta to 0.01. With checkpoint_every > 0 the
    count invariants are re-checked and training-set perplexity recorded
    at each checkpoint (in `model.history`).
    """
    if k < 1:
        raise ConfigError(f"number of topics must be >= 1, got {k}")
    if iterations < 1:
        raise ConfigError(f"iterations must be >= 1, got {iterations}")
    if alpha is None:
        alpha = 50.0 / k
    if alpha <= 0 or beta <= 0:
        raise ConfigError("priors alpha and beta must be positive")
    if corpus.doc_count == 0:
        raise ConfigError("cannot train a topic model on an empty corpus")

    tokens, offsets = corpus.flat()
    if vocab_size is None:
        vocab_size = int(tokens.max()) + 1
    if int(tokens.max()) >= vocab_size:
        raise ConfigError("corpus contains ids outside the vocabulary")
    n_docs = corpus.doc_count
    doc_of = np.repeat(
        np.arange(n_docs, dtype=np.int32), np.diff(offsets)
    ).astype(np.int32)

    z = np.empty(tokens.shape[0], dtype=np.int32)
    n_wz = np.zeros((vocab_size, k), dtype=np.int64)
    n_dz = np.zeros((n_docs, k), dtype=np.int64)
    n_z = np.zeros(k, dtype=np.int64)
    # state must re-enter the kernels as uint64: a bare Python int would
    # compile a signed specialization with sign-extending shifts
    state = _kernels.gibbs_init(
        tokens, doc_of, k, z, n_wz, n_dz, n_z, np.uint64(seed)
    )

    model = TopicModel(
        k=k, alpha=float(alpha), beta=float(beta), vocab_size=vocab_size,
        n_wz=n_wz, n_dz=n_dz, n_z=n_z,
    )
    block = checkpoint_every if checkpoint_every > 0 else iterations
    done = 0
    while done < iterations:
        step = min(block, iterations - done)
        state = _kernels.gibbs_sweeps(
            tokens, doc_of, z, n_wz, n_dz, n_z, alpha, beta, step,
            np.uint64(state),
        )
        done += step
        model.validate()
        if checkpoint_every > 0:
            ppl = _perplexity_from_counts(model, tokens, doc_of)
            model.history.append(
                {"sweep": done, "perplexity": ppl, "mean_nll": math.log(ppl)}
            )
            logger.info(
                "sweep %d: perplexity=%.4f mean_nll=%.6f", done, ppl, math.log(ppl)
            )
    model.assignments = [
        z[offsets[d] : offsets[d + 1]].copy() for d in range(n_docs)
    ]
    return model


def doc_topic_distribution(model: TopicModel, doc_index: int) -> np.ndarray:
    """Smoothed p(z|d) for a training document."""
    if not 0 <= doc_index < model.doc_count:
        raise ConfigError(f"document index {doc_index} out of range")
    row = model.n_dz[doc_index]
    return (row + model.alpha) / (row.sum() + model.k * model.alpha)


def word_given_topic(model: TopicModel, word_id: int) -> np.ndarray:
    """Smoothed p(w|z) across topics for one word."""
    if not 0 <= word_id < model.vocab_size:
        raise ConfigError(f"word id {word_id} out of range")
    return (model.n_wz[word_id] + model.beta) / (
        model.n_z + model.vocab_size * model.beta
    )


def topic_word_matrix(model: TopicModel) -> np.ndarray:
    """Dense (k, V) matrix of p(w|z); rows sum to 1."""
    return (model.n_wz.T + model.beta) / (
        model.n_z[:, None] + model.vocab_size * model.beta
    )


def infer_topics(
    model: TopicModel,
    token_ids,
    iterations: int = FOLD_IN_ITERATIONS,
    seed: int = 0,
    burn_in: int = FOLD_IN_BURN_IN,
) -> np.ndarray:
    """Fold-in Gibbs inference over an unseen token sequence.

    Word-topic counts stay fixed. Ids outside the vocabulary are ignored;
    an empty effective sequence falls back to the uniform distribution
    (with a warning when the input was nonempty).
    """
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    ids = np.asarray(
        [t for t in token_ids if 0 <= t < model.vocab_size], dtype=np.int32
    )
    if ids.size == 0:
        if len(token_ids):
            logger.warning("infer_topics: context is entirely out-of-vocabulary")
        return np.full(model.k, 1.0 / model.k)
    burn = min(burn_in, iterations - 1)
    theta, _ = _kernels.gibbs_fold_in(
        ids, model.n_wz, model.n_z, model.alpha, model.beta,
        iterations, burn, np.uint64(seed),
    )
    return theta


def _perplexity_from_counts(model, tokens, doc_of) -> float:
    """exp of the mean per-token negative log-likelihood using the training
    count tables directly."""
    phi = topic_word_matrix(model)  # (k, V)
    theta = (model.n_dz + model.alpha) / (
        model.n_dz.sum(axis=1, keepdims=True) + model.k * model.alpha
    )
    log_sum = 0.0
    chunk = 262144
    for lo in range(0, tokens.shape[0], chunk):
        sl = slice(lo, lo + chunk)
        probs = np.einsum("ij,ji->i", theta[doc_of[sl]], phi[:, tokens[sl]])
        log_sum += np.log(probs).sum()
    return float(np.exp(-log_sum / tokens.shape[0]))


def perplexity(
    model: TopicModel,
    corpus: EncodedCorpus,
    seed: int = 0,
    infer_iterations: int = FOLD_IN_ITERATIONS,
) -> float:
    """Per-token perplexity of a corpus under the model (always >= 1).

    When the corpus is the training set (same document count and token
    total) the training document-topic counts supply theta; otherwise each
    document's theta comes from fold-in inference.
    """
    if corpus.doc_count == 0:
        raise ConfigError("perplexity of an empty corpus is undefined")
    tokens, offsets = corpus.flat()
    is_training = (
        corpus.doc_count == model.doc_count
        and corpus.total_tokens == model.total_tokens
    )
    if is_training:
        doc_of = np.repeat(
            np.arange(corpus.doc_count, dtype=np.int32), np.diff(offsets)
        ).astype(np.int32)
        return _perplexity_from_counts(model, tokens, doc_of)
    phi = topic_word_matrix(model)
    log_sum = 0.0
    total = 0
    for d in range(corpus.doc_count):
        doc = tokens[offsets[d] : offsets[d + 1]]
        theta = infer_topics(model, doc, iterations=infer_iterations, seed=seed)
        probs = theta @ phi[:, doc]
        log_sum += np.log(probs).sum()
        total += doc.shape[0]
    return float(np.exp(-log_sum / total))


def topic_keys(model: TopicModel, top_m: int) -> list[np.ndarray]:
    """Top words per topic by descending p(w|z), ties broken by ascending
    word id. Returns word-id arrays, one per topic."""
    if top_m < 1:
        raise ConfigError("top_m must be >= 1")
    if top_m > model.vocab_size:
        raise ConfigError(
            f"top_m={top_m} exceeds the vocabulary size {model.vocab_size}"
        )
    phi = topic_word_matrix(model)
    keys = []
    ids = np.arange(model.vocab_size)
    for j in range(model.k):
        order = np.lexsort((ids, -phi[j]))
        keys.append(order[:top_m].astype(np.int64))
    return keys


def topic_uniqueness(model: TopicModel, top_m: int = 20) -> float:
    """Fraction of top-word slots filled by words that appear in exactly
    one topic's top-m list."""
    keys = topic_keys(model, top_m)
    counts: dict[int, int] = {}
    for key in keys:
        for w in key:
            counts[int(w)] = counts.get(int(w), 0) + 1
    unique = sum(1 for c in counts.values() if c == 1)
    return unique / (model.k * top_m)
