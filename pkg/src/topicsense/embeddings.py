"""Topic-conditioned multi-prototype embedding training.

Each word holds one sense vector per topic plus a single shared output
vector, and every skip-gram pair's negative-sampling loss is spread over
the word's trainable senses in proportion to the document's topic
distribution. The non-parametric variant restricts training to senses
whose p(word|topic) clears a threshold, with an argmax fallback so every
word keeps at least one sense.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .corpus import EncodedCorpus
from .errors import ConfigError
from .lda import TopicModel, doc_topic_distribution, infer_topics, topic_word_matrix
from .rng import Lcg

logger = logging.getLogger(__name__)

NOISE_TABLE_SIZE = 1_000_000
LR_FLOOR_RATIO = 1e-4  # final learning rate as a fraction of the initial
_SIGMOID_TABLE = _kernels.make_sigmoid_table()


@dataclass(eq=False)
class EmbeddingStore:
    """Per-word sense matrices, shared global output vectors, and the
    trainable-sense mask. Words are kept so model files and neighbor
    queries can use surface forms."""

    words: list[str]
    sense_vectors: np.ndarray  # (V, k, n) float64
    global_vectors: np.ndarray  # (V, n) float64
    mask: np.ndarray  # (V, k) bool
    index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {w: i for i, w in enumerate(self.words)}

    @property
    def vocab_size(self) -> int:
        return self.sense_vectors.shape[0]

    @property
    def topics(self) -> int:
        return self.sense_vectors.shape[1]

    @property
    def dim(self) -> int:
        return self.sense_vectors.shape[2]

    def validate(self):
        V, k, n = self.sense_vectors.shape
        if len(self.words) != V:
            raise ConfigError("word list does not match vector count")
        if self.global_vectors.shape != (V, n):
            raise ConfigError("global vector shape mismatch")
        if self.mask.shape != (V, k):
            raise ConfigError("mask shape mismatch")
        if not self.mask.any(axis=1).all():
            raise ConfigError("every word needs at least one trainable sense")
        if not np.isfinite(self.sense_vectors).all() or not np.isfinite(
            self.global_vectors
        ).all():
            raise ConfigError("non-finite embedding entries")


@dataclass
class TrainConfig:
    """Hyperparameters for the embedding trainer."""

    window: int = 2
    negatives: int = 8
    dim: int = 200
    epochs: int = 1
    learning_rate: float = 0.025
    p_thres: float = 1e-4
    nonparametric: bool = False
    seed: int = 0
    unigram_power: float = 0.75
    threads: int = 1
    exact_sigmoid: bool = False
    # "weighted": topic-weighted sum of per-sense losses (default);
    # "mixture": exact -log of the weight-mixed pair likelihood
    objective: str = "weighted"

    def validate(self):
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.negatives < 1:
            raise ConfigError("negatives must be >= 1")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0.0 <= self.p_thres < 1.0:
            raise ConfigError("p_thres must lie in [0, 1)")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.objective not in ("weighted", "mixture"):
            raise ConfigError(f"unknown objective {self.objective!r}")


@dataclass
class SenseMask:
    """Per-word trainable senses; fallback_sense records the argmax topic
    used when no topic clears the threshold."""

    mask: np.ndarray  # (V, k) bool
    fallback_sense: np.ndarray  # (V,) int64


@dataclass
class TrainResult:
    epoch_mean_losses: list[float]
    pair_losses: np.ndarray | None = None


def select_trainable_senses(
    topic_model: TopicModel, vocab, p_thres: float
) -> SenseMask:
    """Mark sense (w, i) trainable iff p(w|z_i) > p_thres. Words failing
    everywhere keep exactly their argmax topic (ties: lowest index)."""
    V = vocab if isinstance(vocab, int) else len(vocab)
    if topic_model.vocab_size != V:
        raise ConfigError(
            f"topic model covers {topic_model.vocab_size} words, vocabulary has {V}"
        )
    prob = topic_word_matrix(topic_model).T  # (V, k)
    mask = prob > p_thres
    fallback = prob.argmax(axis=1)
    none_pass = ~mask.any(axis=1)
    mask[none_pass, fallback[none_pass]] = True
    return SenseMask(mask=mask, fallback_sense=fallback)


def init_embeddings(
    vocab,
    k: int,
    n: int,
    seed: int = 0,
    pretrained: dict[str, np.ndarray] | None = None,
    jitter: float = 0.01,
) -> EmbeddingStore:
    """Create a store with Uniform(-0.5/n, 0.5/n) entries, or seeded from
    external vectors where available (sense rows get per-sense jitter to
    break symmetry; the global row is an exact copy; missing words fall
    back to random init)."""
    words = vocab if isinstance(vocab, list) else list(vocab.words)
    V = len(words)
    if k < 1 or n < 1:
        raise ConfigError("topic count and dimensionality must be >= 1")
    rng = np.random.default_rng(seed)
    bound = 0.5 / n
    sense = rng.uniform(-bound, bound, size=(V, k, n))
    global_vecs = rng.uniform(-bound, bound, size=(V, n))
    if pretrained is not None:
        for w, vec in pretrained.items():
            if len(vec) != n:
                raise ConfigError(
                    f"pretrained vector for {w!r} has dimension {len(vec)}, expected {n}"
                )
        for wid, w in enumerate(words):
            vec = pretrained.get(w)
            if vec is None:
                continue
            vec = np.asarray(vec, dtype=np.float64)
            if jitter > 0:
                sense[wid] = vec + rng.uniform(-jitter, jitter, size=(k, n))
            else:
                sense[wid] = vec
            global_vecs[wid] = vec
    mask = np.ones((V, k), dtype=bool)
    return EmbeddingStore(
        words=words, sense_vectors=sense, global_vectors=global_vecs, mask=mask
    )


def build_noise_table(
    counts: np.ndarray, power: float = 0.75, table_size: int = NOISE_TABLE_SIZE
) -> np.ndarray:
    """Unigram^power sampling table: word w occupies a share of slots
    proportional to counts[w]**power."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.size == 0:
        raise ConfigError("cannot build a noise table for an empty vocabulary")
    weights = np.where(counts > 0, counts, 0.0) ** power
    total = weights.sum()
    if total <= 0:
        raise ConfigError("noise distribution has zero total mass")
    cum = np.cumsum(weights / total)
    positions = (np.arange(table_size, dtype=np.float64) + 1.0) / table_size
    table = np.searchsorted(cum, positions, side="left")
    return np.minimum(table, counts.size - 1).astype(np.int32)


def sample_negatives(
    noise_table: np.ndarray, count: int, exclude: int, rng: Lcg
) -> np.ndarray:
    """Draw `count` ids i.i.d. from the noise table, redrawing any hit on
    `exclude` (up to 100 tries per slot, then accepting)."""
    size = noise_table.shape[0]
    out = np.empty(count, dtype=np.int64)
    degenerate = False
    for slot in range(count):
        cand = exclude
        for _ in range(100):
            cand = int(noise_table[rng.next_index(size)])
            if cand != exclude:
                break
        else:
            degenerate = True
        out[slot] = cand
    if degenerate:
        logger.warning(
            "sample_negatives: noise distribution is degenerate around id %d",
            exclude,
        )
    return out


def _renormalized_weights(weights: np.ndarray, mask_row: np.ndarray) -> np.ndarray:
    """Restrict topic weights to the masked senses and rescale to sum 1."""
    w = np.where(mask_row, weights, 0.0)
    total = w.sum()
    if total <= 0:
        raise ConfigError("topic weights put no mass on any trainable sense")
    return w / total


@dataclass
class PairGradients:
    """Sparse gradients of one pair's loss: sense rows keyed by
    (word, topic), global rows keyed by word. Duplicate negatives
    accumulate."""

    d_sense: dict[tuple[int, int], np.ndarray]
    d_global: dict[int, np.ndarray]


def pair_loss_and_grads(
    store: EmbeddingStore,
    center: int,
    context: int,
    topic_weights: np.ndarray,
    negatives,
    mask_row: np.ndarray | None = None,
):
    """Loss and analytic gradients for one (center, context) pair.

    L = -sum_i w_i [log s(E_i . v+) + sum_u log s(-E_i . v_u)] over the
    center's masked senses, with weights renormalized over the mask.
    Always uses the exact logistic function.
    """
    return _pair_loss_and_grads(
        store, center, context, topic_weights, negatives, mask_row, mixture=False
    )


def mixture_pair_loss_and_grads(
    store: EmbeddingStore,
    center: int,
    context: int,
    topic_weights: np.ndarray,
    negatives,
    mask_row: np.ndarray | None = None,
):
    """Opt-in exact mixture objective for one pair: -log sum_i w_i p_i
    where p_i is sense i's pair likelihood. Gradients are the per-sense
    gradients weighted by the posterior responsibilities w_i p_i / sum."""
    return _pair_loss_and_grads(
        store, center, context, topic_weights, negatives, mask_row, mixture=True
    )


def _pair_loss_and_grads(store, center, context, topic_weights, negatives,
                         mask_row, mixture):
    if mask_row is None:
        mask_row = store.mask[center]
    w = _renormalized_weights(np.asarray(topic_weights, dtype=np.float64), mask_row)
    k = store.topics
    vecs_g = store.global_vectors
    live = [i for i in range(k) if mask_row[i] and w[i] > 0.0]
    targets = [int(context)] + [int(u) for u in negatives]

    sig = np.empty((k, len(targets)))
    log_p = np.zeros(k)
    for i in live:
        e = store.sense_vectors[center, i]
        lp = 0.0
        for row, u in enumerate(targets):
            x = float(e @ vecs_g[u])
            sig[i, row] = _stable_sigmoid(x)
            lp += _stable_log_sigmoid(x if row == 0 else -x)
        log_p[i] = lp

    if mixture:
        scores = np.array([np.log(w[i]) + log_p[i] for i in live])
        peak = scores.max()
        resp = np.exp(scores - peak)
        norm = resp.sum()
        loss = -(peak + np.log(norm))
        w_eff = dict(zip(live, resp / norm))
    else:
        loss = -sum(w[i] * log_p[i] for i in live)
        w_eff = {i: w[i] for i in live}

    d_sense: dict[tuple[int, int], np.ndarray] = {}
    d_global: dict[int, np.ndarray] = {}

    def _acc_global(wid, vec):
        if wid in d_global:
            d_global[wid] += vec
        else:
            d_global[wid] = vec

    for i in live:
        wi = w_eff[i]
        e = store.sense_vectors[center, i]
        grad_e = np.zeros(store.dim)
        for row, u in enumerate(targets):
            # g is the coefficient of the ascent direction; gradients of
            # the loss carry the opposite sign
            g = wi * (1.0 - sig[i, row]) if row == 0 else -wi * sig[i, row]
            grad_e -= g * vecs_g[u]
            _acc_global(u, -g * e)
        d_sense[(center, i)] = grad_e
    return loss, PairGradients(d_sense=d_sense, d_global=d_global)


def mixture_predict(
    store: EmbeddingStore,
    center: int,
    topic_weights: np.ndarray,
    context: int,
    mask_row: np.ndarray | None = None,
) -> float:
    """Mixture probability sum_i w_i s(E_i . v_g(context)); diagnostic
    companion to the training loss."""
    if mask_row is None:
        mask_row = store.mask[center]
    w = _renormalized_weights(np.asarray(topic_weights, dtype=np.float64), mask_row)
    v = store.global_vectors[context]
    total = 0.0
    for i in range(store.topics):
        if w[i] == 0.0:
            continue
        total += w[i] * _stable_sigmoid(float(store.sense_vectors[center, i] @ v))
    return total


def _stable_sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def _stable_log_sigmoid(x: float) -> float:
    if x >= 0:
        return -np.log1p(np.exp(-x))
    return x - np.log1p(np.exp(x))


def count_pairs(corpus: EncodedCorpus, window: int) -> int:
    """Exact number of (center, context) pairs one epoch generates."""
    total = 0
    for doc in corpus.docs:
        length = len(doc)
        m = min(length, window)
        total += 2 * (m * (m - 1) // 2 + max(0, length - window) * window)
    return total


def document_topic_matrix(
    model: TopicModel,
    corpus: EncodedCorpus | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Per-document topic weights for a corpus: training counts when the
    corpus is the training set, fold-in inference otherwise."""
    if corpus is None or (
        corpus.doc_count == model.doc_count
        and corpus.total_tokens == model.total_tokens
    ):
        rows = model.doc_count if corpus is None else corpus.doc_count
        return np.stack([doc_topic_distribution(model, d) for d in range(rows)])
    logger.info(
        "document_topic_matrix: corpus differs from the training set; "
        "running fold-in inference for %d documents", corpus.doc_count,
    )
    return np.stack(
        [infer_topics(model, doc, seed=seed + d) for d, doc in enumerate(corpus.docs)]
    )


def train(
    corpus: EncodedCorpus,
    topic_model: TopicModel,
    config: TrainConfig,
    store: EmbeddingStore,
    collect_pair_losses: bool = False,
) -> TrainResult:
    """SGD over every skip-gram pair, weighting each pair's loss across the
    center word's trainable senses by the document's topic distribution.

    Mutates `store` in place and reports the mean pair loss per epoch.
    threads == 1 is the deterministic mode; with more threads, workers
    partition documents and apply unsynchronized sparse updates.
    """
    config.validate()
    V = store.vocab_size
    if topic_model.vocab_size != V:
        raise ConfigError(
            f"topic model vocabulary ({topic_model.vocab_size}) does not match "
            f"embedding store ({V})"
        )
    if store.topics != topic_model.k:
        raise ConfigError(
            f"store has {store.topics} senses per word, topic model has {topic_model.k}"
        )
    if store.dim != config.dim:
        raise ConfigError(
            f"store dimensionality {store.dim} does not match config dim {config.dim}"
        )
    if collect_pair_losses and config.threads > 1:
        raise ConfigError("pair-loss collection requires the single-threaded mode")

    tokens, offsets = corpus.flat()
    if tokens.size == 0:
        raise ConfigError("cannot train embeddings on an empty corpus")
    if int(tokens.max()) >= V:
        raise ConfigError("corpus contains ids outside the store vocabulary")

    if config.nonparametric:
        sense_mask = select_trainable_senses(topic_model, V, config.p_thres)
        store.mask = sense_mask.mask
    else:
        store.mask = np.ones((V, store.topics), dtype=bool)
    mask_u8 = store.mask.astype(np.uint8)

    counts = np.bincount(tokens, minlength=V)
    noise_table = build_noise_table(counts, config.unigram_power)
    theta = document_topic_matrix(topic_model, corpus, seed=config.seed)

    sense2d = store.sense_vectors.reshape(V * store.topics, store.dim)
    pairs_per_epoch = count_pairs(corpus, config.window)
    if pairs_per_epoch == 0:
        raise ConfigError("corpus yields no training pairs at this window size")
    total_pairs = pairs_per_epoch * config.epochs
    use_table = not config.exact_sigmoid
    mixture = config.objective == "mixture"

    state = np.uint64(config.seed)
    pairs_done = 0
    epoch_losses: list[float] = []
    collected: list[np.ndarray] = []
    for epoch in range(config.epochs):
        if config.threads == 1:
            losses_out = (
                np.empty(pairs_per_epoch) if collect_pair_losses else np.empty(0)
            )
            state, pairs_done, loss_sum, n_pairs = _kernels.sgns_epoch(
                tokens, offsets, 0, corpus.doc_count, theta, sense2d,
                store.global_vectors, mask_u8, config.window, config.negatives,
                noise_table, config.learning_rate, LR_FLOOR_RATIO,
                pairs_done, total_pairs, np.uint64(state), use_table,
                _SIGMOID_TABLE, mixture, losses_out, collect_pair_losses,
            )
            if collect_pair_losses:
                collected.append(losses_out[:n_pairs])
        else:
            loss_sum, n_pairs = _parallel_epoch(
                corpus, tokens, offsets, theta, sense2d, store, mask_u8,
                noise_table, config, epoch, pairs_done, total_pairs,
            )
            pairs_done += n_pairs
        mean = loss_sum / n_pairs
        if not np.isfinite(mean):
            raise ConfigError(f"epoch {epoch + 1}: training diverged (non-finite loss)")
        epoch_losses.append(mean)
        logger.info("epoch %d/%d: mean pair loss %.6f", epoch + 1, config.epochs, mean)
    store.validate()
    return TrainResult(
        epoch_mean_losses=epoch_losses,
        pair_losses=np.concatenate(collected) if collected else None,
    )


def _parallel_epoch(
    corpus, tokens, offsets, theta, sense2d, store, mask_u8,
    noise_table, config, epoch, pairs_done, total_pairs,
):
    """Document-partitioned workers sharing the parameter tables without
    locks; sparse-update collisions are tolerated."""
    n_docs = corpus.doc_count
    workers = min(config.threads, n_docs)
    bounds = np.linspace(0, n_docs, workers + 1).astype(np.int64)
    # pair-count prefix keeps each worker's learning-rate schedule aligned
    doc_pairs = np.array(
        [count_pairs(EncodedCorpus(docs=[d]), config.window) for d in corpus.docs],
        dtype=np.int64,
    )
    prefix = np.concatenate([[0], np.cumsum(doc_pairs)])
    results = [None] * workers
    use_table = not config.exact_sigmoid

    def run(w):
        d0, d1 = int(bounds[w]), int(bounds[w + 1])
        state = np.uint64(config.seed + 7919 * (w + 1) + epoch)
        results[w] = _kernels.sgns_epoch(
            tokens, offsets, d0, d1, theta, sense2d, store.global_vectors,
            mask_u8, config.window, config.negatives, noise_table,
            config.learning_rate, LR_FLOOR_RATIO,
            pairs_done + int(prefix[d0]), total_pairs, state, use_table,
            _SIGMOID_TABLE, config.objective == "mixture", np.empty(0), False,
        )

    threads = [threading.Thread(target=run, args=(w,)) for w in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    loss_sum = sum(r[2] for r in results)
    n_pairs = sum(r[3] for r in results)
    return loss_sum, n_pairs
