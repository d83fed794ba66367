"""Topic-conditioned multi-prototype word embeddings.

Pipeline: ingest a one-document-per-line corpus, train a collapsed-Gibbs
topic model, train per-topic sense vectors with a topic-weighted
skip-gram negative-sampling objective (optionally pruned by a
p(word|topic) threshold), and evaluate with word-similarity and
word-analogy protocols.
"""

from .corpus import (
    EncodedCorpus,
    Vocabulary,
    build_vocabulary,
    encode_corpus,
    subsample_corpus,
    tokenize,
)
from .embeddings import (
    EmbeddingStore,
    SenseMask,
    TrainConfig,
    TrainResult,
    build_noise_table,
    init_embeddings,
    mixture_pair_loss_and_grads,
    mixture_predict,
    pair_loss_and_grads,
    sample_negatives,
    select_trainable_senses,
    train,
)
from .errors import ConfigError, DataFormatError, TopicsenseError
from .evaluation import (
    AnalogyQuad,
    SimilarityPair,
    avg_sim,
    avg_sim_c,
    avg_sim_weighted,
    evaluate_analogy,
    evaluate_similarity,
    global_sim,
    load_analogy_dataset,
    load_similarity_dataset,
    solve_analogy,
    spearman,
)
from .inference import Neighbor, contextual_embedding, nearest_neighbors, sense_vectors
from .lda import (
    TopicModel,
    doc_topic_distribution,
    infer_topics,
    perplexity,
    topic_keys,
    topic_uniqueness,
    train_lda,
    word_given_topic,
)
from .model_io import (
    load_embeddings,
    load_external_vectors,
    load_topic_model,
    load_vocabulary,
    save_embeddings,
    save_topic_model,
    save_vocabulary,
)

__version__ = "0.1.0"
