"""Versioned text formats for vocabularies, topic models, embedding stores,
and external pretrained vectors.

All formats are UTF-8, LF-terminated, and canonically serialized so that
save -> load -> save is byte-identical. Vectors round-trip at 9
significant digits.
"""

from __future__ import annotations

import logging

import numpy as np

from .corpus import Vocabulary
from .embeddings import EmbeddingStore
from .errors import ConfigError, DataFormatError
from .lda import TopicModel

logger = logging.getLogger(__name__)

TOPIC_MODEL_MAGIC = "ldam"
EMBEDDING_MAGIC = "etmo"
FORMAT_VERSION = "1"


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------

def save_vocabulary(vocab: Vocabulary, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word, count in zip(vocab.words, vocab.counts):
            fh.write(f"{word}\t{count}\n")


def load_vocabulary(path) -> Vocabulary:
    words: list[str] = []
    counts: list[int] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise DataFormatError(
                    f"{path}:{lineno}: expected word<TAB>count, got {len(cols)} columns"
                )
            word, count_s = cols
            try:
                count = int(count_s)
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: non-integer count {count_s!r}"
                ) from None
            if word in seen:
                raise DataFormatError(f"{path}:{lineno}: duplicate word {word!r}")
            if counts and count > counts[-1]:
                raise DataFormatError(
                    f"{path}:{lineno}: counts must be non-increasing"
                )
            seen.add(word)
            words.append(word)
            counts.append(count)
    if not words:
        raise DataFormatError(f"{path}: empty vocabulary file")
    return Vocabulary(words=words, counts=np.asarray(counts, dtype=np.int64))


# ---------------------------------------------------------------------------
# Topic model
# ---------------------------------------------------------------------------

def save_topic_model(model: TopicModel, path, include_training_state: bool = True):
    """Header, V rows of word-topic counts, one row of topic totals, then
    optional document-topic counts and per-document assignments (needed
    only to reuse training-set statistics or resume)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{TOPIC_MODEL_MAGIC} {FORMAT_VERSION} k={model.k} V={model.vocab_size} "
            f"alpha={_fmt(model.alpha)} beta={_fmt(model.beta)}\n"
        )
        for row in model.n_wz:
            fh.write("\t".join(str(int(c)) for c in row) + "\n")
        fh.write("\t".join(str(int(c)) for c in model.n_z) + "\n")
        if include_training_state and model.n_dz.size:
            fh.write(f"n_dz {model.n_dz.shape[0]}\n")
            for row in model.n_dz:
                fh.write("\t".join(str(int(c)) for c in row) + "\n")
            if model.assignments is not None:
                fh.write(f"assignments {len(model.assignments)}\n")
                for doc in model.assignments:
                    fh.write(" ".join(str(int(t)) for t in doc) + "\n")


def load_topic_model(path) -> TopicModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty topic-model file")
    header = lines[0].split()
    if len(header) != 6 or header[0] != TOPIC_MODEL_MAGIC:
        raise DataFormatError(f"{path}: not a topic-model file")
    if header[1] != FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: unsupported format version {header[1]!r}"
        )
    try:
        fields = dict(part.split("=", 1) for part in header[2:])
        k = int(fields["k"])
        V = int(fields["V"])
        alpha = float(fields["alpha"])
        beta = float(fields["beta"])
    except (ValueError, KeyError):
        raise DataFormatError(f"{path}: malformed header {lines[0]!r}") from None

    def parse_counts(lineno, expect):
        vals = lines[lineno].split("\t")
        if len(vals) != expect:
            raise DataFormatError(
                f"{path}:{lineno + 1}: expected {expect} columns, got {len(vals)}"
            )
        try:
            return [int(v) for v in vals]
        except ValueError:
            raise DataFormatError(f"{path}:{lineno + 1}: non-integer count") from None

    if len(lines) < 1 + V + 1:
        raise DataFormatError(f"{path}: truncated file (header says V={V})")
    n_wz = np.array([parse_counts(1 + w, k) for w in range(V)], dtype=np.int64)
    n_z = np.array(parse_counts(1 + V, k), dtype=np.int64)
    cursor = 2 + V

    n_dz = np.zeros((0, k), dtype=np.int64)
    assignments = None
    if cursor < len(lines) and lines[cursor].startswith("n_dz "):
        D = int(lines[cursor].split()[1])
        cursor += 1
        if cursor + D > len(lines):
            raise DataFormatError(f"{path}: truncated n_dz section")
        n_dz = np.array(
            [parse_counts(cursor + d, k) for d in range(D)], dtype=np.int64
        )
        cursor += D
        if cursor < len(lines) and lines[cursor].startswith("assignments "):
            A = int(lines[cursor].split()[1])
            cursor += 1
            if A != D or cursor + A > len(lines):
                raise DataFormatError(f"{path}: malformed assignments section")
            assignments = []
            for d in range(A):
                labels = np.array(
                    [int(v) for v in lines[cursor + d].split()], dtype=np.int32
                )
                if labels.size and (labels.min() < 0 or labels.max() >= k):
                    raise DataFormatError(
                        f"{path}: assignment label out of range in document {d}"
                    )
                if labels.size != n_dz[d].sum():
                    raise DataFormatError(
                        f"{path}: assignments for document {d} disagree with n_dz"
                    )
                assignments.append(labels)
            cursor += A

    model = TopicModel(
        k=k, alpha=alpha, beta=beta, vocab_size=V,
        n_wz=n_wz, n_dz=n_dz, n_z=n_z, assignments=assignments,
    )
    try:
        model.validate()
    except DataFormatError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    return model


# ---------------------------------------------------------------------------
# Embedding store
# ---------------------------------------------------------------------------

def save_embeddings(store: EmbeddingStore, path):
    """Per word: a mask line, k sense rows (masked-out rows included so
    topic order is positional), then the global row."""
    V, k, n = store.sense_vectors.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{EMBEDDING_MAGIC} {FORMAT_VERSION} V={V} k={k} n={n}\n")
        for wid, word in enumerate(store.words):
            bits = "".join("1" if b else "0" for b in store.mask[wid])
            fh.write(f"{word} {bits}\n")
            for i in range(k):
                fh.write(" ".join(_fmt(x) for x in store.sense_vectors[wid, i]) + "\n")
            fh.write(" ".join(_fmt(x) for x in store.global_vectors[wid]) + "\n")


def load_embeddings(path) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty embedding file")
    header = lines[0].split()
    if len(header) != 5 or header[0] != EMBEDDING_MAGIC:
        raise DataFormatError(f"{path}: not an embedding file")
    if header[1] != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported format version {header[1]!r}")
    try:
        fields = dict(part.split("=", 1) for part in header[2:])
        V = int(fields["V"])
        k = int(fields["k"])
        n = int(fields["n"])
    except (ValueError, KeyError):
        raise DataFormatError(f"{path}: malformed header {lines[0]!r}") from None
    expected = 1 + V * (k + 2)
    if len(lines) != expected:
        raise DataFormatError(
            f"{path}: expected {expected} lines for V={V} k={k}, got {len(lines)}"
        )

    def parse_row(lineno):
        vals = lines[lineno].split(" ")
        if len(vals) != n:
            raise DataFormatError(
                f"{path}:{lineno + 1}: expected {n} values, got {len(vals)}"
            )
        try:
            return np.array([float(v) for v in vals], dtype=np.float64)
        except ValueError:
            raise DataFormatError(f"{path}:{lineno + 1}: non-numeric value") from None

    words: list[str] = []
    sense = np.empty((V, k, n), dtype=np.float64)
    global_vecs = np.empty((V, n), dtype=np.float64)
    mask = np.empty((V, k), dtype=bool)
    cursor = 1
    for wid in range(V):
        head = lines[cursor].rsplit(" ", 1)
        if len(head) != 2:
            raise DataFormatError(f"{path}:{cursor + 1}: malformed word line")
        word, bits = head
        if len(bits) != k or any(b not in "01" for b in bits):
            raise DataFormatError(
                f"{path}:{cursor + 1}: mask must be a {k}-character 0/1 string"
            )
        words.append(word)
        mask[wid] = [b == "1" for b in bits]
        cursor += 1
        for i in range(k):
            sense[wid, i] = parse_row(cursor)
            cursor += 1
        global_vecs[wid] = parse_row(cursor)
        cursor += 1
    store = EmbeddingStore(
        words=words, sense_vectors=sense, global_vectors=global_vecs, mask=mask
    )
    try:
        store.validate()
    except ConfigError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    return store


# ---------------------------------------------------------------------------
# External pretrained vectors
# ---------------------------------------------------------------------------

def load_external_vectors(path, expected_dim: int | None = None):
    """Parse the conventional text vector format (word then n decimals per
    line). Dimensions are validated per line; duplicate words keep the last
    occurrence with a warning."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2 or not parts[0]:
                if not line.strip():
                    continue
                raise DataFormatError(f"{path}:{lineno}: malformed vector line")
            word = parts[0]
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: non-numeric vector component"
                ) from None
            if expected_dim is None:
                expected_dim = vec.size
            if vec.size != expected_dim:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {expected_dim} values, got {vec.size}"
                )
            if word in vectors:
                logger.warning(
                    "%s:%d: duplicate vector for %r, keeping the last",
                    path, lineno, word,
                )
            vectors[word] = vec
    if not vectors:
        raise DataFormatError(f"{path}: no vectors found")
    return vectors
