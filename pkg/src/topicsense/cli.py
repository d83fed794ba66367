"""Command-line entry point orchestrating the full pipeline.

One subcommand per stage: build-vocab, train-lda, train, eval-sim,
eval-analogy, neighbors, diagnose, sweep-thres. Output is line-oriented
tab-separated text on stdout. Exit codes: 0 success, 2 usage or parameter
validation, 1 runtime failure. Option precedence: command-line flag, then
--config file (key=value lines), then built-in default.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import corpus as corpus_mod
from . import embeddings as emb
from . import evaluation as ev
from . import inference as inf
from . import lda as lda_mod
from . import model_io
from .errors import ConfigError, TopicsenseError

logger = logging.getLogger(__name__)

_MISSING = object()


def _fnum(x) -> str:
    return format(float(x), ".9g")


def _read_config(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _coerce(value: str, like):
    if isinstance(like, bool):
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot interpret {value!r} as a boolean")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def _resolve(args, defaults: dict):
    """Apply flag > config-file > default precedence; _MISSING defaults are
    required and raise when nothing supplies them."""
    cfg = _read_config(args.config) if getattr(args, "config", None) else {}
    resolved = argparse.Namespace()
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None and key in cfg:
            like = default if default is not _MISSING else ""
            value = _coerce(cfg[key], like)
        if value is None:
            if default is _MISSING:
                raise ConfigError(f"missing required option --{key.replace('_', '-')}")
            value = default
        setattr(resolved, key, value)
    return resolved


def _load_encoded(corpus_path, vocab_path):
    vocab = model_io.load_vocabulary(vocab_path)
    encoded = corpus_mod.encode_corpus(corpus_mod.read_documents(corpus_path), vocab)
    if encoded.doc_count == 0:
        raise ConfigError(f"{corpus_path}: no in-vocabulary documents")
    return vocab, encoded


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_build_vocab(args):
    opts = _resolve(args, {
        "input": _MISSING, "output": _MISSING, "min_count": 1, "max_vocab": 0,
    })
    max_vocab = opts.max_vocab if opts.max_vocab > 0 else None
    vocab = corpus_mod.build_vocabulary(
        corpus_mod.read_documents(opts.input), opts.min_count, max_vocab
    )
    encoded = corpus_mod.encode_corpus(corpus_mod.read_documents(opts.input), vocab)
    model_io.save_vocabulary(vocab, opts.output)
    print(f"vocab_size\t{len(vocab)}")
    print(f"total_tokens\t{encoded.total_tokens}")
    print(f"skipped_docs\t{encoded.skipped_docs}")
    print(f"saved\t{opts.output}")
    return 0


def cmd_train_lda(args):
    opts = _resolve(args, {
        "corpus": _MISSING, "vocab": _MISSING, "out": _MISSING,
        "topics": 10, "alpha": 0.0, "beta": 0.01, "iters": 200,
        "seed": _MISSING, "checkpoint_every": 0,
    })
    if args.alpha is not None and args.alpha <= 0:
        raise ConfigError("alpha must be positive")
    vocab, encoded = _load_encoded(opts.corpus, opts.vocab)
    model = lda_mod.train_lda(
        encoded, k=opts.topics,
        alpha=opts.alpha if opts.alpha > 0 else None,
        beta=opts.beta, iterations=opts.iters, seed=opts.seed,
        vocab_size=len(vocab), checkpoint_every=opts.checkpoint_every,
    )
    for entry in model.history:
        print(
            f"checkpoint\t{entry['sweep']}\tperplexity\t{_fnum(entry['perplexity'])}"
            f"\tmean_log_likelihood\t{_fnum(-entry['mean_nll'])}"
        )
    model_io.save_topic_model(model, opts.out)
    print(f"saved\t{opts.out}")
    return 0


def cmd_train(args):
    opts = _resolve(args, {
        "corpus": _MISSING, "vocab": _MISSING, "lda_model": _MISSING,
        "out": _MISSING, "dim": 200, "window": 2, "negatives": 8,
        "epochs": 1, "lr": 0.025, "p_thres": 1e-4, "nonparametric": False,
        "seed": _MISSING, "threads": 1, "init_vectors": "", "subsample": 0.0,
        "exact_sigmoid": False, "objective": "weighted",
    })
    vocab, encoded = _load_encoded(opts.corpus, opts.vocab)
    model = model_io.load_topic_model(opts.lda_model)
    if model.vocab_size != len(vocab):
        raise ConfigError(
            f"topic model covers {model.vocab_size} words, vocabulary has {len(vocab)}"
        )
    if opts.subsample > 0:
        encoded = corpus_mod.subsample_corpus(
            encoded, vocab, opts.subsample, opts.seed
        )
    pretrained = None
    if opts.init_vectors:
        pretrained = model_io.load_external_vectors(opts.init_vectors, opts.dim)
    config = emb.TrainConfig(
        window=opts.window, negatives=opts.negatives, dim=opts.dim,
        epochs=opts.epochs, learning_rate=opts.lr, p_thres=opts.p_thres,
        nonparametric=opts.nonparametric, seed=opts.seed,
        threads=opts.threads, exact_sigmoid=opts.exact_sigmoid,
        objective=opts.objective,
    )
    config.validate()
    store = emb.init_embeddings(
        vocab, k=model.k, n=opts.dim, seed=opts.seed, pretrained=pretrained
    )
    result = emb.train(encoded, model, config, store)
    for i, loss in enumerate(result.epoch_mean_losses, start=1):
        print(f"epoch\t{i}\tmean_loss\t{_fnum(loss)}")
    model_io.save_embeddings(store, opts.out)
    print(f"saved\t{opts.out}")
    return 0


def cmd_eval_sim(args):
    opts = _resolve(args, {
        "model": _MISSING, "dataset": _MISSING, "metric": "avg",
        "lda_model": "", "seed": 0,
    })
    store = model_io.load_embeddings(opts.model)
    topic_model = (
        model_io.load_topic_model(opts.lda_model) if opts.lda_model else None
    )
    dataset = ev.load_similarity_dataset(opts.dataset)
    rho, used, skipped = ev.evaluate_similarity(
        store, topic_model, dataset, opts.metric, seed=opts.seed
    )
    print(f"metric\t{opts.metric}")
    print(f"rho_x100\t{_fnum(rho)}")
    print(f"pairs_used\t{used}")
    print(f"pairs_skipped\t{skipped}")
    return 0


def cmd_eval_analogy(args):
    opts = _resolve(args, {"model": _MISSING, "dataset": _MISSING})
    store = model_io.load_embeddings(opts.model)
    dataset = ev.load_analogy_dataset(opts.dataset)
    accuracy, answered, skipped = ev.evaluate_analogy(store, dataset)
    print(f"accuracy\t{_fnum(accuracy)}")
    print(f"answered\t{answered}")
    print(f"skipped\t{skipped}")
    return 0


def cmd_neighbors(args):
    opts = _resolve(args, {
        "model": _MISSING, "word": _MISSING, "top": 10, "scope": "global",
        "sense": -1, "context": "", "lda_model": "", "seed": 0,
    })
    if opts.sense >= 0 and opts.context:
        raise ConfigError("--sense and --context are mutually exclusive")
    store = model_io.load_embeddings(opts.model)
    wid = store.index.get(opts.word)
    if wid is None:
        raise ConfigError(f"word {opts.word!r} is not in the vocabulary")
    if opts.sense >= 0:
        if opts.sense >= store.topics or not store.mask[wid, opts.sense]:
            valid = [i for i in range(store.topics) if store.mask[wid, i]]
            raise ConfigError(
                f"sense {opts.sense} of {opts.word!r} is not trainable; "
                f"valid senses: {valid}"
            )
        query = store.sense_vectors[wid, opts.sense]
    elif opts.context or args.context is not None:
        if not opts.lda_model:
            raise ConfigError("--context requires --lda-model")
        topic_model = model_io.load_topic_model(opts.lda_model)
        ids = [
            store.index[t]
            for t in corpus_mod.tokenize(opts.context)
            if t in store.index
        ]
        weights = lda_mod.infer_topics(topic_model, ids, seed=opts.seed)
        query = inf.contextual_embedding(store, weights, wid)
    else:
        query = store.global_vectors[wid]
    hits = inf.nearest_neighbors(
        store, query, top_n=opts.top, scope=opts.scope, exclude_word=wid
    )
    for h in hits:
        label = store.words[h.word_id]
        if h.sense is not None:
            label = f"{label}#{h.sense}"
        print(f"{label}\t{_fnum(h.score)}")
    return 0


def cmd_diagnose(args):
    opts = _resolve(args, {
        "lda_model": _MISSING, "corpus": "", "vocab": "", "top_words": 20,
        "seed": 0,
    })
    model = model_io.load_topic_model(opts.lda_model)
    words = None
    if opts.vocab:
        vocab = model_io.load_vocabulary(opts.vocab)
        if len(vocab) != model.vocab_size:
            raise ConfigError("vocabulary does not match the topic model")
        words = vocab.words
    keys = lda_mod.topic_keys(model, opts.top_words)
    for j, key in enumerate(keys):
        names = " ".join(words[w] if words else str(w) for w in key)
        print(f"topic\t{j}\t{names}")
    uniq = lda_mod.topic_uniqueness(model, opts.top_words)
    print(f"topic_uniqueness\t{_fnum(uniq)}")
    if opts.corpus:
        if words is None:
            raise ConfigError("--corpus requires --vocab to encode documents")
        encoded = corpus_mod.encode_corpus(
            corpus_mod.read_documents(opts.corpus), vocab
        )
        ppl = lda_mod.perplexity(model, encoded, seed=opts.seed)
        print(f"perplexity\t{_fnum(ppl)}")
        print(f"mean_nll\t{_fnum(np.log(ppl))}")
    return 0


def cmd_sweep_thres(args):
    opts = _resolve(args, {
        "corpus": _MISSING, "vocab": _MISSING, "lda_model": _MISSING,
        "dataset": _MISSING, "thres_list": _MISSING, "seed": _MISSING,
        "dim": 200, "window": 2, "negatives": 8, "epochs": 1, "lr": 0.025,
        "threads": 1, "probe_words": "",
    })
    try:
        thresholds = [float(t) for t in opts.thres_list.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad threshold list {opts.thres_list!r}") from None
    if not thresholds:
        raise ConfigError("threshold list is empty")
    vocab, encoded = _load_encoded(opts.corpus, opts.vocab)
    model = model_io.load_topic_model(opts.lda_model)
    dataset = ev.load_similarity_dataset(opts.dataset)
    probes = [w for w in opts.probe_words.split(",") if w]
    for thres in thresholds:
        config = emb.TrainConfig(
            window=opts.window, negatives=opts.negatives, dim=opts.dim,
            epochs=opts.epochs, learning_rate=opts.lr, p_thres=thres,
            nonparametric=True, seed=opts.seed, threads=opts.threads,
        )
        config.validate()
        store = emb.init_embeddings(vocab, k=model.k, n=opts.dim, seed=opts.seed)
        emb.train(encoded, model, config, store)
        rho, used, skipped = ev.evaluate_similarity(store, model, dataset, "avg")
        print(
            f"p_thres\t{_fnum(thres)}\trho_x100\t{_fnum(rho)}"
            f"\tpairs_used\t{used}\tpairs_skipped\t{skipped}"
        )
        for word in probes:
            wid = store.index.get(word)
            if wid is None:
                raise ConfigError(f"probe word {word!r} is not in the vocabulary")
            print(
                f"senses\t{word}\tp_thres\t{_fnum(thres)}"
                f"\tcount\t{int(store.mask[wid].sum())}"
            )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicsense",
        description="Topic-conditioned multi-sense word embeddings: "
        "corpus ingestion, topic modeling, embedding training, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file (flags win)")

    p = sub.add_parser("build-vocab", parents=[common],
                       help="count words and write a vocabulary file")
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--min-count", type=int, dest="min_count")
    p.add_argument("--max-vocab", type=int, dest="max_vocab")
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train-lda", parents=[common],
                       help="train the Gibbs-sampled topic model")
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--topics", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--checkpoint-every", type=int, dest="checkpoint_every")
    p.set_defaults(func=cmd_train_lda)

    p = sub.add_parser("train", parents=[common],
                       help="train multi-sense embeddings")
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--lda-model", dest="lda_model")
    p.add_argument("--out")
    p.add_argument("--dim", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--negatives", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--p-thres", type=float, dest="p_thres")
    p.add_argument("--nonparametric", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--init-vectors", dest="init_vectors")
    p.add_argument("--subsample", type=float,
                   help="frequent-word subsampling threshold (off by default)")
    p.add_argument("--exact-sigmoid", action="store_true", default=None,
                   dest="exact_sigmoid")
    p.add_argument("--objective", choices=["weighted", "mixture"],
                   help="per-sense weighted loss (default) or exact "
                   "log-mixture loss")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval-sim", parents=[common],
                       help="word-similarity evaluation (Spearman rho x100)")
    p.add_argument("--model")
    p.add_argument("--lda-model", dest="lda_model")
    p.add_argument("--dataset")
    p.add_argument("--metric", choices=["global", "avg", "avgc"])
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_eval_sim)

    p = sub.add_parser("eval-analogy", parents=[common],
                       help="word-analogy accuracy")
    p.add_argument("--model")
    p.add_argument("--dataset")
    p.set_defaults(func=cmd_eval_analogy)

    p = sub.add_parser("neighbors", parents=[common],
                       help="nearest neighbors of a word, sense, or context")
    p.add_argument("--model")
    p.add_argument("--word")
    p.add_argument("--sense", type=int)
    p.add_argument("--context")
    p.add_argument("--lda-model", dest="lda_model")
    p.add_argument("--top", type=int)
    p.add_argument("--scope", choices=["global", "sense"])
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("diagnose", parents=[common],
                       help="topic keys, uniqueness, and perplexity")
    p.add_argument("--lda-model", dest="lda_model")
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--top-words", type=int, dest="top_words")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("sweep-thres", parents=[common],
                       help="train and evaluate across sense thresholds")
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--lda-model", dest="lda_model")
    p.add_argument("--dataset")
    p.add_argument("--thres-list", dest="thres_list")
    p.add_argument("--probe-words", dest="probe_words")
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--negatives", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_sweep_thres)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("TOPICSENSE_LOG_LEVEL", "WARNING").upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TopicsenseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
