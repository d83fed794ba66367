#!/usr/bin/env python3
"""Drive the full pipeline on one corpus: vocabulary, topic model,
embeddings, then similarity evaluation and diagnostics. A thin convenience
wrapper over the `topicsense` CLI for repeatable experiment runs."""

import argparse
import pathlib
import sys

from topicsense.cli import main as cli


def run(argv):
    rc = cli(argv)
    if rc != 0:
        sys.exit(rc)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--dataset", help="similarity TSV to evaluate against")
    parser.add_argument("--topics", type=int, default=10)
    parser.add_argument("--lda-iters", type=int, default=100)
    parser.add_argument("--dim", type=int, default=200)
    parser.add_argument("--epochs", type=int, default=1)
    parser.add_argument("--nonparametric", action="store_true")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, required=True)
    args = parser.parse_args()

    work = pathlib.Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    vocab = work / "vocab.tsv"
    ldam = work / "topics.ldam"
    emb = work / "embeddings.txt"

    run(["build-vocab", "--input", args.corpus, "--output", str(vocab)])
    run([
        "train-lda", "--corpus", args.corpus, "--vocab", str(vocab),
        "--topics", str(args.topics), "--iters", str(args.lda_iters),
        "--seed", str(args.seed), "--checkpoint-every",
        str(max(1, args.lda_iters // 5)), "--out", str(ldam),
    ])
    train_args = [
        "train", "--corpus", args.corpus, "--vocab", str(vocab),
        "--lda-model", str(ldam), "--out", str(emb),
        "--dim", str(args.dim), "--epochs", str(args.epochs),
        "--seed", str(args.seed), "--threads", str(args.threads),
    ]
    if args.nonparametric:
        train_args.append("--nonparametric")
    run(train_args)
    run(["diagnose", "--lda-model", str(ldam), "--vocab", str(vocab),
         "--corpus", args.corpus])
    if args.dataset:
        for metric in ("global", "avg"):
            run(["eval-sim", "--model", str(emb), "--dataset", args.dataset,
                 "--metric", metric])


if __name__ == "__main__":
    main()
