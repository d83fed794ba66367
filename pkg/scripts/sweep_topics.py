#!/usr/bin/env python3
"""Topic-count sweep: train one topic model per k and report uniqueness,
perplexity, and per-token NLL, optionally completing the table with the
similarity correlation of embeddings trained on top of each model.

Emits one tab-separated row per k:
    k  uniqueness  perplexity  mean_nll  [rho_x100]
"""

import argparse
import math

import topicsense as ts
from topicsense import model_io
from topicsense.corpus import encode_corpus, read_documents


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--vocab", required=True)
    parser.add_argument("--k-list", default="5,10,15,20")
    parser.add_argument("--iters", type=int, default=100)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--top-words", type=int, default=20)
    parser.add_argument("--dataset", help="similarity TSV; adds a rho column "
                        "by training embeddings per k")
    parser.add_argument("--dim", type=int, default=50)
    parser.add_argument("--epochs", type=int, default=1)
    parser.add_argument("--p-thres", type=float, default=1e-4)
    args = parser.parse_args()

    vocab = model_io.load_vocabulary(args.vocab)
    encoded = encode_corpus(read_documents(args.corpus), vocab)
    dataset = ts.load_similarity_dataset(args.dataset) if args.dataset else None

    header = ["k", "uniqueness", "perplexity", "mean_nll"]
    if dataset:
        header.append("rho_x100")
    print("\t".join(header))
    for k in [int(x) for x in args.k_list.split(",") if x.strip()]:
        model = ts.train_lda(
            encoded, k=k, iterations=args.iters, seed=args.seed,
            vocab_size=len(vocab),
        )
        uniq = ts.topic_uniqueness(model, args.top_words)
        ppl = ts.perplexity(model, encoded)
        row = [str(k), f"{uniq:.4f}", f"{ppl:.4f}", f"{math.log(ppl):.4f}"]
        if dataset:
            config = ts.TrainConfig(
                dim=args.dim, epochs=args.epochs, seed=args.seed,
                nonparametric=True, p_thres=args.p_thres,
            )
            store = ts.init_embeddings(vocab, k=k, n=args.dim, seed=args.seed)
            ts.train(encoded, model, config, store)
            rho, _, _ = ts.evaluate_similarity(store, model, dataset, "avg")
            row.append(f"{rho:.2f}")
        print("\t".join(row))


if __name__ == "__main__":
    main()
