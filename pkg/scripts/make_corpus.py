#!/usr/bin/env python3
"""Generate a synthetic themed corpus plus a derived similarity dataset.

Useful for end-to-end dry runs when no real corpus is at hand: documents
are theme-pure with a shared high-frequency vocabulary, and the similarity
pairs score same-theme pairs high and cross-theme pairs low.
"""

import argparse

from topicsense.synthetic import (
    similarity_pairs_for_themes,
    themed_corpus,
    write_corpus,
    write_similarity_tsv,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-corpus", required=True)
    parser.add_argument("--out-pairs", required=True)
    parser.add_argument("--themes", type=int, default=10)
    parser.add_argument("--docs", type=int, default=50_000)
    parser.add_argument("--doc-len", type=int, default=100)
    parser.add_argument("--pairs", type=int, default=50)
    parser.add_argument("--seed", type=int, required=True)
    args = parser.parse_args()

    docs, _, theme_words = themed_corpus(
        n_themes=args.themes, n_docs=args.docs, doc_len=args.doc_len, seed=args.seed
    )
    write_corpus(args.out_corpus, docs)
    rows = similarity_pairs_for_themes(
        theme_words, n_same=args.pairs // 2, n_cross=args.pairs - args.pairs // 2,
        seed=args.seed + 1,
    )
    write_similarity_tsv(args.out_pairs, rows)
    print(f"corpus\t{args.out_corpus}\tdocs\t{len(docs)}")
    print(f"tokens\t{sum(len(d) for d in docs)}")
    print(f"pairs\t{args.out_pairs}\trows\t{len(rows)}")


if __name__ == "__main__":
    main()
