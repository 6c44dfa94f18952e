#!/usr/bin/env python3
"""Write synthetic projective treebanks for quick experiments.

Example:
    python3 scripts/make_toy_corpus.py --out toy_train.conll --count 50 --kind grammar
"""

import argparse

from efdp.synthetic import grammar_corpus, toy_corpus
from efdp.treebank import write_conll_file


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument(
        "--kind",
        choices=("grammar", "random"),
        default="grammar",
        help="grammar: tiny template grammar; random: uniform projective trees",
    )
    ap.add_argument("--max-len", type=int, default=8, help="random kind only")
    args = ap.parse_args()
    if args.kind == "grammar":
        corpus = grammar_corpus(seed=args.seed, count=args.count)
    else:
        corpus = toy_corpus(seed=args.seed, count=args.count, n_max=args.max_len)
    write_conll_file(args.out, corpus)
    print(f"wrote {len(corpus)} sentences to {args.out}")


if __name__ == "__main__":
    main()
