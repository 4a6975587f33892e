"""Write the negation corpus as TSV files plus a ready-to-run CLI config.

    python3 scripts/make_synthetic.py out/ && cd out
    onehotcnn build-vocab --config exp.cfg
    onehotcnn select --config exp.cfg --threads 2
    onehotcnn predict --config exp.cfg --out pred.txt
    onehotcnn eval --pred pred.txt --gold test.tsv
"""

import argparse
from pathlib import Path

from onehotcnn.synthetic import NegationCorpus
from onehotcnn.text import write_dataset

CONFIG = """\
train=train.tsv
test=test.tsv
vocab=vocab.txt
model=model.tcnn
vocab_size=30000
learning_rate=0.1
epochs=30
minibatch=100
seed={seed}
dev_fraction=0.1
branch.0.kind=seq
branch.0.region=3
branch.0.neurons=50
branch.1.kind=bag
branch.1.ngrams=1,2,3
branch.1.neurons=10
branch.1.ngram_vocab=ngrams.txt
grid.l2=0|0.0001
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--train", type=int, default=2000)
    ap.add_argument("--test", type=int, default=2000)
    ap.add_argument("--vocab-size", type=int, default=200)
    ap.add_argument("--held-out", default="w0", help="filler never used inside a phrase")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    gen = NegationCorpus(vocab_size=args.vocab_size, held_out=args.held_out)
    args.out.mkdir(parents=True, exist_ok=True)
    sets = {"train": gen.generate(args.train, args.seed),
            "test": gen.generate(args.test, args.seed + 1),
            "heldout": gen.generate(args.test // 4, args.seed + 2, middle=args.held_out)}
    for name, rows in sets.items():
        write_dataset(args.out / f"{name}.tsv", [((l,), " ".join(t)) for l, t in rows])
        print(f"wrote {args.out / (name + '.tsv')} ({len(rows)} docs)")
    (args.out / "exp.cfg").write_text(CONFIG.format(seed=args.seed))
    print(f"wrote {args.out / 'exp.cfg'}")


if __name__ == "__main__":
    main()
