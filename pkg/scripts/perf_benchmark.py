"""Seq-CNN training time as the vocabulary grows.

The conv input dimension is p|V|, yet each region touches only p rows of W,
so the time per epoch should stay nearly flat in |V|.
"""

import argparse
import time

from onehotcnn.metrics import report
from onehotcnn.nn import BranchSpec, PoolingSpec
from onehotcnn.regions import RegionConfig
from onehotcnn.synthetic import NegationCorpus
from onehotcnn.text import build_vocabulary, encode
from onehotcnn.train import TrainConfig, sgd_train


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="200,3000,30000", help="comma-separated |V| values")
    ap.add_argument("--docs", type=int, default=2000)
    ap.add_argument("--epochs", type=int, default=30)
    args = ap.parse_args()

    results = {}
    for size in (int(s) for s in args.sizes.split(",")):
        gen = NegationCorpus(vocab_size=size)
        vocab = build_vocabulary([gen.words()])
        docs = [encode(t, vocab, [l]) for l, t in gen.generate(args.docs, 1)]
        spec = [BranchSpec("seq", 50, RegionConfig(3), PoolingSpec("max", 1))]
        t0 = time.perf_counter()
        sgd_train(docs, spec, vocab, 2, TrainConfig(epochs=args.epochs, seed=1))
        secs = time.perf_counter() - t0
        results[f"V={size}.seconds"] = secs
        results[f"V={size}.seconds_per_epoch"] = secs / args.epochs
    print(report(results), end="")


if __name__ == "__main__":
    main()
