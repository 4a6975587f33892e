"""Word-order experiment on the synthetic negation corpus.

Trains seq-CNN, bow-CNN, a seq + NB-weighted bag parallel net, the bow1/2/3
logistic baselines and NB-LM on the same split, and prints test error for
each alongside accuracy on documents whose phrases use a held-out word.
"""

import argparse
import logging
import time

import numpy as np

from onehotcnn.baselines import BowScheme, linear_train, nb_lm_train, vectorize
from onehotcnn.metrics import report
from onehotcnn.nn import BranchSpec, PoolingSpec, predict
from onehotcnn.regions import RegionConfig
from onehotcnn.synthetic import NegationCorpus
from onehotcnn.text import build_ngram_vocabulary, build_vocabulary, encode
from onehotcnn.train import TrainConfig, sgd_train


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--train", type=int, default=2000)
    ap.add_argument("--test", type=int, default=2000)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--neurons", type=int, default=50)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    gen = NegationCorpus(held_out="w0")
    tr = gen.generate(args.train, args.seed)
    te = gen.generate(args.test, args.seed + 1)
    held = gen.generate(args.test // 4, args.seed + 2, middle="w0")
    y_tr = [l for l, _ in tr]
    vocab = build_vocabulary([t for _, t in tr])
    enc = lambda rows: [encode(t, vocab, [l]) for l, t in rows]
    d_tr, d_te, d_held = enc(tr), enc(te), enc(held)
    bag_vocab = build_ngram_vocabulary([t for _, t in tr], (1, 2, 3))

    m = args.neurons
    nets = {
        "seq-CNN": [BranchSpec("seq", m, RegionConfig(3), PoolingSpec("max", 1))],
        "bow-CNN": [BranchSpec("bow", m, RegionConfig(3, representation="bow"),
                               PoolingSpec("max", 1))],
        "seq+bag": [BranchSpec("seq", m, RegionConfig(3), PoolingSpec("max", 1)),
                    BranchSpec("bag", 10, None, PoolingSpec("max", 1), ngrams=(1, 2, 3))],
    }
    cfg = TrainConfig(learning_rate=0.1, epochs=args.epochs, minibatch=100, seed=args.seed)
    results = {}
    for name, specs in nets.items():
        t0 = time.perf_counter()
        net = sgd_train(d_tr, specs, vocab, 2, cfg, [bag_vocab])
        secs = time.perf_counter() - t0
        results[f"{name}.test_error"] = float(np.mean(predict(net, d_te) != [l for l, _ in te]))
        results[f"{name}.heldout_accuracy"] = float(np.mean(predict(net, d_held) ==
                                                            [l for l, _ in held]))
        results[f"{name}.seconds"] = secs

    for n in (1, 2, 3):
        ngrams = tuple(range(1, n + 1))
        v = build_ngram_vocabulary([t for _, t in tr], ngrams)
        scheme = BowScheme("binary_unit", v, ngrams)
        model = linear_train(vectorize([t for _, t in tr], scheme), y_tr, 2, l2=1e-4,
                             epochs=args.epochs, learning_rate=1.0, minibatch=100, seed=args.seed)
        pred = model.predict(vectorize([t for _, t in te], scheme))
        results[f"bow{n}.test_error"] = float(np.mean(pred != [l for l, _ in te]))

    model, scheme = nb_lm_train([t for _, t in tr], y_tr, bag_vocab, ngrams=(1, 2, 3), l2=1e-4,
                                epochs=args.epochs, learning_rate=0.5, minibatch=100,
                                seed=args.seed)
    pred = model.predict(vectorize([t for _, t in te], scheme))
    results["nblm.test_error"] = float(np.mean(pred != [l for l, _ in te]))
    print(report(results), end="")


if __name__ == "__main__":
    main()
