import numpy as np

from onehotcnn.baselines import nb_weights, presence_matrix
from onehotcnn.nn import BranchSpec, PoolingSpec, init_network
from onehotcnn.regions import RegionConfig
from onehotcnn.text import Vocabulary, build_ngram_vocabulary, encode

WORDS = [f"w{i}" for i in range(10)]
VOCAB = Vocabulary(tuple(sorted(WORDS)))


def random_docs(rng, n, lo=1, hi=7, oov_rate=0.15):
    docs = []
    for i in range(n):
        k = int(rng.integers(lo, hi + 1))
        toks = [WORDS[j] if rng.random() > oov_rate else "zz" for j in rng.integers(10, size=k)]
        docs.append(encode(toks, VOCAB, [i % 2]))
    return docs


def tiny_net(rng, kind="seq", pooling="max", response_norm=False, two_branch=False,
             docs=None, p=2, m=3, k=2, scale=0.5):
    specs = [BranchSpec(kind, m, RegionConfig(p, representation=kind), PoolingSpec(pooling, k),
                        response_norm)]
    bag_vocabs, nbs = [], []
    if two_branch:
        specs.append(BranchSpec("bag", 2, None, PoolingSpec(pooling, 1), response_norm, (1, 2, 3), True))
        corpus = [list(d.tokens) for d in docs]
        bv = build_ngram_vocabulary(corpus, (1, 2, 3), 30)
        bag_vocabs = [bv]
        nbs = [nb_weights(presence_matrix(corpus, bv, (1, 2, 3)), [d.label for d in docs])]
    net = init_network(specs, VOCAB, 2, seed=int(rng.integers(1 << 30)), init_scale=scale,
                       bag_vocabs=bag_vocabs, nb_weights=nbs)
    # nonzero biases keep every rectifier away from its kink
    for br in net.branches:
        br.b[:] = rng.uniform(0.1, 0.5, size=br.b.shape)
    net.top_b[:] = rng.normal(size=net.top_b.shape)
    return net
