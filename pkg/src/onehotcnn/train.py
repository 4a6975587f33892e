"""Seeded minibatch SGD for the convolution network, and region introspection."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .baselines import TrainingDiverged, nb_weights, presence_matrix
from .nn import (BranchSpec, ConfigError, Network, backward, conv_forward, forward,
                 init_network, prepare, targets_for)
from .regions import region_matrix, region_tokens
from .text import OOV, Document, Vocabulary

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    l2: float = 0.0
    epochs: int = 30
    minibatch: int = 100
    dropout: float = 0.0
    seed: int = 0
    dev_fraction: float = 0.1
    lr_halve_every: int = 0
    init_scale: float = 0.01

    def __post_init__(self) -> None:
        if not self.learning_rate >= 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.l2 < 0:
            raise ConfigError("l2 must be >= 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.minibatch < 1:
            raise ConfigError("minibatch must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if not 0.0 <= self.dev_fraction < 1.0:
            raise ConfigError("dev_fraction must be in [0, 1)")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned")


def build_network(docs: Sequence[Document], specs: Sequence[BranchSpec], vocab: Vocabulary | None,
                  n_classes: int, cfg: TrainConfig,
                  bag_vocabs: Sequence[Vocabulary] = (),
                  rng: np.random.Generator | None = None) -> Network:
    """Initialise a network; NB-weights of bag branches come from ``docs``."""
    nbs = []
    bags = iter(bag_vocabs)
    for spec in specs:
        if spec.kind != "bag":
            continue
        v = next(bags, None)
        if v is None:
            raise ConfigError("bag branch without an n-gram vocabulary")
        if spec.nb_weight:
            if n_classes != 2 or any(len(d.labels) != 1 for d in docs):
                raise ConfigError("NB-weighted bag branch requires a binary single-label task")
            X = presence_matrix([d.tokens for d in docs], v, spec.ngrams)
            nbs.append(nb_weights(X, [d.label for d in docs]))
        else:
            nbs.append(None)
    return init_network(specs, vocab, n_classes, seed=cfg.seed, dropout=cfg.dropout,
                        init_scale=cfg.init_scale, bag_vocabs=list(bag_vocabs),
                        nb_weights=nbs, rng=rng)


def sgd_train(docs: Sequence[Document], specs: Sequence[BranchSpec], vocab: Vocabulary | None,
              n_classes: int, cfg: TrainConfig, bag_vocabs: Sequence[Vocabulary] = (),
              net: Network | None = None) -> Network:
    """Train from a seeded Gaussian initialisation (or continue ``net``).

    One generator, seeded by ``cfg.seed``, drives initialisation, shuffling
    and dropout masks, so a run is reproducible bit for bit.
    """
    if not docs:
        raise ValueError("empty training set")
    rng = np.random.default_rng(cfg.seed)
    if net is None:
        net = build_network(docs, specs, vocab, n_classes, cfg, bag_vocabs, rng=rng)
    inputs = prepare(net, docs)
    T = targets_for([d.labels for d in docs], net.n_classes)
    n = len(docs)
    lr = cfg.learning_rate
    for epoch in range(cfg.epochs):
        if cfg.lr_halve_every and epoch and epoch % cfg.lr_halve_every == 0:
            lr *= 0.5
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, cfg.minibatch):
            idx = order[s:s + cfg.minibatch]
            batch = inputs.take(idx)
            S, cache = forward(net, batch, rng)
            Tb = T[idx]
            with np.errstate(over="ignore", invalid="ignore"):
                loss = float(np.sum((S - Tb) ** 2))
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch + 1}; "
                                       f"learning rate {lr} is too large")
            total += loss
            g = backward(net, cache, Tb)
            _sgd_step(net, g, lr, cfg.l2)
        log.info("epoch %d  loss %.6f  lr %g", epoch + 1, total / n, lr)
    return net


def _sgd_step(net: Network, g, lr: float, l2: float) -> None:
    decay = 1.0 - 2.0 * lr * l2
    for br, rows, vals, gb in zip(net.branches, g.W_rows, g.W_vals, g.b):
        if decay != 1.0:
            br.W *= decay
        br.W[rows] -= lr * vals
        br.b -= lr * gb
    if decay != 1.0:
        net.top_W *= decay
    net.top_W -= lr * g.top_W
    net.top_b -= lr * g.top_b


def _region_text(ids: np.ndarray, vocab: Vocabulary) -> str:
    return " ".join("_" if i == OOV else vocab.entries[i] for i in ids)


def top_regions(net: Network, docs: Sequence[Document], branch: int, neuron: int,
                count: int) -> list[tuple[str, float]]:
    """Highest-activation regions for one neuron over a dataset.

    Ordered by activation, then document order, then region position.
    Padding / out-of-vocabulary slots print as ``_``.
    """
    if count <= 0:
        return []
    br = net.branches[branch]
    if br.spec.kind == "bag":
        raise ConfigError("bag branches have a single whole-document region")
    if not 0 <= neuron < br.spec.neurons:
        raise ConfigError(f"neuron {neuron} outside 0..{br.spec.neurons - 1}")
    V = len(br.vocab)
    acts, where = [], []
    for di, d in enumerate(docs):
        R = region_matrix(d.token_ids, br.spec.region, V)
        a = conv_forward(br.W[:, neuron:neuron + 1], br.b[neuron:neuron + 1], R)[:, 0]
        acts.append(a)
        where.append(np.column_stack([np.full(len(a), di), np.arange(len(a))]))
    if not acts:
        return []
    acts = np.concatenate(acts)
    where = np.concatenate(where)
    order = np.lexsort((where[:, 1], where[:, 0], -acts))[:count]
    out = []
    for j in order:
        di, ri = where[j]
        ids = region_tokens(docs[di].token_ids, br.spec.region, V)[ri]
        out.append((_region_text(ids, br.vocab), float(acts[j])))
    return out
