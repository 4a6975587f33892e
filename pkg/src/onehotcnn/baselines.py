"""Bag-of-n-gram baselines: vector schemes, NB-weights and linear classifiers."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .regions import SparseVector
from .text import Vocabulary, extract_ngrams

SCHEMES = ("log_count_unit", "binary_unit", "nb_binary")


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class BowScheme:
    kind: str
    vocab: Vocabulary
    ngrams: tuple[int, ...] = (1,)
    nb_weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in SCHEMES:
            raise ValueError(f"unknown bow scheme {self.kind!r}")
        if self.kind == "nb_binary":
            if self.nb_weights is None or len(self.nb_weights) != len(self.vocab):
                raise ValueError("nb_binary needs one NB-weight per vocabulary entry")


def _counts(tokens: Sequence[str], vocab: Vocabulary, ngrams) -> tuple[np.ndarray, np.ndarray]:
    ids = [vocab.get(g) for g in extract_ngrams(tokens, ngrams)]
    ids = np.array([i for i in ids if i >= 0], dtype=np.int64)
    return np.unique(ids, return_counts=True)


def bow_vectorize(tokens: Sequence[str], scheme: BowScheme) -> SparseVector:
    idx, cnt = _counts(tokens, scheme.vocab, scheme.ngrams)
    dim = len(scheme.vocab)
    if scheme.kind == "log_count_unit":
        val = np.log1p(cnt.astype(np.float64))
    else:
        val = np.ones(len(idx))
    if scheme.kind == "nb_binary":
        val = val * scheme.nb_weights[idx]
        keep = val != 0
        idx, val = idx[keep], val[keep]
    elif len(val):
        val = val / np.linalg.norm(val)
    return SparseVector(dim, idx, val)


def vectorize(corpus: Sequence[Sequence[str]], scheme: BowScheme) -> sp.csr_matrix:
    rows = [bow_vectorize(t, scheme) for t in corpus]
    indptr = np.concatenate([[0], np.cumsum([len(r) for r in rows])]).astype(np.int64)
    indices = np.concatenate([r.indices for r in rows]) if rows else np.zeros(0, np.int64)
    data = np.concatenate([r.values for r in rows]) if rows else np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(rows), len(scheme.vocab)))


def presence_matrix(corpus: Sequence[Sequence[str]], vocab: Vocabulary,
                    ngrams: Sequence[int]) -> sp.csr_matrix:
    scheme = BowScheme("binary_unit", vocab, tuple(ngrams))
    X = vectorize(corpus, scheme)
    X.data[:] = 1.0
    return X


def nb_weights(presence: sp.csr_matrix, labels: Sequence[int], alpha: float = 1.0) -> np.ndarray:
    """log P(f|y=1)/P(f|y=0) with P(f|c) = (alpha + docs_c(f)) / (2 alpha + docs_c).

    ``presence`` is a binary document x feature matrix; class 1 is the
    positive class.
    """
    y = np.asarray(labels)
    if set(np.unique(y).tolist()) != {0, 1}:
        raise ValueError("NB-weights need a binary corpus with both classes present")
    X = sp.csr_matrix(presence, dtype=np.float64, copy=True)
    X.data[:] = 1.0
    pos = np.asarray(X[y == 1].sum(axis=0)).ravel()
    neg = np.asarray(X[y == 0].sum(axis=0)).ravel()
    n_pos, n_neg = int(np.sum(y == 1)), int(np.sum(y == 0))
    p = (alpha + pos) / (2 * alpha + n_pos)
    q = (alpha + neg) / (2 * alpha + n_neg)
    return np.log(p) - np.log(q)


@dataclass
class LinearModel:
    """One-vs-rest linear scorer. A binary task has a single row (class 1 vs 0)."""

    coef: np.ndarray
    intercept: np.ndarray
    l2: float = 0.0
    loss: str = "logistic"
    n_classes: int = 2
    meta: dict[str, str] = field(default_factory=dict)

    def decision_function(self, X: sp.spmatrix) -> np.ndarray:
        return np.asarray(X @ self.coef.T) + self.intercept

    def scores(self, X: sp.spmatrix) -> np.ndarray:
        """Per-class scores, (n, K); binary models report (-s, s)."""
        s = self.decision_function(X)
        if self.coef.shape[0] == 1 and self.n_classes == 2:
            return np.concatenate([-s, s], axis=1)
        return s

    def predict(self, X: sp.spmatrix) -> np.ndarray:
        return np.argmax(self.scores(X), axis=1)


def _signed_targets(labels, n_classes: int) -> np.ndarray:
    labels = [(l,) if np.isscalar(l) else tuple(l) for l in labels]
    if n_classes == 2 and all(len(l) == 1 for l in labels):
        return np.array([[1.0 if l[0] == 1 else -1.0] for l in labels])
    T = -np.ones((len(labels), n_classes))
    for i, ls in enumerate(labels):
        T[i, list(ls)] = 1.0
    return T


def linear_train(X: sp.spmatrix, labels, n_classes: int = 2, *, l2: float = 0.0,
                 loss: str = "logistic", epochs: int = 10, learning_rate: float = 0.1,
                 minibatch: int = 100, seed: int = 0) -> LinearModel:
    """Minimise mean loss + l2*|coef|^2 by seeded minibatch SGD from zero."""
    if loss not in ("logistic", "square"):
        raise ValueError(f"unknown loss {loss!r}")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    X = sp.csr_matrix(X, dtype=np.float64)
    T = _signed_targets(labels, n_classes)
    n, d = X.shape
    C = T.shape[1]
    coef, bias = np.zeros((C, d)), np.zeros(C)
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        order = rng.permutation(n) if minibatch < n else np.arange(n)
        for s in range(0, n, minibatch):
            idx = order[s:s + minibatch]
            Xb, Tb = X[idx], T[idx]
            S = np.asarray(Xb @ coef.T) + bias
            if loss == "square":
                G = 2.0 * (S - Tb)
            else:
                G = -Tb / (1.0 + np.exp(np.clip(Tb * S, -500, 500)))
            G /= len(idx)
            coef -= learning_rate * (np.asarray((Xb.T @ G).T) + 2.0 * l2 * coef)
            bias -= learning_rate * G.sum(axis=0)
        if not (np.all(np.isfinite(coef)) and np.all(np.isfinite(bias))):
            raise TrainingDiverged("linear model parameters became non-finite; "
                                   "lower the learning rate")
    return LinearModel(coef, bias, l2=l2, loss=loss, n_classes=n_classes)


def nb_lm_train(corpus: Sequence[Sequence[str]], labels: Sequence[int], vocab: Vocabulary, *,
                ngrams: Sequence[int] = (1, 2, 3), l2: float = 0.0, **sgd) -> tuple[LinearModel, BowScheme]:
    """Logistic regression over NB-weighted binary bag-of-n-gram vectors."""
    w = nb_weights(presence_matrix(corpus, vocab, ngrams), labels)
    scheme = BowScheme("nb_binary", vocab, tuple(ngrams), w)
    model = linear_train(vectorize(corpus, scheme), labels, 2, l2=l2, loss="logistic", **sgd)
    return model, scheme
