"""Config-driven fitting, scoring and holdout model selection."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import BowScheme, LinearModel, linear_train, nb_lm_train, vectorize
from .config import ExperimentConfig
from .modelfile import load_model, parse_bool, save_linear, save_network
from .nn import ConfigError, Network, predict_scores
from .text import (DataError, Document, TokenizerOptions, Vocabulary, build_ngram_vocabulary,
                   build_vocabulary, encode, load_stopwords, read_dataset, tokenize)
from .train import sgd_train

log = logging.getLogger(__name__)

Row = tuple[tuple[int, ...], list[str]]   # (labels, tokens)


def load_rows(path: Path | None, opts: TokenizerOptions) -> list[Row]:
    if path is None:
        raise ConfigError("no dataset path configured")
    try:
        raw = read_dataset(path)
    except OSError as e:
        raise DataError(f"cannot read dataset {path}: {e}") from e
    return [(labels, tokenize(text, opts)) for labels, text in raw]


def n_classes_for(cfg: ExperimentConfig, rows: Sequence[Row]) -> int:
    if "classes" in cfg.values:
        return int(cfg.values["classes"])
    top = max((max(ls) for ls, _ in rows), default=0)
    return max(top + 1, 2)


def build_vocabularies(cfg: ExperimentConfig) -> list[Path]:
    """Write every vocabulary the config needs; returns the paths written."""
    rows = load_rows(cfg.path("train"), cfg.tokenizer())
    corpus = [t for _, t in rows]
    written = []
    size = int(cfg.get("vocab_size", "30000"))
    if cfg.model_type == "cnn":
        specs = cfg.branches()
        if any(s.kind != "bag" for s in specs):
            p = cfg.path("vocab")
            if p is None:
                raise ConfigError("missing config key 'vocab'")
            build_vocabulary(corpus, size).save(p)
            written.append(p)
        for i, s in enumerate(specs):
            if s.kind == "bag":
                p = cfg.ngram_vocab_path(i)
                n = int(cfg.get(f"branch.{i}.ngram_vocab_size", str(size)))
                build_ngram_vocabulary(corpus, s.ngrams, n).save(p)
                written.append(p)
    else:
        p = cfg.path("linear.vocab") or cfg.path("vocab")
        if p is None:
            raise ConfigError("missing config key 'linear.vocab'")
        ngrams = tuple(int(x) for x in cfg.get("linear.ngrams", "1").split(","))
        n = int(cfg.get("linear.vocab_size", str(size)))
        build_ngram_vocabulary(corpus, ngrams, n).save(p)
        written.append(p)
    return written


def _load_vocab(p: Path | None, what: str) -> Vocabulary:
    if p is None:
        raise ConfigError(f"missing {what} path")
    try:
        return Vocabulary.load(p)
    except OSError as e:
        raise DataError(f"cannot read vocabulary {p}: {e}; run build-vocab first") from e


@dataclass
class Fitted:
    """A trained network or linear model plus what is needed to save it."""

    model: Network | LinearModel
    scheme: BowScheme | None
    vocab_paths: list[Path]

    def scores(self, rows: Sequence[Row]) -> np.ndarray:
        return score_rows(self.model, self.scheme, rows)

    def save(self, path: Path) -> None:
        if isinstance(self.model, Network):
            save_network(self.model, path, self.vocab_paths)
        else:
            save_linear(self.model, self.scheme, path, self.vocab_paths[0])


def score_rows(model, scheme: BowScheme | None, rows: Sequence[Row]) -> np.ndarray:
    if isinstance(model, Network):
        docs = to_documents(model, rows)
        return predict_scores(model, docs)
    if not rows:
        return np.zeros((0, max(model.n_classes, 1)))
    return model.scores(vectorize([t for _, t in rows], scheme))


def to_documents(net: Network, rows: Sequence[Row]) -> list[Document]:
    words = next((br.vocab for br in net.branches if br.spec.kind != "bag"), None)
    if words is None:
        return [Document(np.zeros(0, dtype=np.int64), tuple(ls), tuple(t)) for ls, t in rows]
    return [encode(t, words, ls) for ls, t in rows]


def fit(cfg: ExperimentConfig, rows: Sequence[Row]) -> Fitted:
    if not rows:
        raise DataError("empty training set")
    tc = cfg.train_config()
    K = n_classes_for(cfg, rows)
    meta = cfg.tokenizer_meta()
    if cfg.model_type == "cnn":
        specs = cfg.branches()
        vp = cfg.path("vocab")
        vocab = _load_vocab(vp, "vocab") if any(s.kind != "bag" for s in specs) else None
        paths, bags = [], []
        for i, s in enumerate(specs):
            if s.kind == "bag":
                p = cfg.ngram_vocab_path(i)
                bags.append(_load_vocab(p, f"branch.{i}.ngram_vocab"))
                paths.append(p)
            else:
                paths.append(vp)
        if vocab is not None:
            docs = [encode(t, vocab, ls) for ls, t in rows]
        else:
            docs = [Document(np.zeros(0, dtype=np.int64), tuple(ls), tuple(t)) for ls, t in rows]
        net = sgd_train(docs, specs, vocab, K, tc, bags)
        net.meta.update(meta)
        return Fitted(net, None, paths)
    p = cfg.path("linear.vocab") or cfg.path("vocab")
    vocab = _load_vocab(p, "linear.vocab")
    ngrams = tuple(int(x) for x in cfg.get("linear.ngrams", "1").split(","))
    corpus = [t for _, t in rows]
    labels = [ls if len(ls) > 1 else ls[0] for ls, _ in rows]
    sgd = dict(epochs=tc.epochs, learning_rate=tc.learning_rate, minibatch=tc.minibatch,
               seed=tc.seed)
    if cfg.model_type == "nblm":
        if K != 2:
            raise ConfigError("nblm is a binary classifier")
        model, scheme = nb_lm_train(corpus, labels, vocab, ngrams=ngrams, l2=tc.l2, **sgd)
    else:
        scheme = BowScheme(cfg.get("linear.scheme", "binary_unit"), vocab, ngrams)
        if scheme.kind == "nb_binary":
            raise ConfigError("use model_type=nblm for NB-weighted vectors")
        model = linear_train(vectorize(corpus, scheme), labels, K, l2=tc.l2,
                             loss=cfg.get("linear.loss", "logistic"), **sgd)
    model.meta.update(meta)
    return Fitted(model, scheme, [p])


def dev_error(scores: np.ndarray, rows: Sequence[Row]) -> float:
    """Fraction of documents whose top-scoring class is not a gold class."""
    if not rows:
        raise DataError("empty development set")
    pred = np.argmax(scores, axis=1)
    return float(np.mean([p not in ls for p, (ls, _) in zip(pred, rows)]))


def split_dev(n: int, dev_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (train, dev) index split; dev gets round(n*fraction), at least 1."""
    perm = np.random.default_rng(seed).permutation(n)
    n_dev = int(round(n * dev_fraction))
    if dev_fraction > 0:
        n_dev = min(max(n_dev, 1), n - 1)
    return np.sort(perm[n_dev:]), np.sort(perm[:n_dev])


@dataclass
class Selection:
    points: list[dict[str, str]]
    dev_errors: list[float]
    best: int
    dev_fraction: float
    fitted: Fitted

    @property
    def best_point(self) -> dict[str, str]:
        return self.points[self.best]


def select(cfg: ExperimentConfig, rows: Sequence[Row], threads: int = 1) -> Selection:
    """Holdout selection over the config grid, then retrain the winner on all rows."""
    points = cfg.grid_points()
    if not points:
        raise ConfigError("empty grid")
    cfg.validate_grid()
    tc = cfg.train_config()
    tr_idx, dev_idx = split_dev(len(rows), tc.dev_fraction, tc.seed)
    if len(dev_idx) == 0:
        raise ConfigError("model selection needs dev_fraction > 0")
    tr = [rows[i] for i in tr_idx]
    dev = [rows[i] for i in dev_idx]

    def run(point: dict[str, str]) -> float:
        f = fit(cfg.with_overrides(point), tr)
        return dev_error(f.scores(dev), dev)

    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            errors = list(ex.map(run, points))
    else:
        errors = [run(p) for p in points]
    for p, e in zip(points, errors):
        log.info("grid %s  dev error %.4f", p, e)
    best = int(np.argmin(errors))
    fitted = fit(cfg.with_overrides(points[best]), rows)
    return Selection(points, errors, best, tc.dev_fraction, fitted)


def load_for_prediction(path: Path):
    """(model, scheme or None, tokenizer options) from a model file."""
    obj = load_model(path)
    if isinstance(obj, tuple):
        model, scheme = obj
    else:
        model, scheme = obj, None
    m = model.meta
    sw = m.get("tokenizer.stopwords", "")
    opts = TokenizerOptions(lowercase=parse_bool(m.get("tokenizer.lowercase", "true")),
                            stopwords=load_stopwords(sw) if sw else None,
                            drop_numbers=parse_bool(m.get("tokenizer.drop_numbers", "false")))
    return model, scheme, opts
