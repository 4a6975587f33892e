"""Flat ``key=value`` experiment configuration.

Lines are ``key=value``; ``#`` starts a comment. Parallel branches repeat the
``branch.<i>.`` prefix. Any key may be swept by a ``grid.<key>=v1|v2|...`` line;
the grid is the cartesian product of the sweeps in file order, with the last
swept key varying fastest. Relative paths resolve against the config file.

Recognised keys::

    train test vocab vocab_size lowercase stopwords drop_numbers classes
    model model_type (cnn | linear | nblm)
    learning_rate l2 epochs minibatch dropout seed dev_fraction
    lr_halve_every init_scale
    branch.<i>.kind (seq | bow | bag) .region .stride .variable_stride .pad
    branch.<i>.neurons .pooling (max | average) .units .response_norm
    branch.<i>.ngrams .nb_weight .ngram_vocab .ngram_vocab_size     (bag)
    linear.scheme linear.ngrams linear.loss linear.vocab linear.vocab_size
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

from .modelfile import parse_bool
from .nn import BranchSpec, ConfigError, PoolingSpec
from .regions import RegionConfig
from .text import TokenizerOptions, load_stopwords
from .train import TrainConfig

PATH_KEYS = {"train", "test", "vocab", "model", "stopwords", "linear.vocab"}
_TRAIN_KEYS = {
    "learning_rate": float, "l2": float, "epochs": int, "minibatch": int,
    "dropout": float, "seed": int, "dev_fraction": float, "lr_halve_every": int,
    "init_scale": float,
}


def parse_config_text(text: str) -> tuple[dict[str, str], list[tuple[str, list[str]]]]:
    values: dict[str, str] = {}
    grid: list[tuple[str, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("grid."):
            cands = [c.strip() for c in val.split("|")]
            if not cands or any(c == "" for c in cands):
                raise ConfigError(f"config line {lineno}: empty grid candidate")
            grid.append((key[5:], cands))
        else:
            values[key] = val
    return values, grid


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.split(",") if x.strip())


@dataclass
class ExperimentConfig:
    values: dict[str, str]
    grid: list[tuple[str, list[str]]] = field(default_factory=list)
    base: Path = Path(".")

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        path = Path(path)
        try:
            text = path.read_text("utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        values, grid = parse_config_text(text)
        return cls(values, grid, path.parent)

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.values:
            raise ConfigError(f"missing config key {key!r}")
        return self.values[key]

    def path(self, key: str, default: str | None = None) -> Path | None:
        v = self.values.get(key, default)
        if v is None or v == "":
            return None
        p = Path(v)
        return p if p.is_absolute() else self.base / p

    def with_overrides(self, overrides: dict[str, str]) -> ExperimentConfig:
        return ExperimentConfig({**self.values, **overrides}, [], self.base)

    # typed views ---------------------------------------------------------

    @property
    def model_type(self) -> str:
        t = self.values.get("model_type", "cnn")
        if t not in ("cnn", "linear", "nblm"):
            raise ConfigError(f"unknown model_type {t!r}")
        return t

    def tokenizer(self) -> TokenizerOptions:
        sw = self.path("stopwords")
        return TokenizerOptions(
            lowercase=parse_bool(self.values.get("lowercase", "true")),
            stopwords=load_stopwords(sw) if sw else None,
            drop_numbers=parse_bool(self.values.get("drop_numbers", "false")),
        )

    def tokenizer_meta(self) -> dict[str, str]:
        return {"tokenizer.lowercase": self.values.get("lowercase", "true"),
                "tokenizer.drop_numbers": self.values.get("drop_numbers", "false"),
                "tokenizer.stopwords": str(self.path("stopwords") or "")}

    def train_config(self) -> TrainConfig:
        kw = {}
        try:
            for k, typ in _TRAIN_KEYS.items():
                if k in self.values:
                    kw[k] = typ(self.values[k])
        except ValueError as e:
            raise ConfigError(f"bad training parameter: {e}") from e
        return TrainConfig(**kw)

    def branch_ids(self) -> list[int]:
        ids = sorted({int(k.split(".")[1]) for k in self.values if k.startswith("branch.")})
        if ids != list(range(len(ids))):
            raise ConfigError("branch indices must be 0..n-1")
        return ids

    def branch(self, i: int) -> BranchSpec:
        p = f"branch.{i}."
        g = lambda k, d=None: self.values.get(p + k, d)
        try:
            kind = g("kind", "seq")
            pooling = PoolingSpec(g("pooling", "max"), int(g("units", "1")))
            neurons = int(g("neurons", "100"))
            rn = parse_bool(g("response_norm", "false"))
            if kind == "bag":
                return BranchSpec(kind, neurons, None, pooling, rn, _ints(g("ngrams", "1,2,3")),
                                  parse_bool(g("nb_weight", "true")))
            region = RegionConfig(int(g("region", "3")), int(g("stride", "1")), kind,
                                  parse_bool(g("variable_stride", "false")),
                                  parse_bool(g("pad", "true")))
            return BranchSpec(kind, neurons, region, pooling, rn)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"branch {i}: {e}") from e

    def branches(self) -> list[BranchSpec]:
        ids = self.branch_ids()
        if not ids and self.model_type == "cnn":
            raise ConfigError("a cnn model needs at least one branch.<i>.* entry")
        return [self.branch(i) for i in ids]

    def ngram_vocab_path(self, i: int) -> Path:
        p = self.path(f"branch.{i}.ngram_vocab")
        if p is None:
            raise ConfigError(f"bag branch {i} needs branch.{i}.ngram_vocab")
        return p

    def grid_points(self) -> list[dict[str, str]]:
        if not self.grid:
            return [{}]
        keys = [k for k, _ in self.grid]
        return [dict(zip(keys, combo)) for combo in itertools.product(*(c for _, c in self.grid))]

    def validate_grid(self) -> None:
        for point in self.grid_points():
            c = self.with_overrides(point)
            c.train_config()
            c.branches()
