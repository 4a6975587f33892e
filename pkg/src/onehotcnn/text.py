"""Tokenization, vocabularies, document encoding and n-gram extraction.

Tokenizer rules (the exact behaviour, not a claim about any reference tool):

* Emoticons from ``data/emoticons.txt`` are recognised first, on the raw
  text, when they stand alone: preceded by start-of-text or whitespace and
  followed by end-of-text, whitespace or trailing ``.,!?;`` characters.
  They are emitted verbatim (never lowercased).
* The remaining text is lowercased (if requested) and split into maximal runs
  of letters/digits; an apostrophe joins two such runs (``don't``). Every
  other character is a delimiter and is dropped.
* Stopwords and, optionally, pure-digit tokens are removed afterwards.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

OOV = -1
NGRAM_SEP = "▸"
VOCAB_HEADER = "tv1"

_WORD_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_NUMBER_RE = re.compile(r"^\d+$")


class DataError(ValueError):
    """Malformed dataset or vocabulary file."""


@lru_cache(maxsize=1)
def load_emoticons() -> tuple[str, ...]:
    text = resources.files("onehotcnn").joinpath("data/emoticons.txt").read_text("utf-8")
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return tuple(out)


@lru_cache(maxsize=1)
def _emoticon_re() -> re.Pattern:
    # longest first so ":-)" wins over ":-"
    alts = sorted(load_emoticons(), key=len, reverse=True)
    body = "|".join(re.escape(e) for e in alts)
    return re.compile(r"(?<!\S)(" + body + r")(?=[.,!?;]*(?:\s|$))")


@dataclass(frozen=True)
class TokenizerOptions:
    lowercase: bool = True
    stopwords: frozenset[str] | None = None
    drop_numbers: bool = False


def _words(chunk: str, lowercase: bool) -> list[str]:
    if lowercase:
        chunk = chunk.lower()
    return _WORD_RE.findall(chunk)


def tokenize(text: str, opts: TokenizerOptions = TokenizerOptions()) -> list[str]:
    tokens: list[str] = []
    pos = 0
    for m in _emoticon_re().finditer(text):
        tokens.extend(_words(text[pos:m.start()], opts.lowercase))
        tokens.append(m.group(1))
        pos = m.end()
    tokens.extend(_words(text[pos:], opts.lowercase))
    if opts.stopwords:
        tokens = [t for t in tokens if t not in opts.stopwords]
    if opts.drop_numbers:
        tokens = [t for t in tokens if not _NUMBER_RE.match(t)]
    return tokens


def load_stopwords(path: str | Path) -> frozenset[str]:
    words = Path(path).read_text("utf-8").split()
    return frozenset(words)


def _byte_key(s: str) -> bytes:
    return s.encode("utf-8")


@dataclass(frozen=True)
class Vocabulary:
    """Immutable token <-> index map. Indices follow UTF-8 byte order."""

    entries: tuple[str, ...]
    max_size: int = 30000
    index_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "index_of", {t: i for i, t in enumerate(self.entries)})
        if len(self.index_of) != len(self.entries):
            raise ValueError("duplicate vocabulary entries")
        if len(self.entries) > self.max_size:
            raise ValueError("vocabulary larger than max_size")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.index_of

    def get(self, token: str) -> int:
        return self.index_of.get(token, OOV)

    def order(self, i: int) -> int:
        """n-gram order of entry ``i`` (1 for plain words)."""
        return self.entries[i].count(NGRAM_SEP) + 1

    def digest(self) -> str:
        h = hashlib.sha256()
        for t in self.entries:
            h.update(t.encode("utf-8") + b"\n")
        return h.hexdigest()[:16]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(f"{VOCAB_HEADER} {len(self.entries)}\n")
            for t in self.entries:
                f.write(t + "\n")

    @classmethod
    def load(cls, path: str | Path) -> Vocabulary:
        lines = Path(path).read_text("utf-8").split("\n")
        head = lines[0].split()
        if len(head) != 2 or head[0] != VOCAB_HEADER:
            raise DataError(f"{path}: missing '{VOCAB_HEADER} <size>' header")
        size = int(head[1])
        entries = tuple(lines[1:1 + size])
        if len(entries) != size:
            raise DataError(f"{path}: expected {size} entries, found {len(entries)}")
        return cls(entries, max_size=max(size, 1))


def _select(counts: Counter, max_size: int) -> tuple[str, ...]:
    if max_size < 0:
        raise ValueError("max_size must be >= 0")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], _byte_key(kv[0])))
    chosen = [t for t, _ in ranked[:max_size]]
    return tuple(sorted(chosen, key=_byte_key))


def build_vocabulary(corpus: Iterable[Sequence[str]], max_size: int = 30000) -> Vocabulary:
    counts: Counter = Counter()
    for tokens in corpus:
        counts.update(tokens)
    return Vocabulary(_select(counts, max_size), max_size=max(max_size, 1))


def extract_ngrams(tokens: Sequence[str], n_set: Iterable[int]) -> list[str]:
    out: list[str] = []
    for n in sorted(set(n_set)):
        if n < 1:
            raise ValueError("n-gram order must be >= 1")
        for i in range(len(tokens) - n + 1):
            out.append(NGRAM_SEP.join(tokens[i:i + n]))
    return out


def build_ngram_vocabulary(corpus: Iterable[Sequence[str]], n_set: Iterable[int],
                           max_size: int = 30000) -> Vocabulary:
    n_set = tuple(n_set)
    counts: Counter = Counter()
    for tokens in corpus:
        counts.update(extract_ngrams(tokens, n_set))
    return Vocabulary(_select(counts, max_size), max_size=max(max_size, 1))


@dataclass(frozen=True)
class Document:
    """Encoded document. ``tokens`` is kept for n-gram features and display."""

    token_ids: np.ndarray
    labels: tuple[int, ...] = ()
    tokens: tuple[str, ...] | None = None

    @property
    def label(self) -> int:
        return self.labels[0]

    def __len__(self) -> int:
        return len(self.token_ids)


def encode(tokens: Sequence[str], vocab: Vocabulary, labels: Sequence[int] = ()) -> Document:
    ids = np.fromiter((vocab.index_of.get(t, OOV) for t in tokens), dtype=np.int64,
                      count=len(tokens))
    return Document(ids, tuple(labels), tuple(tokens))


def parse_dataset_line(line: str, lineno: int = 0) -> tuple[tuple[int, ...], str]:
    if "\t" not in line:
        raise DataError(f"line {lineno}: expected 'label<TAB>text'")
    head, text = line.split("\t", 1)
    try:
        labels = tuple(int(x) for x in head.split(",") if x.strip() != "")
    except ValueError as e:
        raise DataError(f"line {lineno}: bad label field {head!r}") from e
    if not labels or min(labels) < 0:
        raise DataError(f"line {lineno}: bad label field {head!r}")
    return labels, text


def read_dataset(path: str | Path) -> list[tuple[tuple[int, ...], str]]:
    """Read ``label[,label...]<TAB>text`` lines."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            out.append(parse_dataset_line(line, lineno))
    return out


def write_dataset(path: str | Path, rows: Iterable[tuple[Sequence[int], str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for labels, text in rows:
            f.write(",".join(str(c) for c in labels) + "\t" + text + "\n")
