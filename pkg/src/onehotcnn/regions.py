"""Sparse region vectors for seq- and bow-convolution."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .text import OOV


@dataclass(frozen=True)
class RegionConfig:
    size: int
    stride: int = 1
    representation: str = "seq"
    variable_stride: bool = False
    pad: bool = True

    def __post_init__(self) -> None:
        if self.size < 1 or self.stride < 1:
            raise ValueError("region size and stride must be >= 1")
        if self.representation not in ("seq", "bow"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.variable_stride and self.representation != "bow":
            raise ValueError("variable stride applies to bow regions only")

    def dim(self, vocab_size: int) -> int:
        return self.size * vocab_size if self.representation == "seq" else vocab_size


@dataclass(frozen=True)
class SparseVector:
    dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        if idx.shape != val.shape:
            raise ValueError("indices/values length mismatch")
        if len(idx) and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.dim):
            raise ValueError("indices must be strictly increasing and within dim")

    @classmethod
    def from_pairs(cls, dim: int, pairs: Sequence[tuple[int, float]]) -> SparseVector:
        pairs = sorted(pairs)
        return cls(dim, np.array([i for i, _ in pairs], dtype=np.int64),
                   np.array([v for _, v in pairs], dtype=np.float64))

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (self.dim == other.dim and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def to_dense(self) -> np.ndarray:
        x = np.zeros(self.dim)
        x[self.indices] = self.values
        return x


def pad(token_ids: np.ndarray, p: int) -> np.ndarray:
    if p < 1:
        raise ValueError("p must be >= 1")
    ids = np.asarray(token_ids, dtype=np.int64)
    fill = np.full(p - 1, OOV, dtype=np.int64)
    return np.concatenate([fill, ids, fill])


def _windows(token_ids: np.ndarray, cfg: RegionConfig) -> np.ndarray:
    """Token ids of every region, shape (n_regions, p); OOV marks empty slots.

    A sequence shorter than one region is right-filled with sentinels so every
    document yields at least one region.
    """
    ids = pad(token_ids, cfg.size) if cfg.pad else np.asarray(token_ids, dtype=np.int64)
    p = cfg.size
    if len(ids) < p:
        ids = np.concatenate([ids, np.full(p - len(ids), OOV, dtype=np.int64)])
    starts = np.arange(0, len(ids) - p + 1, cfg.stride)
    return ids[starts[:, None] + np.arange(p)[None, :]]


def region_count(n_tokens: int, cfg: RegionConfig) -> int:
    """Number of regions enumerated before variable-stride suppression."""
    length = n_tokens + 2 * (cfg.size - 1) if cfg.pad else n_tokens
    length = max(length, cfg.size)
    return (length - cfg.size) // cfg.stride + 1


def _seq_csr_parts(win: np.ndarray, vocab_size: int):
    p = win.shape[1]
    valid = win >= 0
    cols = np.arange(p)[None, :] * vocab_size + win
    indptr = np.concatenate([[0], np.cumsum(valid.sum(axis=1))])
    indices = cols[valid]
    return indptr, indices, np.ones(len(indices))


def _bow_csr_parts(win: np.ndarray, vocab_size: int):
    n = win.shape[0]
    rows = np.broadcast_to(np.arange(n)[:, None], win.shape)
    valid = win >= 0
    key = rows[valid] * vocab_size + win[valid]
    uniq, counts = np.unique(key, return_counts=True)
    r = uniq // vocab_size if vocab_size else uniq
    cols = uniq - r * vocab_size
    indptr = np.concatenate([[0], np.cumsum(np.bincount(r, minlength=n))])
    return indptr, cols, counts.astype(np.float64)


def _distinct_runs(indptr: np.ndarray, cols: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Rows that differ from the row before them (row 0 always kept)."""
    keep = [0]
    for i in range(1, len(indptr) - 1):
        a, b = indptr[i - 1], indptr[i]
        c, d = indptr[i], indptr[i + 1]
        if not (b - a == d - c and np.array_equal(cols[a:b], cols[c:d])
                and np.array_equal(values[a:b], values[c:d])):
            keep.append(i)
    return np.asarray(keep, dtype=np.int64)


def _take_rows(indptr, cols, values, keep):
    lens = np.diff(indptr)[keep]
    sel = np.concatenate([np.arange(indptr[i], indptr[i + 1]) for i in keep]).astype(np.int64)
    return np.concatenate([[0], np.cumsum(lens)]), cols[sel], values[sel]


def _emitted(token_ids: np.ndarray, cfg: RegionConfig, vocab_size: int):
    win = _windows(token_ids, cfg)
    if cfg.representation == "seq":
        return win, _seq_csr_parts(win, vocab_size)
    parts = _bow_csr_parts(win, vocab_size)
    if cfg.variable_stride and win.shape[0] > 1:
        keep = _distinct_runs(*parts)
        return win[keep], _take_rows(*parts, keep)
    return win, parts


def region_matrix(token_ids: np.ndarray, cfg: RegionConfig, vocab_size: int) -> sp.csr_matrix:
    """All region vectors of one document as rows of a CSR matrix."""
    _, (indptr, indices, values) = _emitted(token_ids, cfg, vocab_size)
    n = len(indptr) - 1
    return sp.csr_matrix((values, indices, indptr), shape=(n, cfg.dim(vocab_size)))


def _rows(m: sp.csr_matrix) -> list[SparseVector]:
    return [SparseVector(m.shape[1], m.indices[m.indptr[i]:m.indptr[i + 1]].copy(),
                         m.data[m.indptr[i]:m.indptr[i + 1]].copy())
            for i in range(m.shape[0])]


def seq_regions(token_ids: np.ndarray, cfg: RegionConfig, vocab_size: int) -> list[SparseVector]:
    if cfg.representation != "seq":
        raise ValueError("seq_regions needs a seq RegionConfig")
    return _rows(region_matrix(token_ids, cfg, vocab_size))


def bow_regions(token_ids: np.ndarray, cfg: RegionConfig, vocab_size: int) -> list[SparseVector]:
    if cfg.representation != "bow":
        raise ValueError("bow_regions needs a bow RegionConfig")
    return _rows(region_matrix(token_ids, cfg, vocab_size))


def region_tokens(token_ids: np.ndarray, cfg: RegionConfig, vocab_size: int) -> np.ndarray:
    """Token ids behind each emitted region, shape (n_regions, p)."""
    return _emitted(token_ids, cfg, vocab_size)[0]


def stack_regions(regions: Sequence[SparseVector], dim: int) -> sp.csr_matrix:
    if any(r.dim != dim for r in regions):
        raise ValueError("region dimension does not match layer input dimension")
    indptr = np.concatenate([[0], np.cumsum([len(r) for r in regions])]).astype(np.int64)
    if regions:
        indices = np.concatenate([r.indices for r in regions])
        data = np.concatenate([r.values for r in regions])
    else:
        indices, data = np.zeros(0, dtype=np.int64), np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(regions), dim))
