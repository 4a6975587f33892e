"""Sparse convolution network: layers, forward pass and exact gradients.

Convolution weights are held input-major, ``W.shape == (d, m)``, so a region's
pre-activation is a gather-and-sum over the rows named by its active indices.
Everything is float64.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .regions import RegionConfig, SparseVector, region_matrix, stack_regions
from .text import Document, Vocabulary, extract_ngrams


class ConfigError(ValueError):
    """Network or training configuration is inconsistent."""


@dataclass(frozen=True)
class PoolingSpec:
    kind: str = "max"
    units: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("max", "average"):
            raise ConfigError(f"unknown pooling kind {self.kind!r}")
        if self.units < 1:
            raise ConfigError("pooling units must be >= 1")


@dataclass(frozen=True)
class BranchSpec:
    """One convolution+pooling branch.

    ``kind`` is ``seq`` or ``bow`` (sliding regions over the word vocabulary) or
    ``bag``: the whole document is a single region, represented as a binary
    bag-of-n-gram vector over an n-gram vocabulary, optionally NB-weighted.
    A bag branch always pools with one unit.
    """

    kind: str
    neurons: int
    region: RegionConfig | None = None
    pooling: PoolingSpec = PoolingSpec()
    response_norm: bool = False
    ngrams: tuple[int, ...] = (1, 2, 3)
    nb_weight: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("seq", "bow", "bag"):
            raise ConfigError(f"unknown branch kind {self.kind!r}")
        if self.neurons < 1:
            raise ConfigError("neurons must be >= 1")
        if self.kind == "bag":
            if self.pooling.units != 1:
                raise ConfigError("bag branch has one region; pooling units must be 1")
        elif self.region is None or self.region.representation != self.kind:
            raise ConfigError(f"{self.kind} branch needs a matching RegionConfig")

    @property
    def width(self) -> int:
        return self.pooling.units * self.neurons


@dataclass
class Branch:
    spec: BranchSpec
    vocab: Vocabulary
    W: np.ndarray
    b: np.ndarray
    nb: np.ndarray | None = None

    @property
    def dim(self) -> int:
        if self.spec.kind == "bag":
            return len(self.vocab)
        return self.spec.region.dim(len(self.vocab))

    def regions(self, doc: Document) -> sp.csr_matrix:
        if self.spec.kind != "bag":
            return region_matrix(doc.token_ids, self.spec.region, len(self.vocab))
        return bag_vector(doc, self.vocab, self.spec.ngrams, self.nb)


def bag_vector(doc: Document, ngram_vocab: Vocabulary, ngrams: Sequence[int],
               nb: np.ndarray | None = None) -> sp.csr_matrix:
    """Binary (optionally NB-weighted) bag-of-n-gram vector as a 1-row CSR."""
    if doc.tokens is None:
        raise ConfigError("bag branch needs documents that keep their tokens")
    ids = {ngram_vocab.get(g) for g in extract_ngrams(doc.tokens, ngrams)}
    ids.discard(-1)
    idx = np.array(sorted(ids), dtype=np.int64)
    val = np.ones(len(idx)) if nb is None else nb[idx]
    nz = val != 0
    idx, val = idx[nz], val[nz]
    return sp.csr_matrix((val, idx, [0, len(idx)]), shape=(1, len(ngram_vocab)))


@dataclass
class Network:
    branches: list[Branch]
    top_W: np.ndarray
    top_b: np.ndarray
    dropout: float = 0.0
    seed: int = 0
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout rate must be in [0, 1)")
        width = sum(br.spec.width for br in self.branches)
        if self.top_W.shape != (len(self.top_b), width):
            raise ConfigError(f"top layer shape {self.top_W.shape} does not match "
                              f"{len(self.top_b)} classes x {width} features")
        for br in self.branches:
            if br.W.shape != (br.dim, br.spec.neurons) or br.b.shape != (br.spec.neurons,):
                raise ConfigError("convolution weights do not match branch configuration")

    @property
    def n_classes(self) -> int:
        return len(self.top_b)

    def weights(self) -> list[np.ndarray]:
        return [br.W for br in self.branches] + [self.top_W]

    def parameters(self) -> list[np.ndarray]:
        out = []
        for br in self.branches:
            out += [br.W, br.b]
        return out + [self.top_W, self.top_b]

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())


def init_network(specs: Sequence[BranchSpec], vocab: Vocabulary | None, n_classes: int, *,
                 seed: int = 0, dropout: float = 0.0, init_scale: float = 0.01,
                 bag_vocabs: Sequence[Vocabulary] = (), nb_weights: Sequence[np.ndarray | None] = (),
                 rng: np.random.Generator | None = None) -> Network:
    """Gaussian(0, init_scale) weights, zero biases.

    ``bag_vocabs`` / ``nb_weights`` are consumed in order by the bag branches.
    """
    if n_classes < 1:
        raise ConfigError("need at least one class")
    rng = np.random.default_rng(seed) if rng is None else rng
    bags = iter(zip(bag_vocabs, nb_weights) if nb_weights else ((v, None) for v in bag_vocabs))
    branches = []
    for spec in specs:
        nb = None
        if spec.kind == "bag":
            try:
                v, nb = next(bags)
            except StopIteration:
                raise ConfigError("bag branch without an n-gram vocabulary") from None
            if spec.nb_weight and nb is None:
                raise ConfigError("NB-weighted bag branch needs NB weights")
            if not spec.nb_weight:
                nb = None
        else:
            if vocab is None:
                raise ConfigError("seq/bow branch needs a word vocabulary")
            v = vocab
        br = Branch(spec, v, np.empty((0, 0)), np.zeros(spec.neurons), nb)
        br.W = rng.normal(0.0, init_scale, size=(br.dim, spec.neurons))
        branches.append(br)
    width = sum(s.width for s in specs)
    top_W = rng.normal(0.0, init_scale, size=(n_classes, width))
    return Network(branches, top_W, np.zeros(n_classes), dropout=dropout, seed=seed)


# ---------------------------------------------------------------- layers

def conv_forward(W: np.ndarray, b: np.ndarray,
                 regions: sp.csr_matrix | Sequence[SparseVector]) -> np.ndarray:
    """Rectified sparse convolution, ``max(0, r @ W + b)`` for every region row."""
    if not sp.issparse(regions):
        if any(r.dim != W.shape[0] for r in regions):
            raise ConfigError(f"region dim does not match layer input dim {W.shape[0]}")
        regions = stack_regions(regions, W.shape[0])
    if regions.shape[1] != W.shape[0]:
        raise ConfigError(f"region dim {regions.shape[1]} != layer input dim {W.shape[0]}")
    return np.maximum(regions @ W + b, 0.0)


@dataclass
class _Segments:
    sizes: np.ndarray        # (B*k,) rows per pooling segment
    starts: np.ndarray       # (B*k,) first row of each segment
    seg_of_row: np.ndarray   # (N,)
    nonempty: np.ndarray     # bool (B*k,)


def pool_segments(counts: np.ndarray, k: int) -> _Segments:
    """Partition each document's rows into k contiguous segments.

    Sizes differ by at most one, larger segments first; with fewer rows than
    units the trailing segments are empty.
    """
    counts = np.asarray(counts, dtype=np.int64)
    q, r = np.divmod(counts, k)
    sizes = (q[:, None] + (np.arange(k)[None, :] < r[:, None])).ravel()
    ends = np.cumsum(sizes)
    starts = ends - sizes
    seg_of_row = np.repeat(np.arange(len(sizes)), sizes)
    return _Segments(sizes, starts, seg_of_row, sizes > 0)


def _pool(H: np.ndarray, seg: _Segments, kind: str):
    out = np.zeros((len(seg.sizes), H.shape[1]))
    ne = seg.nonempty
    arg = None
    if not ne.any():
        return out, arg
    starts = seg.starts[ne]
    if kind == "max":
        out[ne] = np.maximum.reduceat(H, starts, axis=0)
        n = H.shape[0]
        hit = H == out[seg.seg_of_row]
        cand = np.where(hit, np.arange(n)[:, None], n)
        arg = np.minimum.reduceat(cand, starts, axis=0)
    else:
        out[ne] = np.add.reduceat(H, starts, axis=0) / seg.sizes[ne][:, None]
    return out, arg


def pool(features: np.ndarray, spec: PoolingSpec) -> np.ndarray:
    """Pool an L x m feature map down to k x m rows."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] < 1:
        raise ValueError("pooling needs at least one row")
    seg = pool_segments(np.array([features.shape[0]]), spec.units)
    return _pool(features, seg, spec.kind)[0]


def response_normalize(z: np.ndarray) -> np.ndarray:
    """Scale each row z by (1 + |z|^2)^(-1/2)."""
    z = np.asarray(z, dtype=np.float64)
    scale = 1.0 / np.sqrt(1.0 + np.sum(z * z, axis=-1, keepdims=True))
    return z * scale


def square_loss(scores: np.ndarray, target: np.ndarray) -> float:
    scores, target = np.asarray(scores, float), np.asarray(target, float)
    if scores.shape != target.shape:
        raise ValueError("scores and target differ in shape")
    return float(np.sum((scores - target) ** 2))


def l2_penalty(net: Network, l2: float) -> float:
    return l2 * float(sum(np.sum(w * w) for w in net.weights()))


def targets_for(labels: Sequence[Sequence[int]], n_classes: int) -> np.ndarray:
    """+1 for every gold class, -1 elsewhere."""
    T = -np.ones((len(labels), n_classes))
    for i, ls in enumerate(labels):
        for c in ls:
            if not 0 <= c < n_classes:
                raise ValueError(f"label {c} outside 0..{n_classes - 1}")
            T[i, c] = 1.0
    return T


# ---------------------------------------------------------------- batches

@dataclass
class Inputs:
    """Stacked region matrices of a document set, one CSR per branch."""

    mats: list[sp.csr_matrix]
    offsets: list[np.ndarray]   # per branch, (n_docs + 1,)
    n_docs: int

    def take(self, idx: np.ndarray) -> Inputs:
        idx = np.asarray(idx, dtype=np.int64)
        mats, offs = [], []
        for M, off in zip(self.mats, self.offsets):
            lo, hi = off[idx], off[idx + 1]
            lens = hi - lo
            rows = np.repeat(lo - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens) \
                + np.arange(lens.sum())
            mats.append(M[rows])
            offs.append(np.concatenate([[0], np.cumsum(lens)]))
        return Inputs(mats, offs, len(idx))

    def counts(self, b: int) -> np.ndarray:
        return np.diff(self.offsets[b])


def prepare(net: Network, docs: Sequence[Document]) -> Inputs:
    mats, offsets = [], []
    for br in net.branches:
        per_doc = [br.regions(d) for d in docs]
        lens = np.array([m.shape[0] for m in per_doc], dtype=np.int64)
        offsets.append(np.concatenate([[0], np.cumsum(lens)]))
        if per_doc:
            mats.append(sp.vstack(per_doc, format="csr"))
        else:
            mats.append(sp.csr_matrix((0, br.dim)))
    return Inputs(mats, offsets, len(docs))


# ---------------------------------------------------------------- forward / backward

@dataclass
class _BranchCache:
    R: sp.csr_matrix
    H: np.ndarray
    seg: _Segments
    P: np.ndarray
    arg: np.ndarray | None
    scale: np.ndarray | None


@dataclass
class Cache:
    branches: list[_BranchCache]
    features: np.ndarray
    mask: np.ndarray | None
    dropped: np.ndarray
    scores: np.ndarray
    extra: dict = field(default_factory=dict)


def forward(net: Network, inputs: Inputs, rng: np.random.Generator | None = None
            ) -> tuple[np.ndarray, Cache]:
    """Scores (B, K). Passing ``rng`` selects train mode (dropout active)."""
    B = inputs.n_docs
    caches, pooled = [], []
    for bi, br in enumerate(net.branches):
        R = inputs.mats[bi]
        if R.shape[1] != br.dim:
            raise ConfigError(f"branch {bi}: input dim {R.shape[1]} != {br.dim}")
        counts = inputs.counts(bi)
        if np.any(counts < 1):
            raise ConfigError(f"branch {bi}: a document produced no regions")
        H = conv_forward(br.W, br.b, R)
        seg = pool_segments(counts, br.spec.pooling.units)
        P, arg = _pool(H, seg, br.spec.pooling.kind)
        scale = None
        Z = P
        if br.spec.response_norm:
            scale = 1.0 / np.sqrt(1.0 + np.sum(P * P, axis=1, keepdims=True))
            Z = P * scale
        caches.append(_BranchCache(R, H, seg, P, arg, scale))
        pooled.append(Z.reshape(B, br.spec.width))
    F = np.concatenate(pooled, axis=1) if pooled else np.zeros((B, 0))
    mask = None
    Fd = F
    if rng is not None and net.dropout > 0:
        keep = 1.0 - net.dropout
        mask = (rng.random(F.shape) < keep) / keep
        Fd = F * mask
    S = Fd @ net.top_W.T + net.top_b
    return S, Cache(caches, F, mask, Fd, S)


@dataclass
class Gradients:
    """Data-term gradients. Convolution weight gradients are row-sparse."""

    W_rows: list[np.ndarray]
    W_vals: list[np.ndarray]
    b: list[np.ndarray]
    top_W: np.ndarray
    top_b: np.ndarray

    def dense(self, net: Network, l2: float = 0.0) -> list[np.ndarray]:
        """Full gradients of loss + l2*|weights|^2 in ``net.parameters()`` order."""
        out = []
        for br, rows, vals, gb in zip(net.branches, self.W_rows, self.W_vals, self.b):
            gW = 2.0 * l2 * br.W
            gW[rows] += vals
            out += [gW, gb]
        return out + [self.top_W + 2.0 * l2 * net.top_W, self.top_b]


def backward(net: Network, cache: Cache, targets: np.ndarray, *, mean: bool = True) -> Gradients:
    """Gradients of the square loss (summed over classes, averaged over the batch
    when ``mean``) w.r.t. every parameter; the L2 term is added by the caller."""
    S = cache.scores
    B = S.shape[0]
    dS = 2.0 * (S - targets)
    if mean:
        dS /= B
    g_topW = dS.T @ cache.dropped
    g_topb = dS.sum(axis=0)
    dF = dS @ net.top_W
    if cache.mask is not None:
        dF = dF * cache.mask
    W_rows, W_vals, gbs = [], [], []
    col = 0
    for br, bc in zip(net.branches, cache.branches):
        m, k = br.spec.neurons, br.spec.pooling.units
        dZ = dF[:, col:col + k * m].reshape(B * k, m)
        col += k * m
        if bc.scale is not None:
            s = bc.scale
            dP = s * dZ - (s ** 3) * bc.P * np.sum(bc.P * dZ, axis=1, keepdims=True)
        else:
            dP = dZ
        dH = np.zeros_like(bc.H)
        ne = bc.seg.nonempty
        if br.spec.pooling.kind == "max":
            if bc.arg is not None:
                cols = np.broadcast_to(np.arange(m), bc.arg.shape)
                dH[bc.arg, cols] = dP[ne]
        else:
            dH = dP[bc.seg.seg_of_row] / bc.seg.sizes[bc.seg.seg_of_row][:, None]
        dA = dH * (bc.H > 0)
        gbs.append(dA.sum(axis=0))
        R = bc.R
        uniq, inv = np.unique(R.indices, return_inverse=True)
        Rs = sp.csr_matrix((R.data, inv.ravel(), R.indptr), shape=(R.shape[0], len(uniq)))
        W_rows.append(uniq)
        W_vals.append(np.asarray(Rs.T @ dA))
    return Gradients(W_rows, W_vals, gbs, g_topW, g_topb)


def objective(net: Network, inputs: Inputs, targets: np.ndarray, l2: float = 0.0) -> float:
    """Mean square loss over the documents plus the L2 penalty (inference mode)."""
    S, _ = forward(net, inputs)
    return float(np.sum((S - targets) ** 2)) / max(inputs.n_docs, 1) + l2_penalty(net, l2)


# ---------------------------------------------------------------- single-document helpers

def doc_scores(net: Network, doc: Document) -> np.ndarray:
    S, _ = forward(net, prepare(net, [doc]))
    return S[0]


def predict_scores(net: Network, docs: Sequence[Document], batch: int = 500) -> np.ndarray:
    out = [np.zeros((0, net.n_classes))]
    for i in range(0, len(docs), batch):
        S, _ = forward(net, prepare(net, docs[i:i + batch]))
        out.append(S)
    return np.concatenate(out, axis=0)


def predict(net: Network, docs: Sequence[Document]) -> np.ndarray:
    """Argmax class per document; ties go to the smallest class id."""
    return np.argmax(predict_scores(net, docs), axis=1)
