"""Model container.

Layout::

    tcnn1 | lin1            header line (network | linear model)
    key=value ...           configuration, one per line
    end
    blobs                   per matrix: uint32 ndim, uint32 dims..., then
                            little-endian float32 data in row-major order

Network blob order: for each branch ``W`` (neurons x input dim), ``b``, and
for NB-weighted bag branches the NB-weight vector; then top ``W`` and ``b``.
Linear blob order: ``coef``, ``intercept``, then NB-weights for ``nb_binary``.

Vocabularies are referenced by path (relative to the model file) and checked
against the recorded size and digest on load.
"""

from __future__ import annotations

import io
import os
import struct
from pathlib import Path

import numpy as np

from .baselines import BowScheme, LinearModel
from .nn import Branch, BranchSpec, Network, PoolingSpec
from .regions import RegionConfig
from .text import DataError, Vocabulary

CNN_HEADER = "tcnn1"
LINEAR_HEADER = "lin1"


def _b(x: bool) -> str:
    return "true" if x else "false"


def parse_bool(s: str) -> bool:
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _write_blob(f, a: np.ndarray) -> None:
    a = np.ascontiguousarray(a, dtype="<f4")
    f.write(struct.pack("<I", a.ndim))
    f.write(struct.pack(f"<{a.ndim}I", *a.shape))
    f.write(a.tobytes())


def _read_blob(f) -> np.ndarray:
    head = f.read(4)
    if len(head) != 4:
        raise DataError("truncated model file")
    (ndim,) = struct.unpack("<I", head)
    shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim))
    n = int(np.prod(shape)) if ndim else 1
    buf = f.read(4 * n)
    if len(buf) != 4 * n:
        raise DataError("truncated model file")
    return np.frombuffer(buf, dtype="<f4").astype(np.float64).reshape(shape)


def _rel(path: str | Path, base: Path) -> str:
    return os.path.relpath(os.path.abspath(path), os.path.abspath(base)).replace(os.sep, "/")


def _resolve(ref: str, base: Path) -> Path:
    p = Path(ref)
    return p if p.is_absolute() else base / p


def _vocab_lines(prefix: str, vocab: Vocabulary, path: str | Path, base: Path) -> list[str]:
    return [f"{prefix}vocab={_rel(path, base)}", f"{prefix}vocab_size={len(vocab)}",
            f"{prefix}vocab_digest={vocab.digest()}"]


def _load_vocab(kv: dict, prefix: str, base: Path, cache: dict) -> Vocabulary:
    path = _resolve(kv[f"{prefix}vocab"], base)
    key = str(path)
    if key not in cache:
        cache[key] = Vocabulary.load(path)
    v = cache[key]
    if len(v) != int(kv[f"{prefix}vocab_size"]) or v.digest() != kv[f"{prefix}vocab_digest"]:
        raise DataError(f"vocabulary {path} does not match the one the model was trained with")
    return v


def _meta_lines(meta: dict[str, str]) -> list[str]:
    for k, v in meta.items():
        if "\n" in str(v) or "=" in k:
            raise ValueError(f"meta entry {k!r} cannot be stored")
    return [f"meta.{k}={v}" for k, v in sorted(meta.items())]


def _meta(kv: dict[str, str]) -> dict[str, str]:
    return {k[5:]: v for k, v in kv.items() if k.startswith("meta.")}


def _header(kv_lines: list[str], header: str) -> bytes:
    return (header + "\n" + "\n".join(kv_lines) + "\nend\n").encode("utf-8")


def save_network(net: Network, path: str | Path, vocab_paths: list[str | Path]) -> None:
    """``vocab_paths[i]`` is the vocabulary file behind ``net.branches[i]``."""
    path = Path(path)
    base = path.parent
    lines = [f"classes={net.n_classes}", f"dropout={net.dropout!r}", f"seed={net.seed}",
             "init=gaussian", f"branches={len(net.branches)}"]
    for i, (br, vp) in enumerate(zip(net.branches, vocab_paths)):
        s = br.spec
        p = f"branch.{i}."
        lines += [f"{p}kind={s.kind}", f"{p}neurons={s.neurons}",
                  f"{p}pooling={s.pooling.kind}", f"{p}units={s.pooling.units}",
                  f"{p}response_norm={_b(s.response_norm)}"]
        if s.kind == "bag":
            lines += [f"{p}ngrams={','.join(map(str, s.ngrams))}", f"{p}nb_weight={_b(s.nb_weight)}"]
        else:
            r = s.region
            lines += [f"{p}region={r.size}", f"{p}stride={r.stride}",
                      f"{p}variable_stride={_b(r.variable_stride)}", f"{p}pad={_b(r.pad)}"]
        lines += _vocab_lines(p, br.vocab, vp, base)
    lines += _meta_lines(net.meta)
    buf = io.BytesIO()
    buf.write(_header(lines, CNN_HEADER))
    for br in net.branches:
        _write_blob(buf, br.W.T)
        _write_blob(buf, br.b)
        if br.nb is not None:
            _write_blob(buf, br.nb)
    _write_blob(buf, net.top_W)
    _write_blob(buf, net.top_b)
    path.write_bytes(buf.getvalue())


def save_linear(model: LinearModel, scheme: BowScheme, path: str | Path,
                vocab_path: str | Path) -> None:
    path = Path(path)
    lines = [f"classes={model.n_classes}", f"loss={model.loss}", f"l2={model.l2!r}",
             f"scheme={scheme.kind}", f"ngrams={','.join(map(str, scheme.ngrams))}"]
    lines += _vocab_lines("", scheme.vocab, vocab_path, path.parent)
    lines += _meta_lines(model.meta)
    buf = io.BytesIO()
    buf.write(_header(lines, LINEAR_HEADER))
    _write_blob(buf, model.coef)
    _write_blob(buf, model.intercept)
    if scheme.nb_weights is not None:
        _write_blob(buf, scheme.nb_weights)
    path.write_bytes(buf.getvalue())


def _read_header(f) -> tuple[str, dict[str, str]]:
    header = f.readline().decode("utf-8").strip()
    kv: dict[str, str] = {}
    while True:
        line = f.readline()
        if not line:
            raise DataError("model file ends inside its header")
        line = line.decode("utf-8").rstrip("\n")
        if line == "end":
            return header, kv
        key, _, val = line.partition("=")
        kv[key] = val


def load_model(path: str | Path):
    """Returns a ``Network`` or a ``(LinearModel, BowScheme)`` pair."""
    path = Path(path)
    base = path.parent
    vcache: dict = {}
    with open(path, "rb") as f:
        header, kv = _read_header(f)
        if header == CNN_HEADER:
            branches = []
            for i in range(int(kv["branches"])):
                p = f"branch.{i}."
                kind = kv[f"{p}kind"]
                pooling = PoolingSpec(kv[f"{p}pooling"], int(kv[f"{p}units"]))
                rn = parse_bool(kv[f"{p}response_norm"])
                if kind == "bag":
                    spec = BranchSpec(kind, int(kv[f"{p}neurons"]), None, pooling, rn,
                                      tuple(int(x) for x in kv[f"{p}ngrams"].split(",")),
                                      parse_bool(kv[f"{p}nb_weight"]))
                else:
                    region = RegionConfig(int(kv[f"{p}region"]), int(kv[f"{p}stride"]), kind,
                                          parse_bool(kv[f"{p}variable_stride"]),
                                          parse_bool(kv[f"{p}pad"]))
                    spec = BranchSpec(kind, int(kv[f"{p}neurons"]), region, pooling, rn)
                vocab = _load_vocab(kv, p, base, vcache)
                W = _read_blob(f).T.copy()
                b = _read_blob(f)
                nb = _read_blob(f) if kind == "bag" and spec.nb_weight else None
                branches.append(Branch(spec, vocab, W, b, nb))
            top_W = _read_blob(f)
            top_b = _read_blob(f)
            return Network(branches, top_W, top_b, dropout=float(kv["dropout"]),
                           seed=int(kv["seed"]), meta=_meta(kv))
        if header == LINEAR_HEADER:
            vocab = _load_vocab(kv, "", base, vcache)
            coef, intercept = _read_blob(f), _read_blob(f)
            nb = _read_blob(f) if kv["scheme"] == "nb_binary" else None
            scheme = BowScheme(kv["scheme"], vocab, tuple(int(x) for x in kv["ngrams"].split(",")), nb)
            model = LinearModel(coef, intercept, l2=float(kv["l2"]), loss=kv["loss"],
                                n_classes=int(kv["classes"]), meta=_meta(kv))
            return model, scheme
    raise DataError(f"{path}: unknown model header {header!r}")


def round_to_float32(net: Network) -> Network:
    """Copy of ``net`` with parameters rounded exactly as the model file stores them."""
    r = lambda a: a.astype(np.float32).astype(np.float64)
    branches = [Branch(br.spec, br.vocab, r(br.W), r(br.b), None if br.nb is None else r(br.nb))
                for br in net.branches]
    return Network(branches, r(net.top_W), r(net.top_b), net.dropout, net.seed, dict(net.meta))
