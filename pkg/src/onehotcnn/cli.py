"""Command-line workflow: build-vocab, train, select, predict, eval, inspect.

Exit codes: 0 success, 1 training diverged, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .baselines import TrainingDiverged
from .config import ExperimentConfig
from .metrics import error_rate, f_measures, report
from .nn import ConfigError, Network
from .text import DataError, parse_dataset_line, tokenize
from .train import top_regions
from .workflow import (build_vocabularies, load_for_prediction, load_rows, score_rows, select,
                       fit, to_documents)

EXIT_DIVERGED, EXIT_CONFIG, EXIT_DATA = 1, 2, 3


def _config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.values["seed"] = str(args.seed)
    return cfg


def _model_path(args, cfg: ExperimentConfig | None) -> Path:
    if getattr(args, "model", None):
        return Path(args.model)
    if cfg is not None and cfg.path("model") is not None:
        return cfg.path("model")
    raise ConfigError("no model path (use --model or the config's model= key)")


def cmd_build_vocab(args) -> int:
    cfg = _config(args)
    for p in build_vocabularies(cfg):
        print(f"wrote {p}")
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    rows = load_rows(cfg.path("train"), cfg.tokenizer())
    fitted = fit(cfg, rows)
    out = _model_path(args, cfg)
    fitted.save(out)
    err = float(np.mean([p not in ls for p, (ls, _) in
                         zip(np.argmax(fitted.scores(rows), axis=1), rows)]))
    print(report({"model": str(out), "train_docs": len(rows), "train_error": err,
                  "seed": cfg.train_config().seed}), end="")
    return 0


def cmd_select(args) -> int:
    cfg = _config(args)
    rows = load_rows(cfg.path("train"), cfg.tokenizer())
    sel = select(cfg, rows, threads=args.threads)
    out = _model_path(args, cfg)
    sel.fitted.save(out)
    vals: dict[str, object] = {"dev_fraction": sel.dev_fraction, "grid_points": len(sel.points)}
    for i, (p, e) in enumerate(zip(sel.points, sel.dev_errors)):
        desc = ",".join(f"{k}:{v}" for k, v in p.items()) or "base"
        vals[f"point.{i}"] = f"{desc} dev_error={e:.6f}"
    vals["best_point"] = sel.best
    for k, v in sel.best_point.items():
        vals[f"best.{k}"] = v
    vals["best_dev_error"] = sel.dev_errors[sel.best]
    vals["model"] = str(out)
    print(report(vals), end="")
    return 0


def _read_unlabelled(path: Path) -> list[tuple[tuple[int, ...], str]]:
    out = []
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n").rstrip("\r")
                if not line.strip():
                    continue
                out.append(parse_dataset_line(line, lineno) if "\t" in line else ((), line))
    except OSError as e:
        raise DataError(f"cannot read dataset {path}: {e}") from e
    return out


def cmd_predict(args) -> int:
    cfg = _config(args) if args.config else None
    model, scheme, opts = load_for_prediction(_model_path(args, cfg))
    data = Path(args.data) if args.data else (cfg.path("test") if cfg else None)
    if data is None:
        raise ConfigError("no dataset (use --data or the config's test= key)")
    rows = [(ls, tokenize(text, opts)) for ls, text in _read_unlabelled(data)]
    S = score_rows(model, scheme, rows)
    lines = []
    for s in S:
        lines.append(f"{int(np.argmax(s))}\t" + ",".join(f"{v:.6g}" for v in s))
    text = "".join(l + "\n" for l in lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def read_predictions(path: Path) -> tuple[list[int], np.ndarray]:
    ids, scores = [], []
    try:
        lines = Path(path).read_text("utf-8").splitlines()
    except OSError as e:
        raise DataError(f"cannot read predictions {path}: {e}") from e
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            head, _, rest = line.partition("\t")
            ids.append(int(head))
            scores.append([float(x) for x in rest.split(",")] if rest else [])
        except ValueError as e:
            raise DataError(f"{path}:{lineno}: malformed prediction line") from e
    return ids, np.array(scores, dtype=np.float64)


def cmd_eval(args) -> int:
    ids, S = read_predictions(Path(args.pred))
    gold = [ls for ls, _ in _read_unlabelled(Path(args.gold))]
    if len(gold) != len(ids):
        raise DataError(f"{len(ids)} predictions for {len(gold)} gold documents")
    if any(not ls for ls in gold):
        raise DataError("gold dataset has unlabelled lines")
    K = S.shape[1] if S.ndim == 2 and S.size else max(max(max(g) for g in gold), max(ids)) + 1
    if args.threshold is not None:
        pred_sets = [set(np.flatnonzero(s > args.threshold).tolist()) for s in S]
    else:
        pred_sets = [{i} for i in ids]
    micro, macro = f_measures(pred_sets, gold, K)
    vals: dict[str, object] = {"documents": len(ids), "classes": K}
    if all(len(g) == 1 for g in gold):
        vals["error_rate"] = error_rate(ids, [g[0] for g in gold])
    vals["micro_f"] = micro
    vals["macro_f"] = macro
    text = report(vals)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def _neurons(sel: str, m: int) -> list[int]:
    if sel == "all":
        return list(range(m))
    out = []
    for part in sel.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def cmd_inspect(args) -> int:
    cfg = _config(args) if args.config else None
    model, _, opts = load_for_prediction(_model_path(args, cfg))
    if not isinstance(model, Network):
        raise ConfigError("inspect needs a network model")
    data = Path(args.data) if args.data else (cfg.path("test") if cfg else None)
    if data is None:
        raise ConfigError("no dataset (use --data or the config's test= key)")
    rows = [(ls, tokenize(text, opts)) for ls, text in _read_unlabelled(data)]
    docs = to_documents(model, rows)
    br = model.branches[args.branch]
    try:
        neurons = _neurons(args.neuron, br.spec.neurons)
    except ValueError as e:
        raise ConfigError(f"bad neuron selector {args.neuron!r}") from e
    out = []
    for j in neurons:
        out.append(f"# branch {args.branch} neuron {j}")
        for rank, (text, act) in enumerate(top_regions(model, docs, args.branch, j, args.count), 1):
            out.append(f"{rank}\t{act:.6f}\t{text}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value experiment config")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--threads", type=int, default=1, help="parallel grid points in select")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="onehotcnn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("build-vocab", parents=[common]).set_defaults(func=cmd_build_vocab)
    p = sub.add_parser("train", parents=[common])
    p.add_argument("--model", help="output model path (default: config model=)")
    p.set_defaults(func=cmd_train)
    p = sub.add_parser("select", parents=[common])
    p.add_argument("--model", help="output model path (default: config model=)")
    p.set_defaults(func=cmd_select)
    p = sub.add_parser("predict", parents=[common])
    p.add_argument("--model")
    p.add_argument("--data", help="dataset to score (default: config test=)")
    p.add_argument("--out", help="predictions file (default: stdout)")
    p.set_defaults(func=cmd_predict)
    p = sub.add_parser("eval", parents=[common])
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--threshold", type=float, help="multi-label: predict every class scoring above")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)
    p = sub.add_parser("inspect", parents=[common])
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--neuron", default="0", help="index, a-b range, comma list, or 'all'")
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_inspect)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDiverged as e:
        print(f"training diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except (KeyError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
