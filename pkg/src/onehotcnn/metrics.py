"""Error rate and micro/macro F-measure."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def error_rate(preds: Sequence[int], golds: Sequence[int]) -> float:
    preds, golds = np.asarray(preds), np.asarray(golds)
    if len(preds) != len(golds):
        raise ValueError("prediction and gold sequences differ in length")
    if len(golds) == 0:
        raise ValueError("error rate of an empty set is undefined")
    return float(np.mean(preds != golds))


def _f1(tp: float, fp: float, fn: float) -> float:
    # 0/0 precision or recall counts as 0
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return 2 * p * r / (p + r) if p + r else 0.0


def class_counts(pred_sets: Sequence[Sequence[int]], gold_sets: Sequence[Sequence[int]],
                 n_classes: int) -> np.ndarray:
    """(K, 3) array of true positive, false positive, false negative counts."""
    if len(pred_sets) != len(gold_sets):
        raise ValueError("prediction and gold sequences differ in length")
    c = np.zeros((n_classes, 3), dtype=np.int64)
    for ps, gs in zip(pred_sets, gold_sets):
        ps, gs = set(ps), set(gs)
        for k in ps | gs:
            if not 0 <= k < n_classes:
                raise ValueError(f"class id {k} outside 0..{n_classes - 1}")
        for k in ps & gs:
            c[k, 0] += 1
        for k in ps - gs:
            c[k, 1] += 1
        for k in gs - ps:
            c[k, 2] += 1
    return c


def f_measures(pred_sets: Sequence[Sequence[int]], gold_sets: Sequence[Sequence[int]],
               n_classes: int) -> tuple[float, float]:
    """(micro-F, macro-F). Classes never gold nor predicted contribute F1 = 0."""
    if n_classes < 1:
        raise ValueError("need at least one class")
    c = class_counts(pred_sets, gold_sets, n_classes)
    macro = float(np.mean([_f1(*row) for row in c]))
    micro = _f1(*c.sum(axis=0))
    return micro, macro


def report(values: dict[str, object]) -> str:
    """Aligned plain-text block followed by machine-readable key=value lines."""
    width = max((len(k) for k in values), default=0)
    def fmt(v):
        return f"{v:.6f}" if isinstance(v, float) else str(v)
    table = [f"{k.ljust(width)}  {fmt(v)}" for k, v in values.items()]
    kv = [f"{k}={fmt(v)}" for k, v in values.items()]
    return "\n".join(table + [""] + kv) + "\n"
