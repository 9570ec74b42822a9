"""F1 scores for rejection decisions and open-set label predictions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

REJECT = 0


def _pair(pred, true):
    pred, true = np.asarray(pred), np.asarray(true)
    if pred.shape != true.shape or pred.ndim != 1:
        raise InvalidInputError(f"length mismatch: {pred.shape} vs {true.shape}")
    return pred, true


def _f1(tp, fp, fn) -> float:
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2 * tp / denom


def f1_binary(pred_mask, true_mask, positive: str = "rejected") -> float:
    """Binary F1 where the masks flag rejected samples.

    ``positive="common"`` scores the complement instead.
    """
    pred, true = _pair(pred_mask, true_mask)
    pred, true = pred.astype(bool), true.astype(bool)
    if positive == "common":
        pred, true = ~pred, ~true
    elif positive != "rejected":
        raise InvalidInputError(f"positive must be 'common' or 'rejected', got {positive!r}")
    tp = int(np.sum(pred & true))
    fp = int(np.sum(pred & ~true))
    fn = int(np.sum(~pred & true))
    return _f1(tp, fp, fn)


def rejection_f1(pred_mask, true_mask) -> float:
    """Macro F1 over the two outcomes {common, rejected}."""
    return 0.5 * (f1_binary(pred_mask, true_mask, "common") + f1_binary(pred_mask, true_mask, "rejected"))


@dataclass(frozen=True)
class ConfusionTable:
    universe: tuple
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    total: int

    def per_class_f1(self) -> dict:
        return {label: _f1(tp, fp, fn) for label, tp, fp, fn in zip(self.universe, self.tp, self.fp, self.fn)}


def confusion_table(pred_labels, true_labels, universe) -> ConfusionTable:
    pred, true = _pair(pred_labels, true_labels)
    universe = tuple(int(u) for u in universe)
    outside = set(np.unique(np.concatenate([pred, true])).tolist()) - set(universe)
    if outside:
        raise InvalidInputError(f"labels {sorted(outside)} are outside the universe {universe}")
    tp = np.array([np.sum((pred == u) & (true == u)) for u in universe], dtype=np.int64)
    fp = np.array([np.sum((pred == u) & (true != u)) for u in universe], dtype=np.int64)
    fn = np.array([np.sum((pred != u) & (true == u)) for u in universe], dtype=np.int64)
    return ConfusionTable(universe, tp, fp, fn, int(pred.shape[0]))


def f1_macro(pred_labels, true_labels, universe) -> float:
    """Unweighted mean of the per-class F1 over ``universe``."""
    table = confusion_table(pred_labels, true_labels, universe)
    return float(np.mean(list(table.per_class_f1().values())))


def open_set_truth(true_labels, shared) -> np.ndarray:
    """Ground truth with every label outside ``shared`` mapped to ``REJECT``."""
    true_labels = np.asarray(true_labels)
    return np.where(np.isin(true_labels, list(shared)), true_labels, REJECT)


def open_set_scores(pred_labels, true_labels, shared) -> dict:
    """Macro, per-class and rejection F1 of open-set predictions.

    Ground truth outside ``shared`` counts as ``REJECT``. Predictions of ``-1``
    (target columns that received no mass at all) are scored as ``REJECT``. The
    ``REJECT`` class joins the universe only when it occurs in the truth or the
    predictions.
    """
    pred = np.asarray(pred_labels).copy()
    pred[pred == -1] = REJECT
    truth = open_set_truth(true_labels, shared)
    universe = sorted(set(int(c) for c in shared))
    if np.any(truth == REJECT) or np.any(pred == REJECT):
        universe = [REJECT] + universe
    table = confusion_table(pred, truth, universe)
    per_class = table.per_class_f1()
    return {
        "f1_macro": float(np.mean(list(per_class.values()))),
        "f1_per_class": {str(k): float(v) for k, v in per_class.items()},
        "f1_rejected": f1_binary(pred == REJECT, truth == REJECT, "rejected"),
        "rejection_f1_macro": rejection_f1(pred == REJECT, truth == REJECT),
    }
