"""Accuracy, binary F1, and rank-based ROC AUC.

AUC is the Mann-Whitney statistic computed from average ranks, so tied
scores contribute exactly 1/2 per tied pair; the accompanying tests check
it against a quadratic pair-counting oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, UndefinedMetricError


@dataclass
class PredictionSet:
    """Per-sample positive-class probability, predicted label, true label."""

    ids: list
    p_pos: np.ndarray
    predicted: np.ndarray
    truth: np.ndarray

    def __post_init__(self):
        self.ids = list(self.ids)
        self.p_pos = np.asarray(self.p_pos, dtype=np.float64)
        self.predicted = np.asarray(self.predicted, dtype=np.int64)
        self.truth = np.asarray(self.truth, dtype=np.int64)
        n = len(self.ids)
        if not (len(self.p_pos) == len(self.predicted) == len(self.truth) == n):
            raise InvalidArgument("prediction columns must all have equal length")
        if n:
            if not np.isfinite(self.p_pos).all():
                raise InvalidArgument("probabilities must be finite")
            if self.p_pos.min() < 0 or self.p_pos.max() > 1:
                raise InvalidArgument("probabilities must lie in [0, 1]")
            for arr, what in ((self.predicted, "predictions"), (self.truth, "labels")):
                if not np.isin(arr, (0, 1)).all():
                    raise InvalidArgument(f"{what} must be in {{0, 1}}")

    def __len__(self):
        return len(self.ids)


@dataclass
class MetricsReport:
    acc: float
    f1: float
    roc_auc: float
    confusion: dict
    n: int
    threshold: float

    def to_json(self) -> str:
        payload = {
            "acc": self.acc,
            "f1": self.f1,
            "roc_auc": self.roc_auc,
            "confusion": self.confusion,
            "n": self.n,
            "threshold": self.threshold,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _require_nonempty(preds: PredictionSet):
    if len(preds) == 0:
        raise InvalidArgument("metrics are undefined on an empty prediction set")


def accuracy(preds: PredictionSet) -> float:
    """Proportion of samples whose predicted label equals the true label."""
    _require_nonempty(preds)
    return float((preds.predicted == preds.truth).mean())


def confusion_counts(preds: PredictionSet, positive: int = 1) -> dict:
    _require_nonempty(preds)
    pred_pos = preds.predicted == positive
    true_pos = preds.truth == positive
    return {
        "tp": int((pred_pos & true_pos).sum()),
        "fp": int((pred_pos & ~true_pos).sum()),
        "tn": int((~pred_pos & ~true_pos).sum()),
        "fn": int((~pred_pos & true_pos).sum()),
    }


def f1_binary(preds: PredictionSet, positive: int = 1) -> float:
    """F1 = 2*TP / (2*TP + FP + FN); 0 when the denominator vanishes."""
    c = confusion_counts(preds, positive)
    denom = 2 * c["tp"] + c["fp"] + c["fn"]
    if denom == 0:
        return 0.0
    return 2.0 * c["tp"] / denom


def _tied_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with equal values assigned their average rank."""
    _, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    cum = np.cumsum(counts).astype(np.float64)
    avg = cum - (counts - 1) / 2.0
    return avg[inverse]


def roc_auc(scores, truths) -> float:
    """Mann-Whitney AUC with average ranks for tied scores."""
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.int64)
    if scores.shape != truths.shape or scores.ndim != 1:
        raise InvalidArgument("scores and truths must be equal-length vectors")
    if not np.isfinite(scores).all():
        raise InvalidArgument("scores must be finite")
    if not np.isin(truths, (0, 1)).all():
        raise InvalidArgument("truths must be in {0, 1}")
    n_pos = int((truths == 1).sum())
    n_neg = int((truths == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC AUC needs both classes present")
    ranks = _tied_ranks(scores)
    u = ranks[truths == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve_points(scores, truths) -> np.ndarray:
    """(fpr, tpr, threshold) rows swept from the highest score downward.

    The first row is the (0, 0, inf) anchor; after it there is one row per
    distinct score, with the decision rule ``score >= threshold``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.int64)
    n_pos = int((truths == 1).sum())
    n_neg = int((truths == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC curve needs both classes present")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    t = truths[order]
    tp = np.cumsum(t == 1)
    fp = np.cumsum(t == 0)
    last = np.r_[s[1:] != s[:-1], True]  # final index of each distinct score
    rows = np.column_stack(
        [fp[last] / n_neg, tp[last] / n_pos, s[last]]
    )
    anchor = np.array([[0.0, 0.0, np.inf]])
    return np.vstack([anchor, rows])


def write_roc_csv(path, points) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("fpr,tpr,threshold\n")
        for fpr, tpr, thr in points:
            fh.write(f"{float(fpr)!r},{float(tpr)!r},{float(thr)!r}\n")


def report(preds: PredictionSet, threshold: float | None) -> MetricsReport:
    """Full metric report; AUC always comes from the raw probabilities.

    ``threshold`` is descriptive only (argmax decisions pass None); the
    predicted labels in ``preds`` are what gets scored.
    """
    _require_nonempty(preds)
    return MetricsReport(
        acc=accuracy(preds),
        f1=f1_binary(preds),
        roc_auc=roc_auc(preds.p_pos, preds.truth),
        confusion=confusion_counts(preds),
        n=len(preds),
        threshold=None if threshold is None else float(threshold),
    )
