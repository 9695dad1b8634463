"""Decision-threshold calibration.

Sweeps a dense threshold grid over validation probabilities, keeps the
threshold with the best F1 (ties go to the smallest threshold, which favors
recall), and applies it to held-out test probabilities.  Moving the
threshold never touches the probabilities themselves, so ROC AUC is
bit-identical before and after calibration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, UndefinedCalibrationError
from .metrics import MetricsReport, PredictionSet, report


@dataclass
class ThresholdGrid:
    lo: float = 0.02
    hi: float = 0.98
    step: float = 0.001

    def __post_init__(self):
        if not 0 < self.lo < self.hi < 1:
            raise InvalidArgument("grid must satisfy 0 < lo < hi < 1")
        if not self.step > 0:
            raise InvalidArgument("grid step must be positive")
        n = round((self.hi - self.lo) / self.step)
        if n < 1 or abs(self.lo + n * self.step - self.hi) > 1e-9:
            raise InvalidArgument("grid step must tile [lo, hi] exactly")
        self._n = n

    def points(self) -> np.ndarray:
        """All grid thresholds, endpoints included.

        Points are rounded to 12 decimals so each one is the canonical
        float of its decimal value; otherwise accumulated error puts a
        point like 0.35 a hair above the identical probability and the
        inclusive comparison flips.
        """
        return np.round(self.lo + self.step * np.arange(self._n + 1), 12)


@dataclass
class CalibrationResult:
    tau_star: float
    best_f1_val: float
    curve: np.ndarray  # (k, 2) rows of (threshold, f1)
    grid: ThresholdGrid

    def to_json(self) -> str:
        payload = {
            "tau_star": self.tau_star,
            "best_f1_val": self.best_f1_val,
            "grid": {"lo": self.grid.lo, "hi": self.grid.hi, "step": self.grid.step},
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def apply_threshold(p_pos, tau: float) -> np.ndarray:
    """Label 1 iff p >= tau (the inequality is inclusive)."""
    if not 0 < tau < 1:
        raise InvalidArgument(f"threshold must lie strictly inside (0, 1), got {tau}")
    return (np.asarray(p_pos, dtype=np.float64) >= tau).astype(np.int64)


def f1_at_thresholds(probs, labels, taus) -> np.ndarray:
    """Vectorized F1 of the rule p >= tau for every tau (0 when degenerate)."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    pred = probs[:, None] >= np.asarray(taus)[None, :]
    pos = (labels == 1)[:, None]
    tp = (pred & pos).sum(axis=0)
    fp = (pred & ~pos).sum(axis=0)
    fn = (~pred & pos).sum(axis=0)
    denom = 2 * tp + fp + fn
    return np.where(denom > 0, 2.0 * tp / np.where(denom > 0, denom, 1), 0.0)


def sweep(probs_val, labels_val, grid: ThresholdGrid | None = None) -> CalibrationResult:
    """Evaluate F1 at every grid threshold and keep the smallest maximizer."""
    if grid is None:
        grid = ThresholdGrid()
    probs = np.asarray(probs_val, dtype=np.float64)
    labels = np.asarray(labels_val, dtype=np.int64)
    if probs.ndim != 1 or probs.shape != labels.shape or len(probs) == 0:
        raise InvalidArgument("need equal-length, non-empty probability/label vectors")
    if not np.isin(labels, (0, 1)).all():
        raise InvalidArgument("labels must be in {0, 1}")
    if len(np.unique(labels)) < 2:
        raise UndefinedCalibrationError(
            "calibration needs both classes in the validation labels"
        )
    taus = grid.points()
    f1s = f1_at_thresholds(probs, labels, taus)
    best = int(np.argmax(f1s))  # argmax returns the first (= smallest) maximizer
    return CalibrationResult(
        tau_star=float(taus[best]),
        best_f1_val=float(f1s[best]),
        curve=np.column_stack([taus, f1s]),
        grid=grid,
    )


def calibrated_report(probs_test, labels_test, tau_star: float, ids=None) -> MetricsReport:
    """Metric report at the calibrated threshold; AUC is threshold-free."""
    probs = np.asarray(probs_test, dtype=np.float64)
    if ids is None:
        ids = [str(i) for i in range(len(probs))]
    preds = PredictionSet(ids, probs, apply_threshold(probs, tau_star), labels_test)
    return report(preds, threshold=tau_star)


def write_curve_csv(path, curve) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("threshold,f1\n")
        for tau, f1 in curve:
            fh.write(f"{float(tau)!r},{float(f1)!r}\n")
