"""Figure rendering for report output.

Every writer funnels through one savefig helper that pins dpi and PNG
metadata, so rendering the same numbers twice produces identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVEFIG_KW = {"dpi": 120, "metadata": {"Software": "xraybench"}}


def _finish(fig, path: str) -> None:
    fig.savefig(path, **_SAVEFIG_KW)
    plt.close(fig)


def save_training_curves(path: str, epochs, train_loss, val_auc) -> None:
    """Loss and validation AUC over epochs, one axis each."""
    fig, ax_loss = plt.subplots(figsize=(6, 4))
    ax_loss.plot(epochs, train_loss, color="tab:blue", label="train loss")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss", color="tab:blue")
    ax_loss.tick_params(axis="y", labelcolor="tab:blue")

    ax_auc = ax_loss.twinx()
    ax_auc.plot(epochs, val_auc, color="tab:red", label="val AUC")
    ax_auc.set_ylabel("val AUC", color="tab:red")
    ax_auc.tick_params(axis="y", labelcolor="tab:red")

    fig.tight_layout()
    _finish(fig, path)


def save_roc_curve(path: str, points) -> None:
    """ROC curve from (fpr, tpr, threshold) rows."""
    pts = np.asarray([(p[0], p[1]) for p in points], dtype=np.float64)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot(pts[:, 0], pts[:, 1], color="tab:blue")
    ax.plot([0, 1], [0, 1], color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    fig.tight_layout()
    _finish(fig, path)


def save_calibration_curve(path: str, curve, tau_star: float) -> None:
    """Validation F1 across the threshold grid, with the pick marked."""
    curve = np.asarray(curve, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(curve[:, 0], curve[:, 1], color="tab:blue", linewidth=0.9)
    ax.axvline(tau_star, color="tab:red", linestyle="--", linewidth=0.9)
    ax.set_xlabel("threshold")
    ax.set_ylabel("validation F1")
    fig.tight_layout()
    _finish(fig, path)
