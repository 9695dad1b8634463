"""Training loop for the supervised model.

Everything here is seed-deterministic: shuffle order and augmentation draws
come from per-epoch child seeds of the run seed, so one (bundle, config)
pair always yields the same weights, the same log, and the same checkpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import AugmentConfig, DatasetBundle, augment, normalize_batch
from .errors import InvalidArgument, NumericError, StateError
from .metrics import PredictionSet, roc_auc
from .nn import CnnModel, cross_entropy_loss, forward_batch, model_backward, softmax_probs
from .optim import AdamWConfig, AdamWState, adamw_step

EVAL_BATCH = 256


def _seeded_rng(*words) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(words))))


@dataclass
class TrainConfig:
    seed: int = 0
    epochs: int = 30
    batch_size: int = 128
    optimizer: AdamWConfig = field(default_factory=AdamWConfig)
    augment: AugmentConfig | None = field(default_factory=AugmentConfig)

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidArgument("epochs must be at least 1")
        if self.batch_size < 1:
            raise InvalidArgument("batch_size must be at least 1")


@dataclass
class TrainResult:
    model: CnnModel  # weights after the final epoch
    best_params: dict  # snapshot from the best validation epoch
    best_epoch: int
    best_val_auc: float
    history: list  # (epoch, train_loss, val_auc) per epoch
    config: TrainConfig

    def best_model(self) -> CnnModel:
        m = CnnModel(seed=self.config.seed)
        m.load_parameters(self.best_params)
        return m


def train_model(bundle: DatasetBundle, config: TrainConfig | None = None) -> TrainResult:
    """Run the full schedule; keep the weights with the best validation AUC.

    A later epoch replaces the snapshot only on a strict improvement, so
    ties resolve to the earliest epoch.
    """
    config = config or TrainConfig()
    train_idx = bundle.split_indices("train")
    val_idx = bundle.split_indices("val")
    if train_idx.size == 0:
        raise StateError("bundle has no train split")
    if val_idx.size == 0:
        raise StateError("bundle has no val split")
    labels = bundle.labels()
    val_frames = bundle.frames[val_idx]
    val_labels = labels[val_idx]

    model = CnnModel(seed=config.seed)
    params = model.parameters()
    state = AdamWState(params)

    history = []
    best_epoch = 0
    best_val_auc = float("-inf")
    best_params = model.copy_parameters()

    for epoch in range(1, config.epochs + 1):
        order = _seeded_rng(config.seed, epoch, 0).permutation(train_idx.size)
        aug_rng = _seeded_rng(config.seed, epoch, 1)
        epoch_idx = train_idx[order]

        loss_sum = 0.0
        for start in range(0, epoch_idx.size, config.batch_size):
            batch_idx = epoch_idx[start : start + config.batch_size]
            frames = bundle.frames[batch_idx]
            if config.augment is not None:
                frames = np.stack(
                    [augment(f, config.augment, aug_rng) for f in frames]
                )
            images = normalize_batch(frames, bundle.normalization)

            logits, trace = forward_batch(model, images)
            loss, dlogits = cross_entropy_loss(logits, labels[batch_idx])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at epoch {epoch}")
            grads = model_backward(model, trace, dlogits)
            params, state = adamw_step(params, grads, state, config.optimizer)
            loss_sum += loss * batch_idx.size

        train_loss = loss_sum / epoch_idx.size
        val_auc = float(roc_auc(_frame_probs(model, val_frames, bundle.normalization), val_labels))
        history.append((epoch, float(train_loss), val_auc))
        if val_auc > best_val_auc:
            best_val_auc = val_auc
            best_epoch = epoch
            best_params = model.copy_parameters()

    return TrainResult(
        model=model,
        best_params=best_params,
        best_epoch=best_epoch,
        best_val_auc=best_val_auc,
        history=history,
        config=config,
    )


def _frame_probs(model: CnnModel, frames, normalization) -> np.ndarray:
    """Positive-class probabilities for raw frames, in fixed-size batches."""
    probs = np.empty(len(frames), dtype=np.float64)
    for start in range(0, len(frames), EVAL_BATCH):
        chunk = normalize_batch(frames[start : start + EVAL_BATCH], normalization)
        logits, _ = forward_batch(model, chunk)
        probs[start : start + EVAL_BATCH] = softmax_probs(logits)[:, 1]
    return probs


def predict_probs(model: CnnModel, bundle: DatasetBundle, split: str = "test") -> PredictionSet:
    """Model predictions over one split.

    The predicted label is the logit argmax; in probability terms that is
    ``p1 > 0.5`` with an exact tie going to class 0.
    """
    idx = bundle.split_indices(split)
    if idx.size == 0:
        raise StateError(f"bundle has no {split} split")
    probs = _frame_probs(model, bundle.frames[idx], bundle.normalization)
    return PredictionSet(
        ids=[bundle.records[i].id for i in idx],
        p_pos=probs,
        predicted=(probs > 0.5).astype(np.int64),
        truth=bundle.labels()[idx],
    )


def write_training_log(path: str, history) -> None:
    """CSV with one row per epoch: epoch,train_loss,val_auc."""
    lines = ["epoch,train_loss,val_auc"]
    for epoch, train_loss, val_auc in history:
        lines.append(f"{int(epoch)},{float(train_loss)!r},{float(val_auc)!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
