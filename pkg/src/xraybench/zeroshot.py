"""Zero-shot scoring of precomputed image embeddings against text prototypes.

An embedding set on disk is a directory with three files:

    embeddings.json      {dim, count, dtype: "f32le", logit_scale, model_id,
                          ids: [...], labels: [...],
                          prompts: {class0: [...], class1: [...]}}
    vectors.bin          count * dim little-endian float32, row-major
    prompt_vectors.bin   (len(class0) + len(class1)) * dim float32,
                         class0 rows first

The encoder that produced the vectors lives elsewhere; this module only
consumes its output.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePrototypeError,
    FormatError,
    InvalidArgument,
)
from .metrics import PredictionSet


@dataclass
class PromptSet:
    class0: list
    class1: list

    def __post_init__(self):
        if not self.class0 or not self.class1:
            raise InvalidArgument("each class needs at least one prompt")


@dataclass
class EmbeddingSet:
    dim: int
    ids: list
    labels: np.ndarray  # (n,) int64
    vectors: np.ndarray  # (n, dim) float32
    prompts: PromptSet
    prompt_vectors: np.ndarray  # (len(class0)+len(class1), dim) float32
    logit_scale: float
    model_id: str

    @property
    def count(self) -> int:
        return len(self.ids)

    def prompt_rows(self, label: int) -> np.ndarray:
        k0 = len(self.prompts.class0)
        if label == 0:
            return self.prompt_vectors[:k0]
        if label == 1:
            return self.prompt_vectors[k0:]
        raise InvalidArgument(f"label must be 0 or 1, got {label!r}")


@dataclass
class Prototype:
    """Unit-norm class direction: the normalized mean of prompt embeddings."""

    vector: np.ndarray
    label: int
    prompt_count: int


def build_prototype(prompt_rows, label: int) -> Prototype:
    rows = np.asarray(prompt_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise InvalidArgument("prompt rows must form a non-empty 2-d array")
    mean = rows.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-12:
        raise DegeneratePrototypeError(
            f"class {label} prompt embeddings average to a near-zero vector"
        )
    return Prototype(vector=mean / norm, label=int(label), prompt_count=rows.shape[0])


def _sigmoid(z: float) -> float:
    # Split on sign so exp never overflows.
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return float(e / (1.0 + e))


def classify(vector, proto0: Prototype, proto1: Prototype, logit_scale: float):
    """Score one image embedding.

    Returns ``(p_pos, predicted, s_neg, s_pos)`` where the similarities are
    cosines against each prototype, ``p_pos`` squashes their scaled gap, and
    the argmax label is 1 only when ``s_pos`` strictly exceeds ``s_neg``.
    """
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidArgument(f"embedding must be 1-d, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        raise InvalidArgument("cannot classify a zero embedding vector")
    if logit_scale <= 0:
        raise InvalidArgument("logit_scale must be positive")
    unit = v / norm
    s_neg = float(unit @ proto0.vector)
    s_pos = float(unit @ proto1.vector)
    p_pos = _sigmoid(logit_scale * (s_pos - s_neg))
    predicted = 1 if s_pos > s_neg else 0
    return p_pos, predicted, s_neg, s_pos


def score_set(
    embedding_set: EmbeddingSet,
    prototypes: tuple | None = None,
    logit_scale: float | None = None,
) -> PredictionSet:
    """Argmax predictions and positive-class probabilities for a whole set.

    Prototypes default to the set's own prompt rows and the scale to the
    recorded one; pass either explicitly for ablations.
    """
    if prototypes is None:
        proto0 = build_prototype(embedding_set.prompt_rows(0), 0)
        proto1 = build_prototype(embedding_set.prompt_rows(1), 1)
    else:
        proto0, proto1 = prototypes
    if logit_scale is None:
        logit_scale = embedding_set.logit_scale
    p_pos = np.empty(embedding_set.count, dtype=np.float64)
    predicted = np.empty(embedding_set.count, dtype=np.int64)
    for i, sample_id in enumerate(embedding_set.ids):
        try:
            p, pred, _, _ = classify(
                embedding_set.vectors[i], proto0, proto1, logit_scale
            )
        except InvalidArgument as exc:
            raise InvalidArgument(f"sample {sample_id!r}: {exc}") from exc
        p_pos[i] = p
        predicted[i] = pred
    return PredictionSet(
        ids=list(embedding_set.ids),
        p_pos=p_pos,
        predicted=predicted,
        truth=np.asarray(embedding_set.labels, dtype=np.int64),
    )


def save_embedding_set(eset: EmbeddingSet, path: str) -> None:
    os.makedirs(path, exist_ok=True)
    header = {
        "dim": int(eset.dim),
        "count": int(eset.count),
        "dtype": "f32le",
        "logit_scale": float(eset.logit_scale),
        "model_id": eset.model_id,
        "ids": list(eset.ids),
        "labels": [int(x) for x in eset.labels],
        "prompts": {"class0": list(eset.prompts.class0), "class1": list(eset.prompts.class1)},
    }
    with open(os.path.join(path, "embeddings.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, sort_keys=True, indent=2) + "\n")
    vecs = np.ascontiguousarray(eset.vectors, dtype="<f4")
    with open(os.path.join(path, "vectors.bin"), "wb") as fh:
        fh.write(vecs.tobytes())
    pvecs = np.ascontiguousarray(eset.prompt_vectors, dtype="<f4")
    with open(os.path.join(path, "prompt_vectors.bin"), "wb") as fh:
        fh.write(pvecs.tobytes())


def load_embedding_set(path: str) -> EmbeddingSet:
    header_path = os.path.join(path, "embeddings.json")
    vectors_path = os.path.join(path, "vectors.bin")
    prompts_path = os.path.join(path, "prompt_vectors.bin")
    for p in (header_path, vectors_path, prompts_path):
        if not os.path.isfile(p):
            raise FormatError(f"missing {os.path.basename(p)} under {path}")
    with open(header_path, "r", encoding="utf-8") as fh:
        try:
            header = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"embeddings.json is not valid JSON: {exc}") from exc

    for key in ("dim", "count", "ids", "labels", "prompts"):
        if key not in header:
            raise FormatError(f"embeddings.json lacks required key {key!r}")
    if header.get("dtype", "f32le") != "f32le":
        raise FormatError(f"unsupported dtype {header.get('dtype')!r}")
    dim, count = int(header["dim"]), int(header["count"])
    ids = [str(x) for x in header["ids"]]
    labels = np.asarray(header["labels"], dtype=np.int64)
    if len(ids) != count or labels.shape != (count,):
        raise FormatError("ids/labels length must equal count")
    if len(set(ids)) != len(ids):
        raise FormatError("embedding ids must be unique")
    if labels.size and not np.isin(labels, (0, 1)).all():
        raise FormatError("labels must be 0 or 1")
    logit_scale = float(header.get("logit_scale", 1.0))
    if not logit_scale > 0:
        raise FormatError(f"logit_scale must be positive, got {logit_scale}")
    prompts = PromptSet(
        class0=[str(x) for x in header["prompts"].get("class0", [])],
        class1=[str(x) for x in header["prompts"].get("class1", [])],
    )

    vecs = np.fromfile(vectors_path, dtype="<f4")
    if vecs.size != count * dim:
        raise FormatError(
            f"vectors.bin holds {vecs.size} floats, expected {count * dim}"
        )
    if not np.isfinite(vecs).all():
        raise FormatError("vectors.bin contains non-finite values")
    n_prompts = len(prompts.class0) + len(prompts.class1)
    pvecs = np.fromfile(prompts_path, dtype="<f4")
    if pvecs.size != n_prompts * dim:
        raise FormatError(
            f"prompt_vectors.bin holds {pvecs.size} floats, expected {n_prompts * dim}"
        )
    return EmbeddingSet(
        dim=dim,
        ids=ids,
        labels=labels,
        vectors=vecs.reshape(count, dim),
        prompts=prompts,
        prompt_vectors=pvecs.reshape(n_prompts, dim),
        logit_scale=logit_scale,
        model_id=str(header.get("model_id", "")),
    )
