"""Model checkpoints: a small binary container with a JSON header.

Layout:

    bytes 0..3    magic b"XRB1"
    bytes 4..7    header length (unsigned 32-bit little-endian)
    header        UTF-8 JSON, sorted keys:
                      {layers: [{name, shape}, ...], dtype: "f32le",
                       seed, epoch, val_auc, optimizer: {...}}
    payload       raw little-endian float32 tensor data, concatenated in
                  header order

The header's layer list is authoritative; loading verifies it against the
model architecture before any tensor is accepted.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .nn import CnnModel

MAGIC = b"XRB1"


@dataclass
class CheckpointMeta:
    seed: int
    epoch: int
    val_auc: float
    optimizer: dict


def save_checkpoint(path: str, model: CnnModel, meta: CheckpointMeta) -> None:
    params = model.parameters()
    header = {
        "layers": [{"name": name, "shape": list(t.shape)} for name, t in params.items()],
        "dtype": "f32le",
        "seed": int(meta.seed),
        "epoch": int(meta.epoch),
        "val_auc": float(meta.val_auc),
        "optimizer": meta.optimizer,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for t in params.values():
            fh.write(np.ascontiguousarray(t, dtype="<f4").tobytes())


def load_checkpoint(path: str) -> tuple:
    """Read a checkpoint; returns ``(params, meta)``.

    ``params`` maps layer names to float32 arrays in header order.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise FormatError(f"{path}: not a checkpoint file (bad magic)")
    (header_len,) = struct.unpack("<I", raw[4:8])
    if 8 + header_len > len(raw):
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: header is not valid JSON: {exc}") from exc
    if header.get("dtype") != "f32le":
        raise FormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    layers = header.get("layers")
    if not isinstance(layers, list) or not layers:
        raise FormatError(f"{path}: header lacks a layer list")

    params = {}
    offset = 8 + header_len
    for entry in layers:
        name, shape = entry.get("name"), tuple(entry.get("shape", ()))
        if not name or not shape:
            raise FormatError(f"{path}: malformed layer entry {entry!r}")
        n_bytes = int(np.prod(shape)) * 4
        chunk = raw[offset : offset + n_bytes]
        if len(chunk) != n_bytes:
            raise FormatError(f"{path}: payload truncated at layer {name!r}")
        params[name] = np.frombuffer(chunk, dtype="<f4").reshape(shape).copy()
        offset += n_bytes
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} trailing bytes after payload")

    meta = CheckpointMeta(
        seed=int(header.get("seed", 0)),
        epoch=int(header.get("epoch", 0)),
        val_auc=float(header.get("val_auc", 0.0)),
        optimizer=dict(header.get("optimizer", {})),
    )
    return params, meta


def restore_model(path: str) -> tuple:
    """Build a model from a checkpoint; returns ``(model, meta)``.

    Raises FormatError when the stored layer names or shapes disagree with
    the architecture.
    """
    params, meta = load_checkpoint(path)
    model = CnnModel(seed=meta.seed)
    expected = model.parameters()
    if list(params.keys()) != list(expected.keys()):
        raise FormatError(
            f"{path}: layer names {sorted(params)} do not match the "
            f"expected architecture {sorted(expected)}"
        )
    for name, t in params.items():
        if t.shape != expected[name].shape:
            raise FormatError(
                f"{path}: layer {name!r} has shape {t.shape}, "
                f"expected {expected[name].shape}"
            )
    model.load_parameters(params)
    return model, meta
