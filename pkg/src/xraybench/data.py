"""Canonical dataset bundle plus split, normalization, and augmentation.

A bundle on disk is a directory holding ``manifest.json`` and ``images.bin``:

    manifest.json  {width, height, count, source,
                    normalization: {scale, mean, std},
                    records: [{id, label, split}, ...]}
    images.bin     count * width * height unsigned bytes, row-major,
                   in record order

Bundles are immutable after load; augmentation takes a caller-supplied RNG
so batch workers can each own a stream.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InvalidArgument, ShapeError, StateError

SPLITS = ("train", "val", "test", "unassigned")
DEFAULT_NORMALIZATION = {"scale": 255, "mean": 0.5, "std": 0.5}


@dataclass
class Record:
    id: str
    label: int
    split: str = "unassigned"


@dataclass
class DatasetBundle:
    width: int
    height: int
    source: str
    records: list
    frames: np.ndarray  # (count, height, width) uint8
    normalization: dict = field(default_factory=lambda: dict(DEFAULT_NORMALIZATION))

    @property
    def count(self) -> int:
        return len(self.records)

    def split_indices(self, split: str) -> np.ndarray:
        if split not in SPLITS:
            raise InvalidArgument(f"unknown split {split!r}")
        return np.array(
            [i for i, r in enumerate(self.records) if r.split == split], dtype=np.int64
        )

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.int64)

    def index_of(self, record_id: str) -> int:
        for i, r in enumerate(self.records):
            if r.id == record_id:
                return i
        raise InvalidArgument(f"unknown record id {record_id!r}")


def _manifest_dict(bundle: DatasetBundle) -> dict:
    return {
        "width": bundle.width,
        "height": bundle.height,
        "count": bundle.count,
        "source": bundle.source,
        "normalization": bundle.normalization,
        "records": [
            {"id": r.id, "label": r.label, "split": r.split} for r in bundle.records
        ],
    }


def write_manifest(bundle: DatasetBundle, path: str) -> None:
    """Rewrite manifest.json only (canonical formatting, byte-stable)."""
    manifest = json.dumps(_manifest_dict(bundle), sort_keys=True, indent=2) + "\n"
    with open(os.path.join(path, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(manifest)


def save_bundle(bundle: DatasetBundle, path: str) -> None:
    os.makedirs(path, exist_ok=True)
    write_manifest(bundle, path)
    with open(os.path.join(path, "images.bin"), "wb") as fh:
        fh.write(np.ascontiguousarray(bundle.frames, dtype=np.uint8).tobytes())


def load_bundle(path: str) -> DatasetBundle:
    """Load and validate a bundle directory."""
    manifest_path = os.path.join(path, "manifest.json")
    images_path = os.path.join(path, "images.bin")
    if not os.path.isfile(manifest_path):
        raise FormatError(f"missing manifest.json under {path}")
    if not os.path.isfile(images_path):
        raise FormatError(f"missing images.bin under {path}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"manifest.json is not valid JSON: {exc}") from exc

    for key in ("width", "height", "count", "records"):
        if key not in manifest:
            raise FormatError(f"manifest.json lacks required key {key!r}")
    width, height = int(manifest["width"]), int(manifest["height"])
    count = int(manifest["count"])
    raw_records = manifest["records"]
    if len(raw_records) != count:
        raise FormatError(
            f"manifest count {count} does not match {len(raw_records)} records"
        )

    records = []
    for i, r in enumerate(raw_records):
        label = r.get("label")
        split = r.get("split", "unassigned")
        if label not in (0, 1):
            raise FormatError(f"record {i}: label must be 0 or 1, got {label!r}")
        if split not in SPLITS:
            raise FormatError(f"record {i}: unknown split {split!r}")
        records.append(Record(id=str(r["id"]), label=int(label), split=split))
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise FormatError("record ids must be unique")

    blob = np.fromfile(images_path, dtype=np.uint8)
    expected = count * width * height
    if blob.size != expected:
        raise FormatError(
            f"images.bin holds {blob.size} bytes, expected {expected} "
            f"({count} x {height} x {width})"
        )
    frames = blob.reshape(count, height, width)
    return DatasetBundle(
        width=width,
        height=height,
        source=str(manifest.get("source", "")),
        records=records,
        frames=frames,
        normalization=dict(manifest.get("normalization", DEFAULT_NORMALIZATION)),
    )


def stratified_split(records, ratios=(0.6, 0.1, 0.3), seed: int = 0) -> list:
    """Assign train/val/test per class: shuffle, then floor-partition.

    Per class c with n_c members: train gets floor(r0*n_c), val gets
    floor(r1*n_c), test gets the remainder, which keeps each split's class
    mix within one sample of the global mix.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise InvalidArgument("need three non-negative split ratios")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidArgument(f"split ratios must sum to 1, got {sum(ratios)}")
    records = list(records)
    if any(r.split != "unassigned" for r in records):
        raise StateError("records already carry split assignments")
    labels = {r.label for r in records}
    if labels != {0, 1}:
        raise InvalidArgument("stratified split needs both classes present")

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    out = [Record(r.id, r.label, r.split) for r in records]
    for label in (0, 1):
        idx = np.array([i for i, r in enumerate(out) if r.label == label])
        idx = idx[rng.permutation(len(idx))]
        n = len(idx)
        n_train = int(ratios[0] * n)
        n_val = int(ratios[1] * n)
        for j, i in enumerate(idx):
            if j < n_train:
                out[i].split = "train"
            elif j < n_train + n_val:
                out[i].split = "val"
            else:
                out[i].split = "test"
    return out


def normalize(frame, normalization: dict | None = None) -> np.ndarray:
    """Map an 8-bit 64x64 frame to a (1, 64, 64) float32 tensor in [-1, 1]."""
    frame = np.asarray(frame)
    if frame.shape != (64, 64):
        raise ShapeError(f"expected a 64x64 frame, got {frame.shape}")
    norm = normalization or DEFAULT_NORMALIZATION
    scale, mean, std = norm["scale"], norm["mean"], norm["std"]
    out = (frame.astype(np.float32) / scale - mean) / std
    return out[None, :, :].astype(np.float32)


def normalize_batch(frames, normalization: dict | None = None) -> np.ndarray:
    """(n, 64, 64) uint8 -> (n, 1, 64, 64) float32."""
    frames = np.asarray(frames)
    if frames.ndim != 3 or frames.shape[1:] != (64, 64):
        raise ShapeError(f"expected (n, 64, 64) frames, got {frames.shape}")
    norm = normalization or DEFAULT_NORMALIZATION
    scale, mean, std = norm["scale"], norm["mean"], norm["std"]
    out = (frames.astype(np.float32) / scale - mean) / std
    return out[:, None, :, :]


@dataclass
class AugmentConfig:
    """Horizontal flip plus one small affine map (rotate/translate/scale)."""

    flip_prob: float = 0.5
    max_rotation_deg: float = 10.0
    max_translate_frac: float = 0.05
    scale_range: tuple = (0.95, 1.05)
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.flip_prob <= 1:
            raise InvalidArgument("flip_prob must lie in [0, 1]")
        if self.max_rotation_deg < 0 or self.max_translate_frac < 0:
            raise InvalidArgument("augmentation magnitudes must be non-negative")
        lo, hi = self.scale_range
        if not 0 < lo <= hi:
            raise InvalidArgument("scale_range must be positive and ordered")


def augment(frame, config: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """Augmented uint8 copy of a 64x64 frame.

    Draw order is fixed (flip, rotation, translation x/y, scale) so a seeded
    RNG reproduces the exact same output.  Out-of-bounds reads fill with 0;
    bilinear sampling at an identity transform returns the input unchanged.
    """
    frame = np.asarray(frame)
    if frame.shape != (64, 64):
        raise ShapeError(f"expected a 64x64 frame, got {frame.shape}")
    side = 64

    flipped = rng.random() < config.flip_prob
    theta = np.deg2rad(rng.uniform(-config.max_rotation_deg, config.max_rotation_deg))
    max_t = config.max_translate_frac * side
    tx = rng.uniform(-max_t, max_t)
    ty = rng.uniform(-max_t, max_t)
    scale = rng.uniform(config.scale_range[0], config.scale_range[1])

    src = frame[:, ::-1] if flipped else frame
    if theta == 0.0 and tx == 0.0 and ty == 0.0 and scale == 1.0:
        return np.array(src, dtype=np.uint8)

    # Destination pixel -> source coordinate: invert (rotate, scale, translate)
    # applied about the image center.
    center = (side - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    u = xx - center - tx
    v = yy - center - ty
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    sx = (cos_t * u + sin_t * v) / scale + center
    sy = (-sin_t * u + cos_t * v) / scale + center
    return _bilinear_sample(src, sx, sy)


def _bilinear_sample(img, sx, sy) -> np.ndarray:
    """Bilinear lookup of float coordinates; out-of-bounds reads as 0."""
    h, w = img.shape
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    def at(yi, xi):
        inside = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        vals = img[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)].astype(np.float64)
        return np.where(inside, vals, 0.0)

    top = at(y0, x0) * (1 - fx) + at(y0, x0 + 1) * fx
    bot = at(y0 + 1, x0) * (1 - fx) + at(y0 + 1, x0 + 1) * fx
    out = top * (1 - fy) + bot * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
