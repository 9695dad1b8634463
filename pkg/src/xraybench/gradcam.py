"""Class activation maps over the deepest feature block, plus PPM overlays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InvalidArgument, ShapeError
from .nn import CnnModel, model_forward

FEATURE_SIDE = 8  # spatial side of the hooked feature block
IMAGE_SIDE = 64


@dataclass
class GradCamMap:
    heat: np.ndarray  # (64, 64) float64 in [0, 1]
    target_class: int
    alphas: np.ndarray  # (64,) channel weights
    raw: np.ndarray  # (8, 8) pre-normalization map


def gradcam(model: CnnModel, image, target_class: int | None = None) -> GradCamMap:
    """Localization map for one image.

    The hook point is the final feature block (64 channels at 8x8, after
    its pooling stage).  Channel weights are the spatial means of the
    target logit's gradient there; the weighted sum is rectified, upsampled
    bilinearly to the input size, and scaled so its maximum is 1.  A map
    with no positive response stays all zero.
    """
    logits, trace = model_forward(model, image)
    if target_class is None:
        target_class = int(np.argmax(logits))
    if target_class not in (0, 1):
        raise InvalidArgument(f"target_class must be 0 or 1, got {target_class!r}")

    features = trace.pool3[0].astype(np.float64)  # (64, 8, 8)

    # The hook sits past the conv stack, so the chain back from the logit
    # only crosses the two dense layers.
    d_hidden = model.fc2.weight[target_class].astype(np.float64)
    d_pre = d_hidden * (trace.hidden[0] > 0)
    d_flat = d_pre @ model.fc1.weight.astype(np.float64)
    d_features = d_flat.reshape(features.shape)

    alphas = d_features.mean(axis=(1, 2))
    raw = np.maximum(np.tensordot(alphas, features, axes=1), 0.0)
    heat = upsample_bilinear(raw, IMAGE_SIDE)
    peak = float(heat.max())
    if peak > 0:
        heat = heat / peak
    return GradCamMap(
        heat=heat, target_class=target_class, alphas=alphas, raw=raw
    )


def upsample_bilinear(grid, out_side: int) -> np.ndarray:
    """Resize a square map with the half-pixel-center convention.

    Destination pixel centers map to ``(i + 0.5) * in/out - 0.5`` in source
    coordinates, clamped to the valid range before interpolation.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise ShapeError(f"expected a square 2-d map, got {grid.shape}")
    in_side = grid.shape[0]
    scale = in_side / out_side
    coords = np.clip((np.arange(out_side) + 0.5) * scale - 0.5, 0, in_side - 1)
    lo = np.floor(coords).astype(np.int64)
    hi = np.minimum(lo + 1, in_side - 1)
    frac = coords - lo

    rows = grid[lo][:, hi] * frac[None, :] + grid[lo][:, lo] * (1 - frac[None, :])
    rows_hi = grid[hi][:, hi] * frac[None, :] + grid[hi][:, lo] * (1 - frac[None, :])
    return rows * (1 - frac[:, None]) + rows_hi * frac[:, None]


def emit_overlay(frame, heat, path: str | None = None) -> bytes:
    """Binary PPM (P6) with the map burned into the red channel.

    Red is pushed toward saturation in proportion to the heat value while
    green and blue keep the grayscale, so cold regions stay gray.  When
    ``path`` is given the stream is also written there.
    """
    frame = np.asarray(frame)
    heat = np.asarray(heat, dtype=np.float64)
    if frame.shape != (IMAGE_SIDE, IMAGE_SIDE):
        raise ShapeError(f"expected a 64x64 frame, got {frame.shape}")
    if heat.shape != (IMAGE_SIDE, IMAGE_SIDE):
        raise ShapeError(f"expected a 64x64 heatmap, got {heat.shape}")
    if heat.min() < 0 or heat.max() > 1:
        raise InvalidArgument("heatmap values must lie in [0, 1]")

    gray = frame.astype(np.float64)
    red = np.rint(gray + 0.5 * heat * (255.0 - gray)).astype(np.uint8)
    rgb = np.stack([red, frame.astype(np.uint8), frame.astype(np.uint8)], axis=-1)
    header = f"P6\n{IMAGE_SIDE} {IMAGE_SIDE}\n255\n".encode("ascii")
    blob = header + rgb.tobytes()
    if path is not None:
        with open(path, "wb") as fh:
            fh.write(blob)
    return blob


def parse_p6(blob: bytes) -> np.ndarray:
    """Decode a binary PPM produced by :func:`emit_overlay`; (h, w, 3) uint8."""
    if not blob.startswith(b"P6"):
        raise FormatError("not a P6 stream")
    parts = blob.split(b"\n", 3)
    if len(parts) < 4:
        raise FormatError("truncated P6 header")
    dims = parts[1].split()
    if len(dims) != 2:
        raise FormatError(f"bad P6 dimension line {parts[1]!r}")
    w, h = int(dims[0]), int(dims[1])
    if parts[2] != b"255":
        raise FormatError(f"unsupported maxval {parts[2]!r}")
    body = parts[3]
    if len(body) != w * h * 3:
        raise FormatError(f"P6 body holds {len(body)} bytes, expected {w * h * 3}")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
