/**
 * Grayscale frame utilities: bilinear resampling to the bundle frame size
 * and slicing frames out of stacked dataset arrays.
 */

import { ValidationError } from "./errors.js";
import type { GrayImage } from "./png.js";
import type { NpyArray } from "./npz.js";

export const FRAME_SIZE = 64;

/**
 * Resize an 8-bit grayscale image with bilinear interpolation.
 *
 * Sample positions use half-pixel centers: output pixel i maps to source
 * coordinate clip((i + 0.5) * scale - 0.5, 0, n - 1), which keeps edges
 * aligned for both up- and down-scaling.
 */
export function resizeGray(image: GrayImage, outWidth: number, outHeight: number): GrayImage {
  if (outWidth < 1 || outHeight < 1) {
    throw new ValidationError("resize target must be at least 1x1");
  }
  const { width, height, pixels } = image;
  if (pixels.length !== width * height) {
    throw new ValidationError("image buffer does not match its dimensions");
  }
  const out = new Uint8Array(outWidth * outHeight);
  const scaleX = width / outWidth;
  const scaleY = height / outHeight;
  for (let oy = 0; oy < outHeight; oy++) {
    let sy = (oy + 0.5) * scaleY - 0.5;
    sy = Math.min(Math.max(sy, 0), height - 1);
    const y0 = Math.floor(sy);
    const y1 = Math.min(y0 + 1, height - 1);
    const fy = sy - y0;
    for (let ox = 0; ox < outWidth; ox++) {
      let sx = (ox + 0.5) * scaleX - 0.5;
      sx = Math.min(Math.max(sx, 0), width - 1);
      const x0 = Math.floor(sx);
      const x1 = Math.min(x0 + 1, width - 1);
      const fx = sx - x0;
      const top = pixels[y0 * width + x0]! * (1 - fx) + pixels[y0 * width + x1]! * fx;
      const bottom = pixels[y1 * width + x0]! * (1 - fx) + pixels[y1 * width + x1]! * fx;
      out[oy * outWidth + ox] = Math.round(top * (1 - fy) + bottom * fy);
    }
  }
  return { width: outWidth, height: outHeight, pixels: out };
}

/**
 * View frame `index` of a stacked array shaped (n, h, w) or (n, h, w, 3),
 * collapsing RGB to luma when a channel axis is present.
 */
export function frameFromStack(stack: NpyArray, index: number): GrayImage {
  const shape = stack.shape;
  if (shape.length !== 3 && !(shape.length === 4 && shape[3] === 3)) {
    throw new ValidationError(`image stack has unsupported shape (${shape.join(", ")})`);
  }
  const n = shape[0]!;
  const h = shape[1]!;
  const w = shape[2]!;
  if (index < 0 || index >= n) {
    throw new ValidationError(`frame index ${index} out of range for stack of ${n}`);
  }
  if (shape.length === 3) {
    const start = index * h * w;
    return { width: w, height: h, pixels: stack.data.subarray(start, start + h * w) };
  }
  const pixels = new Uint8Array(h * w);
  const start = index * h * w * 3;
  for (let i = 0; i < h * w; i++) {
    const r = stack.data[start + i * 3]!;
    const g = stack.data[start + i * 3 + 1]!;
    const b = stack.data[start + i * 3 + 2]!;
    pixels[i] = Math.round(0.299 * r + 0.587 * g + 0.114 * b);
  }
  return { width: w, height: h, pixels };
}

/** Raw bytes of one frame in a stack, untouched by any resizing. */
export function frameBytes(stack: NpyArray, index: number): Uint8Array {
  const shape = stack.shape;
  const per = shape.slice(1).reduce((a, b) => a * b, 1);
  if (index < 0 || index >= (shape[0] ?? 0)) {
    throw new ValidationError(`frame index ${index} out of range`);
  }
  return stack.data.subarray(index * per, (index + 1) * per);
}
