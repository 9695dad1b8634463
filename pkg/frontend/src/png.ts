/**
 * Minimal PNG reader.
 *
 * Supports the subset of the format that chest X-ray exports actually use:
 * 8-bit depth, grayscale / RGB / grayscale+alpha / RGBA color types, no
 * interlacing.  Anything else is rejected with a clear message rather than
 * decoded approximately.
 */

import { inflateSync } from "node:zlib";
import { ValidationError } from "./errors.js";

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major uint8 luma samples, length width * height. */
  pixels: Uint8Array;
}

interface Header {
  width: number;
  height: number;
  bitDepth: number;
  colorType: number;
  interlace: number;
}

function channelsFor(colorType: number): number {
  switch (colorType) {
    case 0:
      return 1; // grayscale
    case 2:
      return 3; // RGB
    case 4:
      return 2; // grayscale + alpha
    case 6:
      return 4; // RGBA
    default:
      throw new ValidationError(`unsupported PNG color type ${colorType}`);
  }
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

function unfilter(raw: Buffer, width: number, height: number, bpp: number): Uint8Array {
  const stride = width * bpp;
  if (raw.length < height * (stride + 1)) {
    throw new ValidationError("PNG pixel data is truncated");
  }
  const out = new Uint8Array(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)]!;
    const rowIn = raw.subarray(y * (stride + 1) + 1, y * (stride + 1) + 1 + stride);
    const rowOut = out.subarray(y * stride, (y + 1) * stride);
    const prev = y > 0 ? out.subarray((y - 1) * stride, y * stride) : null;
    for (let x = 0; x < stride; x++) {
      const left = x >= bpp ? rowOut[x - bpp]! : 0;
      const up = prev ? prev[x]! : 0;
      const upLeft = prev && x >= bpp ? prev[x - bpp]! : 0;
      const v = rowIn[x]!;
      let recon: number;
      switch (filter) {
        case 0:
          recon = v;
          break;
        case 1:
          recon = v + left;
          break;
        case 2:
          recon = v + up;
          break;
        case 3:
          recon = v + ((left + up) >> 1);
          break;
        case 4:
          recon = v + paeth(left, up, upLeft);
          break;
        default:
          throw new ValidationError(`unsupported PNG filter type ${filter}`);
      }
      rowOut[x] = recon & 0xff;
    }
  }
  return out;
}

function parseChunks(data: Buffer): { header: Header; idat: Buffer } {
  if (data.length < 8 || !data.subarray(0, 8).equals(SIGNATURE)) {
    throw new ValidationError("not a PNG file (bad signature)");
  }
  let offset = 8;
  let header: Header | null = null;
  const idatParts: Buffer[] = [];
  while (offset + 8 <= data.length) {
    const length = data.readUInt32BE(offset);
    const type = data.toString("latin1", offset + 4, offset + 8);
    const body = data.subarray(offset + 8, offset + 8 + length);
    if (body.length < length) {
      throw new ValidationError(`PNG chunk ${type} is truncated`);
    }
    if (type === "IHDR") {
      header = {
        width: body.readUInt32BE(0),
        height: body.readUInt32BE(4),
        bitDepth: body.readUInt8(8),
        colorType: body.readUInt8(9),
        interlace: body.readUInt8(12),
      };
    } else if (type === "IDAT") {
      idatParts.push(body);
    } else if (type === "IEND") {
      break;
    }
    offset += 12 + length; // length + type + body + crc
  }
  if (header === null) {
    throw new ValidationError("PNG file has no IHDR chunk");
  }
  if (idatParts.length === 0) {
    throw new ValidationError("PNG file has no IDAT chunks");
  }
  return { header, idat: Buffer.concat(idatParts) };
}

/** Decode a PNG buffer to 8-bit grayscale, collapsing color via ITU-R 601 luma. */
export function decodePngToGray(data: Buffer): GrayImage {
  const { header, idat } = parseChunks(data);
  if (header.bitDepth !== 8) {
    throw new ValidationError(`unsupported PNG bit depth ${header.bitDepth} (need 8)`);
  }
  if (header.interlace !== 0) {
    throw new ValidationError("interlaced PNG files are not supported");
  }
  if (header.width < 1 || header.height < 1) {
    throw new ValidationError("PNG has empty dimensions");
  }
  const channels = channelsFor(header.colorType);
  let raw: Buffer;
  try {
    raw = inflateSync(idat);
  } catch (err) {
    throw new ValidationError(`PNG pixel data failed to decompress: ${(err as Error).message}`);
  }
  const samples = unfilter(raw, header.width, header.height, channels);
  const n = header.width * header.height;
  const pixels = new Uint8Array(n);
  if (channels === 1) {
    pixels.set(samples);
  } else if (channels === 2) {
    for (let i = 0; i < n; i++) pixels[i] = samples[i * 2]!;
  } else {
    for (let i = 0; i < n; i++) {
      const r = samples[i * channels]!;
      const g = samples[i * channels + 1]!;
      const b = samples[i * channels + 2]!;
      pixels[i] = Math.round(0.299 * r + 0.587 * g + 0.114 * b);
    }
  }
  return { width: header.width, height: header.height, pixels };
}
