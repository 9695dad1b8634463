/**
 * Reader for .npz archives (zip files whose members are .npy arrays).
 *
 * Only what dataset archives need is implemented: stored and deflated zip
 * members, and uint8 .npy payloads in C order.  The zip is walked through its
 * central directory so archives written with data descriptors load fine.
 */

import { inflateRawSync } from "node:zlib";
import { ValidationError } from "./errors.js";

const EOCD_SIG = 0x06054b50;
const CENTRAL_SIG = 0x02014b50;
const LOCAL_SIG = 0x04034b50;

export interface NpyArray {
  shape: number[];
  /** Flat C-order uint8 samples. */
  data: Uint8Array;
}

interface ZipEntry {
  name: string;
  method: number;
  compressedSize: number;
  localOffset: number;
}

function findEocd(buf: Buffer): number {
  // EOCD is at the tail, possibly followed by a zip comment (<= 65535 bytes).
  const start = Math.max(0, buf.length - 22 - 65535);
  for (let i = buf.length - 22; i >= start; i--) {
    if (buf.readUInt32LE(i) === EOCD_SIG) {
      return i;
    }
  }
  throw new ValidationError("not a zip archive (no end-of-central-directory record)");
}

function readEntries(buf: Buffer): ZipEntry[] {
  const eocd = findEocd(buf);
  const count = buf.readUInt16LE(eocd + 10);
  let offset = buf.readUInt32LE(eocd + 16);
  const entries: ZipEntry[] = [];
  for (let i = 0; i < count; i++) {
    if (offset + 46 > buf.length || buf.readUInt32LE(offset) !== CENTRAL_SIG) {
      throw new ValidationError("zip central directory is corrupt");
    }
    const method = buf.readUInt16LE(offset + 10);
    const compressedSize = buf.readUInt32LE(offset + 20);
    const nameLen = buf.readUInt16LE(offset + 28);
    const extraLen = buf.readUInt16LE(offset + 30);
    const commentLen = buf.readUInt16LE(offset + 32);
    const localOffset = buf.readUInt32LE(offset + 42);
    const name = buf.toString("utf8", offset + 46, offset + 46 + nameLen);
    entries.push({ name, method, compressedSize, localOffset });
    offset += 46 + nameLen + extraLen + commentLen;
  }
  return entries;
}

function memberBytes(buf: Buffer, entry: ZipEntry): Buffer {
  const at = entry.localOffset;
  if (at + 30 > buf.length || buf.readUInt32LE(at) !== LOCAL_SIG) {
    throw new ValidationError(`zip member ${entry.name}: bad local header`);
  }
  const nameLen = buf.readUInt16LE(at + 26);
  const extraLen = buf.readUInt16LE(at + 28);
  const dataStart = at + 30 + nameLen + extraLen;
  const raw = buf.subarray(dataStart, dataStart + entry.compressedSize);
  if (raw.length < entry.compressedSize) {
    throw new ValidationError(`zip member ${entry.name} is truncated`);
  }
  if (entry.method === 0) {
    return Buffer.from(raw);
  }
  if (entry.method === 8) {
    try {
      return inflateRawSync(raw);
    } catch (err) {
      throw new ValidationError(
        `zip member ${entry.name} failed to decompress: ${(err as Error).message}`,
      );
    }
  }
  throw new ValidationError(`zip member ${entry.name}: unsupported compression method ${entry.method}`);
}

function parseNpy(name: string, bytes: Buffer): NpyArray {
  if (bytes.length < 10 || bytes.toString("latin1", 0, 6) !== "\x93NUMPY") {
    throw new ValidationError(`array ${name}: not a .npy payload`);
  }
  const major = bytes.readUInt8(6);
  let headerLen: number;
  let headerStart: number;
  if (major === 1) {
    headerLen = bytes.readUInt16LE(8);
    headerStart = 10;
  } else if (major === 2 || major === 3) {
    headerLen = bytes.readUInt32LE(8);
    headerStart = 12;
  } else {
    throw new ValidationError(`array ${name}: unsupported .npy version ${major}`);
  }
  const header = bytes.toString("latin1", headerStart, headerStart + headerLen);
  const descr = /'descr'\s*:\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order'\s*:\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape'\s*:\s*\(([^)]*)\)/.exec(header)?.[1];
  if (descr === undefined || fortran === undefined || shapeText === undefined) {
    throw new ValidationError(`array ${name}: malformed .npy header`);
  }
  if (descr !== "|u1" && descr !== "u1" && descr !== "<u1") {
    throw new ValidationError(`array ${name}: unsupported dtype ${descr} (need uint8)`);
  }
  if (fortran !== "False") {
    throw new ValidationError(`array ${name}: Fortran-order arrays are not supported`);
  }
  const shape = shapeText
    .split(",")
    .map((part) => part.trim())
    .filter((part) => part.length > 0)
    .map((part) => {
      const v = Number(part);
      if (!Number.isInteger(v) || v < 0) {
        throw new ValidationError(`array ${name}: bad shape entry ${part}`);
      }
      return v;
    });
  const size = shape.reduce((a, b) => a * b, 1);
  const body = bytes.subarray(headerStart + headerLen);
  if (body.length < size) {
    throw new ValidationError(`array ${name}: payload is truncated`);
  }
  return { shape, data: new Uint8Array(body.subarray(0, size)) };
}

/** Load every array in an .npz buffer, keyed by member name without the .npy suffix. */
export function readNpz(buf: Buffer): Map<string, NpyArray> {
  const out = new Map<string, NpyArray>();
  for (const entry of readEntries(buf)) {
    const key = entry.name.endsWith(".npy") ? entry.name.slice(0, -4) : entry.name;
    out.set(key, parseNpy(key, memberBytes(buf, entry)));
  }
  return out;
}
