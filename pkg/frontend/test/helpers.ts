/**
 * Shared test utilities: tiny PNG and .npz writers so fixtures need no
 * external assets, plus a runner for the Python evaluation CLI.
 */

import { deflateSync, deflateRawSync, crc32 } from "node:zlib";
import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

export function tmpdir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), `${prefix}-`));
}

function chunk(type: string, body: Buffer): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(body.length, 0);
  head.write(type, 4, "latin1");
  const crcBuf = Buffer.alloc(4);
  crcBuf.writeUInt32BE(crc32(Buffer.concat([Buffer.from(type, "latin1"), body])) >>> 0, 0);
  return Buffer.concat([head, body, crcBuf]);
}

/** Encode an 8-bit image as a PNG.  channels: 1 = gray, 3 = RGB. */
export function encodePng(
  width: number,
  height: number,
  samples: Uint8Array,
  channels: 1 | 3 = 1,
): Buffer {
  if (samples.length !== width * height * channels) {
    throw new Error("sample buffer does not match dimensions");
  }
  const colorType = channels === 1 ? 0 : 2;
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr.writeUInt8(8, 8); // bit depth
  ihdr.writeUInt8(colorType, 9);
  // compression, filter, interlace all zero
  const stride = width * channels;
  const raw = Buffer.alloc(height * (stride + 1));
  for (let y = 0; y < height; y++) {
    raw[y * (stride + 1)] = 0; // filter: none
    Buffer.from(samples.buffer, samples.byteOffset + y * stride, stride).copy(
      raw,
      y * (stride + 1) + 1,
    );
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw)),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

function npyBytes(shape: number[], data: Uint8Array): Buffer {
  const shapeText =
    shape.length === 1 ? `(${shape[0]},)` : `(${shape.join(", ")})`;
  let header = `{'descr': '|u1', 'fortran_order': False, 'shape': ${shapeText}, }`;
  const unpadded = 10 + header.length + 1;
  header += " ".repeat((64 - (unpadded % 64)) % 64) + "\n";
  const head = Buffer.alloc(10);
  head.write("\x93NUMPY", 0, "latin1");
  head.writeUInt8(1, 6);
  head.writeUInt8(0, 7);
  head.writeUInt16LE(header.length, 8);
  return Buffer.concat([head, Buffer.from(header, "latin1"), Buffer.from(data)]);
}

export interface NpzMember {
  name: string;
  shape: number[];
  data: Uint8Array;
  /** Store this member deflated instead of uncompressed. */
  compress?: boolean;
}

/** Build an .npz (zip of .npy members) the way numpy's savez family lays it out. */
export function encodeNpz(members: NpzMember[]): Buffer {
  const parts: Buffer[] = [];
  const central: Buffer[] = [];
  let offset = 0;
  for (const member of members) {
    const name = `${member.name}.npy`;
    const nameBuf = Buffer.from(name, "utf8");
    const payload = npyBytes(member.shape, member.data);
    const stored = member.compress ? deflateRawSync(payload) : payload;
    const method = member.compress ? 8 : 0;
    const crc = crc32(payload) >>> 0;

    const local = Buffer.alloc(30);
    local.writeUInt32LE(0x04034b50, 0);
    local.writeUInt16LE(20, 4); // version needed
    local.writeUInt16LE(method, 8);
    local.writeUInt32LE(crc, 14);
    local.writeUInt32LE(stored.length, 18);
    local.writeUInt32LE(payload.length, 22);
    local.writeUInt16LE(nameBuf.length, 26);
    parts.push(local, nameBuf, stored);

    const entry = Buffer.alloc(46);
    entry.writeUInt32LE(0x02014b50, 0);
    entry.writeUInt16LE(20, 6); // version needed
    entry.writeUInt16LE(method, 10);
    entry.writeUInt32LE(crc, 16);
    entry.writeUInt32LE(stored.length, 20);
    entry.writeUInt32LE(payload.length, 24);
    entry.writeUInt16LE(nameBuf.length, 28);
    entry.writeUInt32LE(offset, 42);
    central.push(entry, nameBuf);

    offset += local.length + nameBuf.length + stored.length;
  }
  const centralBuf = Buffer.concat(central);
  const eocd = Buffer.alloc(22);
  eocd.writeUInt32LE(0x06054b50, 0);
  eocd.writeUInt16LE(members.length, 8);
  eocd.writeUInt16LE(members.length, 10);
  eocd.writeUInt32LE(centralBuf.length, 12);
  eocd.writeUInt32LE(offset, 16);
  return Buffer.concat([...parts, centralBuf, eocd]);
}

export interface PyResult {
  status: number;
  stdout: string;
  stderr: string;
}

/** Run the Python evaluation CLI in-process-free fashion via a subprocess. */
export function runPythonCli(args: string[]): PyResult {
  const proc = spawnSync("python3", ["-m", "xraybench.cli", ...args], {
    encoding: "utf8",
    timeout: 120_000,
  });
  if (proc.error) {
    throw proc.error;
  }
  return { status: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}
