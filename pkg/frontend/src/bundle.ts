/**
 * Writer for image bundles: a manifest.json plus a packed images.bin of
 * row-major uint8 frames, one per manifest record, in record order.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { ValidationError } from "./errors.js";
import { canonicalJson } from "./json.js";
import { FRAME_SIZE } from "./image.js";

export type Split = "train" | "val" | "test" | "unassigned";

export interface BundleRecord {
  id: string;
  label: 0 | 1;
  split: Split;
}

export interface Bundle {
  source: string;
  records: BundleRecord[];
  /** One frame per record, each FRAME_SIZE * FRAME_SIZE uint8 samples. */
  frames: Uint8Array[];
}

export function validateBundle(bundle: Bundle): void {
  if (bundle.records.length !== bundle.frames.length) {
    throw new ValidationError(
      `record count ${bundle.records.length} does not match frame count ${bundle.frames.length}`,
    );
  }
  const seen = new Set<string>();
  for (const record of bundle.records) {
    if (seen.has(record.id)) {
      throw new ValidationError(`duplicate record id ${record.id}`);
    }
    seen.add(record.id);
    if (record.label !== 0 && record.label !== 1) {
      throw new ValidationError(`record ${record.id}: label must be 0 or 1`);
    }
  }
  for (const [i, frame] of bundle.frames.entries()) {
    if (frame.length !== FRAME_SIZE * FRAME_SIZE) {
      throw new ValidationError(
        `frame ${i} has ${frame.length} samples, expected ${FRAME_SIZE * FRAME_SIZE}`,
      );
    }
  }
}

export function writeBundle(outDir: string, bundle: Bundle): void {
  validateBundle(bundle);
  const manifest = {
    width: FRAME_SIZE,
    height: FRAME_SIZE,
    count: bundle.records.length,
    source: bundle.source,
    normalization: { scale: 255, mean: 0.5, std: 0.5 },
    records: bundle.records.map((r) => ({ id: r.id, label: r.label, split: r.split })),
  };
  fs.mkdirSync(outDir, { recursive: true });
  fs.writeFileSync(path.join(outDir, "manifest.json"), canonicalJson(manifest));
  const packed = Buffer.concat(bundle.frames.map((f) => Buffer.from(f)));
  fs.writeFileSync(path.join(outDir, "images.bin"), packed);
}

export interface ManifestRecord {
  id: string;
  label: number;
  split: string;
}

export interface Manifest {
  width: number;
  height: number;
  count: number;
  source: string;
  records: ManifestRecord[];
}

/** Read just the manifest of an existing bundle (frames stay on disk). */
export function readManifest(bundleDir: string): Manifest {
  const file = path.join(bundleDir, "manifest.json");
  let parsed: unknown;
  try {
    parsed = JSON.parse(fs.readFileSync(file, "utf8"));
  } catch (err) {
    if (err instanceof SyntaxError) {
      throw new ValidationError(`${file}: manifest is not valid JSON`);
    }
    throw err;
  }
  const m = parsed as Manifest;
  if (!Array.isArray(m.records) || typeof m.count !== "number") {
    throw new ValidationError(`${file}: manifest is missing records or count`);
  }
  if (m.records.length !== m.count) {
    throw new ValidationError(`${file}: count ${m.count} does not match ${m.records.length} records`);
  }
  for (const record of m.records) {
    if (typeof record.id !== "string" || (record.label !== 0 && record.label !== 1)) {
      throw new ValidationError(`${file}: malformed record entries`);
    }
  }
  return m;
}
