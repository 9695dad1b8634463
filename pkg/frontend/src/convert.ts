/**
 * Dataset converters.  Both paths emit the same bundle layout: frames are
 * resized to 64x64 grayscale, and the manifest records carry ids, binary
 * labels, and split assignments.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { ValidationError } from "./errors.js";
import { readNpz, type NpyArray } from "./npz.js";
import { decodePngToGray } from "./png.js";
import { frameFromStack, resizeGray, FRAME_SIZE } from "./image.js";
import { writeBundle, type Bundle, type BundleRecord, type Split } from "./bundle.js";

const SPLITS: Split[] = ["train", "val", "test"];

/** Default filename convention: a _0 or _1 suffix right before the extension. */
export const DEFAULT_LABEL_PATTERN = "_([01])\\.[^.]+$";

function labelValues(name: string, arr: NpyArray): number[] {
  const ok =
    arr.shape.length === 1 || (arr.shape.length === 2 && arr.shape[1] === 1);
  if (!ok) {
    throw new ValidationError(`${name}: labels must be shaped (n,) or (n, 1)`);
  }
  return Array.from(arr.data);
}

/**
 * Convert a dataset archive with official train/val/test members into a
 * bundle.  Split assignments from the archive are preserved as-is.
 */
export function convertMedmnist(srcFile: string, outDir: string): Bundle {
  const archive = readNpz(fs.readFileSync(srcFile));
  const records: BundleRecord[] = [];
  const frames: Uint8Array[] = [];
  for (const split of SPLITS) {
    const images = archive.get(`${split}_images`);
    const labels = archive.get(`${split}_labels`);
    if (images === undefined || labels === undefined) {
      throw new ValidationError(`${srcFile}: missing ${split}_images or ${split}_labels`);
    }
    const values = labelValues(`${split}_labels`, labels);
    if (values.length !== images.shape[0]) {
      throw new ValidationError(
        `${srcFile}: ${split} has ${images.shape[0]} images but ${values.length} labels`,
      );
    }
    for (let i = 0; i < values.length; i++) {
      const label = values[i]!;
      if (label !== 0 && label !== 1) {
        throw new ValidationError(`${srcFile}: ${split}[${i}] has non-binary label ${label}`);
      }
      records.push({ id: `${split}-${String(i).padStart(5, "0")}`, label, split });
      frames.push(resizeGray(frameFromStack(images, i), FRAME_SIZE, FRAME_SIZE).pixels);
    }
  }
  const bundle: Bundle = { source: `medmnist:${path.basename(srcFile)}`, records, frames };
  writeBundle(outDir, bundle);
  return bundle;
}

/**
 * Convert a directory of PNG files into a bundle.  Labels come from a
 * capture group in `labelPattern` applied to each filename; records are
 * ordered by filename and left unassigned to splits so a downstream
 * splitter can decide.  All unusable files are reported together.
 */
export function convertImageDir(
  srcDir: string,
  outDir: string,
  labelPattern: string = DEFAULT_LABEL_PATTERN,
): Bundle {
  let pattern: RegExp;
  try {
    pattern = new RegExp(labelPattern);
  } catch (err) {
    throw new ValidationError(`bad label pattern: ${(err as Error).message}`);
  }
  const names = fs
    .readdirSync(srcDir)
    .filter((name) => name.toLowerCase().endsWith(".png"))
    .sort();
  if (names.length === 0) {
    throw new ValidationError(`${srcDir}: no .png files found`);
  }
  const records: BundleRecord[] = [];
  const frames: Uint8Array[] = [];
  const problems: string[] = [];
  for (const name of names) {
    const match = pattern.exec(name);
    if (match === null || match[1] === undefined) {
      problems.push(`${name}: filename does not match label pattern`);
      continue;
    }
    const label = Number(match[1]);
    if (label !== 0 && label !== 1) {
      problems.push(`${name}: label ${match[1]} is not 0 or 1`);
      continue;
    }
    try {
      const gray = decodePngToGray(fs.readFileSync(path.join(srcDir, name)));
      frames.push(resizeGray(gray, FRAME_SIZE, FRAME_SIZE).pixels);
    } catch (err) {
      problems.push(`${name}: ${(err as Error).message}`);
      continue;
    }
    records.push({
      id: name.replace(/\.[^.]+$/, ""),
      label: label as 0 | 1,
      split: "unassigned",
    });
  }
  if (problems.length > 0) {
    throw new ValidationError(
      `${problems.length} file(s) could not be converted:\n  ` + problems.join("\n  "),
    );
  }
  const bundle: Bundle = { source: `image-dir:${path.basename(srcDir)}`, records, frames };
  writeBundle(outDir, bundle);
  return bundle;
}
