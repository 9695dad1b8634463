/**
 * Embedding extraction: walk a bundle manifest in record order, encode each
 * sample's original image (not the 64x64 bundle frame) plus the prompt
 * strings, and write an embedding set the evaluation side can score.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { ValidationError } from "./errors.js";
import { readManifest, type Manifest } from "./bundle.js";
import { readNpz, type NpyArray } from "./npz.js";
import { frameBytes } from "./image.js";
import { loadEncoder, type Encoder } from "./encoder.js";
import { readPrompts, writeEmbeddingSet, type EmbeddingSet } from "./embeddings.js";

interface ImageSource {
  bytesFor(id: string): Uint8Array;
}

function npzSource(file: string): ImageSource {
  const archive = readNpz(fs.readFileSync(file));
  const stacks = new Map<string, NpyArray>();
  for (const split of ["train", "val", "test"]) {
    const stack = archive.get(`${split}_images`);
    if (stack !== undefined) {
      stacks.set(split, stack);
    }
  }
  if (stacks.size === 0) {
    throw new ValidationError(`${file}: archive has no *_images members`);
  }
  return {
    bytesFor(id: string): Uint8Array {
      const match = /^([a-z]+)-(\d+)$/.exec(id);
      const stack = match === null ? undefined : stacks.get(match[1]!);
      if (match === null || stack === undefined) {
        throw new ValidationError(`sample ${id}: no matching frame in ${file}`);
      }
      return frameBytes(stack, Number(match[2]));
    },
  };
}

function dirSource(dir: string): ImageSource {
  return {
    bytesFor(id: string): Uint8Array {
      const file = path.join(dir, `${id}.png`);
      if (!fs.existsSync(file)) {
        throw new ValidationError(`sample ${id}: ${file} does not exist`);
      }
      return fs.readFileSync(file);
    },
  };
}

function openImageSource(imagesSrc: string): ImageSource {
  const stat = fs.statSync(imagesSrc);
  if (stat.isDirectory()) {
    return dirSource(imagesSrc);
  }
  return npzSource(imagesSrc);
}

export interface ExtractOptions {
  bundleDir: string;
  imagesSrc: string;
  promptsFile: string;
  model: string;
  outDir: string;
  /** Keep only records whose manifest split matches (omit for all records). */
  split?: string;
}

function selectRecords(manifest: Manifest, split: string | undefined) {
  if (split === undefined) {
    return manifest.records;
  }
  const kept = manifest.records.filter((r) => r.split === split);
  if (kept.length === 0) {
    throw new ValidationError(`bundle has no records in split ${split}`);
  }
  return kept;
}

export function extract(options: ExtractOptions): EmbeddingSet {
  const manifest = readManifest(options.bundleDir);
  const records = selectRecords(manifest, options.split);
  const encoder: Encoder = loadEncoder(options.model);
  const prompts = readPrompts(options.promptsFile);
  const source = openImageSource(options.imagesSrc);

  const vectors: Float32Array[] = [];
  for (const record of records) {
    vectors.push(encoder.encodeImage(source.bytesFor(record.id)));
  }
  const promptVectors = [...prompts.class0, ...prompts.class1].map((p) =>
    encoder.encodeText(p),
  );
  const set: EmbeddingSet = {
    ids: records.map((r) => r.id),
    labels: records.map((r) => r.label),
    vectors,
    prompts,
    promptVectors,
    dim: encoder.dim,
    modelId: encoder.modelId,
    logitScale: encoder.logitScale,
  };
  writeEmbeddingSet(options.outDir, set);
  return set;
}
