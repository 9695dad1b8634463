/**
 * Writer for embedding sets: embeddings.json describing the set, vectors.bin
 * holding one little-endian float32 row per sample, and prompt_vectors.bin
 * holding the encoded prompt rows (all class0 prompts first, then class1).
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { ValidationError } from "./errors.js";
import { canonicalJson } from "./json.js";

export interface PromptSet {
  class0: string[];
  class1: string[];
}

export interface EmbeddingSet {
  ids: string[];
  labels: number[];
  vectors: Float32Array[];
  prompts: PromptSet;
  promptVectors: Float32Array[];
  dim: number;
  modelId: string;
  logitScale: number;
}

function packRows(rows: Float32Array[], dim: number, what: string): Buffer {
  const out = Buffer.alloc(rows.length * dim * 4);
  for (const [i, row] of rows.entries()) {
    if (row.length !== dim) {
      throw new ValidationError(`${what} row ${i} has dim ${row.length}, expected ${dim}`);
    }
    for (let j = 0; j < dim; j++) {
      out.writeFloatLE(row[j]!, (i * dim + j) * 4);
    }
  }
  return out;
}

export function writeEmbeddingSet(outDir: string, set: EmbeddingSet): void {
  if (set.ids.length !== set.labels.length || set.ids.length !== set.vectors.length) {
    throw new ValidationError("ids, labels, and vectors must have matching lengths");
  }
  const nPrompts = set.prompts.class0.length + set.prompts.class1.length;
  if (set.promptVectors.length !== nPrompts) {
    throw new ValidationError(
      `prompt vector count ${set.promptVectors.length} does not match ${nPrompts} prompts`,
    );
  }
  if (set.prompts.class0.length < 1 || set.prompts.class1.length < 1) {
    throw new ValidationError("each class needs at least one prompt");
  }
  const header = {
    count: set.ids.length,
    dim: set.dim,
    dtype: "f32le",
    ids: set.ids,
    labels: set.labels,
    logit_scale: set.logitScale,
    model_id: set.modelId,
    prompts: { class0: set.prompts.class0, class1: set.prompts.class1 },
  };
  fs.mkdirSync(outDir, { recursive: true });
  fs.writeFileSync(path.join(outDir, "embeddings.json"), canonicalJson(header));
  fs.writeFileSync(path.join(outDir, "vectors.bin"), packRows(set.vectors, set.dim, "vector"));
  fs.writeFileSync(
    path.join(outDir, "prompt_vectors.bin"),
    packRows(set.promptVectors, set.dim, "prompt vector"),
  );
}

/** Load a prompt file: a JSON object with class0 and class1 string lists. */
export function readPrompts(file: string): PromptSet {
  let parsed: unknown;
  try {
    parsed = JSON.parse(fs.readFileSync(file, "utf8"));
  } catch (err) {
    if (err instanceof SyntaxError) {
      throw new ValidationError(`${file}: prompt file is not valid JSON`);
    }
    throw err;
  }
  const p = parsed as PromptSet;
  for (const key of ["class0", "class1"] as const) {
    const list = p[key];
    if (!Array.isArray(list) || list.length < 1 || !list.every((s) => typeof s === "string" && s.length > 0)) {
      throw new ValidationError(`${file}: ${key} must be a non-empty list of strings`);
    }
  }
  return { class0: p.class0, class1: p.class1 };
}
