/**
 * Offline stand-in encoder.
 *
 * Real vision-language checkpoints cannot be fetched in an offline
 * deployment, so the only model this tool ships is a deterministic stub that
 * hashes its input into a unit vector.  The stub keeps the full extraction
 * pipeline exercisable end to end (file formats, ordering, determinism)
 * while making no claim about semantic quality.  Pointing --model at
 * anything else aborts with an explanatory message instead of silently
 * substituting the stub.
 */

import { createHash } from "node:crypto";
import { ValidationError } from "./errors.js";

export const STUB_MODEL_ID = "hash-stub-512";
export const EMBED_DIM = 512;
export const LOGIT_SCALE = 100.0;

function hashToUnitVector(seed: Buffer): Float32Array {
  // Expand the seed into EMBED_DIM floats by chaining sha256 over a counter,
  // mapping each 4-byte word to [-1, 1), then normalizing to unit length.
  const values = new Float64Array(EMBED_DIM);
  let produced = 0;
  let counter = 0;
  while (produced < EMBED_DIM) {
    const block = createHash("sha256")
      .update(seed)
      .update(Buffer.from(String(counter)))
      .digest();
    for (let i = 0; i + 4 <= block.length && produced < EMBED_DIM; i += 4) {
      values[produced] = (block.readUInt32BE(i) / 0xffffffff) * 2 - 1;
      produced += 1;
    }
    counter += 1;
  }
  let norm = 0;
  for (let i = 0; i < EMBED_DIM; i++) norm += values[i]! * values[i]!;
  norm = Math.sqrt(norm);
  const out = new Float32Array(EMBED_DIM);
  for (let i = 0; i < EMBED_DIM; i++) out[i] = values[i]! / norm;
  return out;
}

export interface Encoder {
  modelId: string;
  dim: number;
  logitScale: number;
  encodeImage(bytes: Uint8Array): Float32Array;
  encodeText(text: string): Float32Array;
}

export function loadEncoder(modelId: string): Encoder {
  if (modelId !== STUB_MODEL_ID) {
    throw new ValidationError(
      `model ${modelId} is not available: this tool runs offline and ships only ` +
        `the deterministic ${STUB_MODEL_ID} encoder`,
    );
  }
  return {
    modelId: STUB_MODEL_ID,
    dim: EMBED_DIM,
    logitScale: LOGIT_SCALE,
    encodeImage(bytes: Uint8Array): Float32Array {
      const digest = createHash("sha256").update("image:").update(bytes).digest();
      return hashToUnitVector(digest);
    },
    encodeText(text: string): Float32Array {
      const digest = createHash("sha256").update("text:").update(text, "utf8").digest();
      return hashToUnitVector(digest);
    },
  };
}
