#!/usr/bin/env node
/**
 * Command line entry point.
 *
 * Exit codes: 0 on success, 2 for usage or validation problems, 4 for
 * filesystem errors.
 */

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import { ValidationError, isFsError } from "./errors.js";
import { convertMedmnist, convertImageDir, DEFAULT_LABEL_PATTERN } from "./convert.js";
import { extract } from "./extract.js";
import { STUB_MODEL_ID } from "./encoder.js";

const USAGE = `usage: xraybench-tools <command> [options]

commands:
  convert   --source PATH --kind {medmnist,image-dir} --out DIR
            [--label-pattern REGEX]
  extract   --bundle DIR --images-src PATH --prompts FILE --out DIR
            [--model ID] [--split NAME]

convert turns a source dataset into a 64x64 grayscale bundle
(manifest.json + images.bin).  extract encodes the original images and a
prompt file into an embedding set (embeddings.json + vectors.bin +
prompt_vectors.bin) using the offline ${STUB_MODEL_ID} encoder.
`;

function requireOption(values: Record<string, unknown>, name: string): string {
  const value = values[name];
  if (typeof value !== "string" || value.length === 0) {
    throw new ValidationError(`missing required option --${name}`);
  }
  return value;
}

function runConvert(argv: string[]): void {
  const { values } = parseArgs({
    args: argv,
    options: {
      source: { type: "string" },
      kind: { type: "string" },
      out: { type: "string" },
      "label-pattern": { type: "string" },
    },
  });
  const source = requireOption(values, "source");
  const kind = requireOption(values, "kind");
  const out = requireOption(values, "out");
  if (kind === "medmnist") {
    const bundle = convertMedmnist(source, out);
    process.stdout.write(`wrote bundle with ${bundle.records.length} records to ${out}\n`);
  } else if (kind === "image-dir") {
    const bundle = convertImageDir(source, out, values["label-pattern"] ?? DEFAULT_LABEL_PATTERN);
    process.stdout.write(`wrote bundle with ${bundle.records.length} records to ${out}\n`);
  } else {
    throw new ValidationError(`unknown kind ${kind} (expected medmnist or image-dir)`);
  }
}

function runExtract(argv: string[]): void {
  const { values } = parseArgs({
    args: argv,
    options: {
      bundle: { type: "string" },
      "images-src": { type: "string" },
      prompts: { type: "string" },
      model: { type: "string", default: STUB_MODEL_ID },
      out: { type: "string" },
      split: { type: "string" },
    },
  });
  const set = extract({
    bundleDir: requireOption(values, "bundle"),
    imagesSrc: requireOption(values, "images-src"),
    promptsFile: requireOption(values, "prompts"),
    model: values.model ?? STUB_MODEL_ID,
    outDir: requireOption(values, "out"),
    split: values.split,
  });
  process.stdout.write(`wrote ${set.ids.length} embeddings (dim ${set.dim}) to ${requireOption(values, "out")}\n`);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "convert") {
      runConvert(rest);
    } else if (command === "extract") {
      runExtract(rest);
    } else if (command === undefined || command === "--help" || command === "-h") {
      process.stdout.write(USAGE);
      return command === undefined ? 2 : 0;
    } else {
      throw new ValidationError(`unknown command ${command}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof ValidationError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    if (
      err instanceof TypeError &&
      "code" in err &&
      String((err as { code: unknown }).code).startsWith("ERR_PARSE_ARGS")
    ) {
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    if (isFsError(err)) {
      process.stderr.write(`error: ${err.message}\n`);
      return 4;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
