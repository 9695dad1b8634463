import { describe, expect, it } from "vitest";
import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";
import { decodePngToGray } from "../src/png.js";
import { ValidationError } from "../src/errors.js";
import { encodePng, tmpdir } from "./helpers.js";

function pythonPixels(file: string, mode: string): number[] {
  const script = `
from PIL import Image
im = Image.open(${JSON.stringify(file)}).convert(${JSON.stringify(mode)})
print(",".join(str(v) for v in im.tobytes()))
`;
  const proc = spawnSync("python3", ["-c", script], { encoding: "utf8" });
  if (proc.status !== 0) {
    throw new Error(`Pillow failed: ${proc.stderr}`);
  }
  return proc.stdout.trim().split(",").map(Number);
}

describe("decodePngToGray", () => {
  it("round-trips grayscale images from the test encoder exactly", () => {
    const pixels = new Uint8Array(6 * 4).map((_, i) => (i * 37) % 256);
    const decoded = decodePngToGray(encodePng(6, 4, pixels));
    expect(decoded.width).toBe(6);
    expect(decoded.height).toBe(4);
    expect(Array.from(decoded.pixels)).toEqual(Array.from(pixels));
  });

  it("agrees with Pillow on grayscale files Pillow wrote", () => {
    const dir = tmpdir("png");
    const file = path.join(dir, "gradient.png");
    const script = `
import numpy as np
from PIL import Image
rng = np.random.default_rng(5)
arr = (np.linspace(0, 255, 32 * 24).reshape(24, 32) + rng.integers(0, 40, (24, 32))).clip(0, 255)
Image.fromarray(arr.astype("uint8"), mode="L").save(${JSON.stringify(file)})
`;
    const proc = spawnSync("python3", ["-c", script], { encoding: "utf8" });
    expect(proc.status).toBe(0);
    const decoded = decodePngToGray(fs.readFileSync(file));
    expect(decoded.width).toBe(32);
    expect(decoded.height).toBe(24);
    expect(Array.from(decoded.pixels)).toEqual(pythonPixels(file, "L"));
  });

  it("is readable by Pillow when the test encoder wrote the file", () => {
    const dir = tmpdir("png");
    const file = path.join(dir, "ours.png");
    const pixels = new Uint8Array(8 * 8).map((_, i) => (i * 11 + 3) % 256);
    fs.writeFileSync(file, encodePng(8, 8, pixels));
    expect(pythonPixels(file, "L")).toEqual(Array.from(pixels));
  });

  it("collapses RGB to ITU-R 601 luma", () => {
    const rgb = new Uint8Array([255, 0, 0, 0, 255, 0, 0, 0, 255, 90, 90, 90]);
    const decoded = decodePngToGray(encodePng(2, 2, rgb, 3));
    expect(Array.from(decoded.pixels)).toEqual([
      Math.round(0.299 * 255),
      Math.round(0.587 * 255),
      Math.round(0.114 * 255),
      90,
    ]);
  });

  it("decodes files that use non-trivial scanline filters", () => {
    // Pillow picks Sub/Up/Average/Paeth filters on natural content; a noisy
    // gradient reliably exercises several of them.
    const dir = tmpdir("png");
    const file = path.join(dir, "filters.png");
    const script = `
import numpy as np
from PIL import Image
rng = np.random.default_rng(11)
row = np.arange(48, dtype=np.float64)
col = np.arange(40, dtype=np.float64)[:, None]
arr = (row + 2 * col + rng.normal(0, 12, (40, 48))).clip(0, 255).astype("uint8")
Image.fromarray(np.stack([arr, arr // 2, 255 - arr], axis=-1), mode="RGB").save(${JSON.stringify(file)})
`;
    const proc = spawnSync("python3", ["-c", script], { encoding: "utf8" });
    expect(proc.status).toBe(0);
    const expected = pythonPixels(file, "RGB");
    const decoded = decodePngToGray(fs.readFileSync(file));
    for (let i = 0; i < decoded.pixels.length; i++) {
      const r = expected[i * 3]!;
      const g = expected[i * 3 + 1]!;
      const b = expected[i * 3 + 2]!;
      expect(decoded.pixels[i]).toBe(Math.round(0.299 * r + 0.587 * g + 0.114 * b));
    }
  });

  it("rejects non-PNG bytes", () => {
    expect(() => decodePngToGray(Buffer.from("JFIF not png"))).toThrow(
      /bad signature/,
    );
  });

  it("rejects 16-bit files", () => {
    const dir = tmpdir("png");
    const file = path.join(dir, "deep.png");
    const script = `
import numpy as np
from PIL import Image
arr = np.arange(16, dtype=np.uint16).reshape(4, 4) * 4000
Image.fromarray(arr).save(${JSON.stringify(file)})
`;
    const proc = spawnSync("python3", ["-c", script], { encoding: "utf8" });
    expect(proc.status).toBe(0);
    expect(() => decodePngToGray(fs.readFileSync(file))).toThrow(/bit depth 16/);
  });

  it("rejects truncated pixel data", () => {
    const good = encodePng(16, 16, new Uint8Array(256).fill(100));
    // Drop the IEND chunk and the tail of the IDAT payload.
    const bad = good.subarray(0, good.length - 24);
    expect(() => decodePngToGray(bad)).toThrow(ValidationError);
  });
});
