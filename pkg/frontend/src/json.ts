/**
 * Canonical JSON serialization: keys sorted recursively, two-space indent,
 * trailing newline.  Re-running a writer over the same inputs must produce
 * byte-identical files, so every artifact in this package goes through here.
 */

type JsonValue =
  | null
  | boolean
  | number
  | string
  | JsonValue[]
  | { [key: string]: JsonValue };

function sortValue(value: JsonValue): JsonValue {
  if (Array.isArray(value)) {
    return value.map(sortValue);
  }
  if (value !== null && typeof value === "object") {
    const out: { [key: string]: JsonValue } = {};
    for (const key of Object.keys(value).sort()) {
      out[key] = sortValue(value[key] as JsonValue);
    }
    return out;
  }
  return value;
}

export function canonicalJson(value: unknown): string {
  return JSON.stringify(sortValue(value as JsonValue), null, 2) + "\n";
}
