/** Error raised for malformed inputs, bad arguments, or unusable files. */
export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ValidationError";
  }
}

/** True when an exception looks like a Node filesystem failure (ENOENT etc.). */
export function isFsError(err: unknown): err is NodeJS.ErrnoException {
  return (
    typeof err === "object" &&
    err !== null &&
    "code" in err &&
    "syscall" in err &&
    typeof (err as NodeJS.ErrnoException).code === "string"
  );
}
