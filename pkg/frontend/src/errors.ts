/** Error taxonomy mirrored on the solver CLI's exit codes. */

export class UsageError extends Error {} // exit 2: bad flags, unknown metric
export class IoError extends Error {} // exit 1: missing files, unreadable paths
export class FormatError extends Error {} // exit 1: malformed trace CSV

export function exitCode(err: unknown): number {
  if (err instanceof UsageError) return 2;
  if (err instanceof IoError || err instanceof FormatError) return 1;
  return 1;
}
