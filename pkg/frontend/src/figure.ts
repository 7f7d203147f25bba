/** FigureSpec: everything needed to turn trace CSVs into one figure. */

import { readFileSync } from "node:fs";

import { parse as parseIni } from "ini";

import { IoError, UsageError } from "./errors.js";
import { METRIC_COLUMNS, X_COLUMNS, type MetricName, type XName } from "./traces.js";

export interface FigureSpec {
  /** glob of trace CSVs to aggregate */
  traces: string;
  metric: MetricName;
  x: XName;
  logX: boolean;
  logY: boolean;
  /** subtract each curve's plateau (median of its last 3 points) */
  shift: boolean;
  /** clip each curve to its initial value */
  truncate: boolean;
  /** output path, .svg */
  out: string;
}

const SPEC_KEYS = [
  "traces",
  "metric",
  "x",
  "log_x",
  "log_y",
  "shift",
  "truncate",
  "out",
] as const;

function asBool(value: unknown, key: string): boolean {
  if (typeof value === "boolean") return value;
  if (value === "true" || value === "1" || value === "yes") return true;
  if (value === "false" || value === "0" || value === "no") return false;
  throw new UsageError(`${key} must be a boolean, got ${JSON.stringify(value)}`);
}

/** Validate raw fields (CLI flags or cfg values) into a FigureSpec. */
export function makeSpec(raw: {
  traces?: unknown;
  metric?: unknown;
  x?: unknown;
  logX?: unknown;
  logY?: unknown;
  shift?: unknown;
  truncate?: unknown;
  out?: unknown;
}): FigureSpec {
  if (!raw.traces || typeof raw.traces !== "string") {
    throw new UsageError("a trace glob is required (--traces)");
  }
  if (!raw.out || typeof raw.out !== "string") {
    throw new UsageError("an output path is required (--out)");
  }
  if (!raw.out.endsWith(".svg")) {
    throw new UsageError(`output must be an .svg path, got ${JSON.stringify(raw.out)}`);
  }
  const metric = String(raw.metric ?? "train_loss");
  if (!(METRIC_COLUMNS as readonly string[]).includes(metric)) {
    throw new UsageError(
      `unknown metric ${JSON.stringify(metric)}; known: ${METRIC_COLUMNS.join(", ")}`,
    );
  }
  const x = String(raw.x ?? "epoch");
  if (!(X_COLUMNS as readonly string[]).includes(x)) {
    throw new UsageError(`x axis must be one of ${X_COLUMNS.join(", ")}, got ${JSON.stringify(x)}`);
  }
  return {
    traces: raw.traces,
    metric: metric as MetricName,
    x: x as XName,
    logX: raw.logX === undefined ? false : asBool(raw.logX, "log_x"),
    logY: raw.logY === undefined ? false : asBool(raw.logY, "log_y"),
    shift: raw.shift === undefined ? false : asBool(raw.shift, "shift"),
    truncate: raw.truncate === undefined ? false : asBool(raw.truncate, "truncate"),
    out: raw.out,
  };
}

/** Load a spec from an INI file with a single [figure] section. */
export function loadSpecFile(path: string): FigureSpec {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new IoError(`cannot read spec ${path}: ${(err as Error).message}`);
  }
  const parsed = parseIni(text) as Record<string, unknown>;
  const figure = parsed.figure;
  if (typeof figure !== "object" || figure === null) {
    throw new UsageError(`${path}: expected a [figure] section`);
  }
  const section = figure as Record<string, unknown>;
  for (const key of Object.keys(section)) {
    if (!(SPEC_KEYS as readonly string[]).includes(key)) {
      throw new UsageError(`${path}: unknown key ${JSON.stringify(key)} in [figure]`);
    }
  }
  return makeSpec({
    traces: section.traces,
    metric: section.metric,
    x: section.x,
    logX: section.log_x,
    logY: section.log_y,
    shift: section.shift,
    truncate: section.truncate,
    out: section.out,
  });
}
