/** Loading and validation of solver trace CSVs.
 *
 * A trace is one (algorithm, seed) run: a fixed 9-column header and one row
 * per recorded epoch.  Missing metrics are spelled "nan".  Traces are the
 * only interface to the solver package; nothing here imports from it.
 */

import { readFileSync } from "node:fs";

import fg from "fast-glob";
import Papa from "papaparse";

import { FormatError, IoError } from "./errors.js";

export const TRACE_COLUMNS = [
  "algo",
  "seed",
  "epoch",
  "wall_time_s",
  "train_loss",
  "surrogate_loss",
  "test_loss",
  "grad_norm",
  "amari",
] as const;

/** Columns that make sense on a y-axis. */
export const METRIC_COLUMNS = [
  "train_loss",
  "surrogate_loss",
  "test_loss",
  "grad_norm",
  "amari",
] as const;

/** Columns that make sense on an x-axis. */
export const X_COLUMNS = ["epoch", "wall_time_s"] as const;

export type MetricName = (typeof METRIC_COLUMNS)[number];
export type XName = (typeof X_COLUMNS)[number];

export interface TraceRow {
  algo: string;
  seed: number;
  epoch: number;
  wall_time_s: number;
  train_loss: number;
  surrogate_loss: number;
  test_loss: number;
  grad_norm: number;
  amari: number;
}

export interface Trace {
  path: string;
  algo: string;
  seed: number;
  rows: TraceRow[];
}

function toNumber(raw: unknown, path: string, column: string): number {
  if (typeof raw === "number") return raw;
  if (typeof raw === "string") {
    const s = raw.trim();
    if (s === "nan") return NaN;
    const v = Number(s);
    if (s !== "" && !Number.isNaN(v)) return v;
  }
  throw new FormatError(`${path}: non-numeric value ${JSON.stringify(raw)} in column ${column}`);
}

export function parseTrace(path: string, text: string): Trace {
  const parsed = Papa.parse<Record<string, unknown>>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new FormatError(`${path}: ${e.message} (row ${e.row})`);
  }
  const header = parsed.meta.fields ?? [];
  if (header.join(",") !== TRACE_COLUMNS.join(",")) {
    throw new FormatError(
      `${path}: expected header ${TRACE_COLUMNS.join(",")}, got ${header.join(",")}`,
    );
  }
  if (parsed.data.length === 0) {
    throw new FormatError(`${path}: trace has no rows`);
  }
  const rows: TraceRow[] = parsed.data.map((rec) => {
    const row: Record<string, unknown> = { algo: String(rec.algo ?? "") };
    for (const col of TRACE_COLUMNS) {
      if (col === "algo") continue;
      row[col] = toNumber(rec[col], path, col);
    }
    return row as unknown as TraceRow;
  });
  return { path, algo: rows[0].algo, seed: rows[0].seed, rows };
}

/** Expand a glob and parse every matching trace; at least one must match. */
export function loadTraces(pattern: string): Trace[] {
  const paths = fg.sync(pattern, { onlyFiles: true }).sort();
  if (paths.length === 0) {
    throw new IoError(`no trace files match ${JSON.stringify(pattern)}`);
  }
  return paths.map((p) => {
    let text: string;
    try {
      text = readFileSync(p, "utf8");
    } catch (err) {
      throw new IoError(`cannot read ${p}: ${(err as Error).message}`);
    }
    return parseTrace(p, text);
  });
}
