import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { FormatError, IoError } from "../src/errors.js";
import { loadTraces, parseTrace, TRACE_COLUMNS } from "../src/traces.js";

const HEADER = TRACE_COLUMNS.join(",");

const SAMPLE = `${HEADER}
sgd,3,0,0.0,5.5,nan,5.6,0.8,nan
sgd,3,1,0.25,4.1,nan,4.2,0.3,nan
`;

describe("parseTrace", () => {
  it("reads rows, seeds, and nan cells", () => {
    const trace = parseTrace("t.csv", SAMPLE);
    expect(trace.algo).toBe("sgd");
    expect(trace.seed).toBe(3);
    expect(trace.rows).toHaveLength(2);
    expect(trace.rows[1].train_loss).toBe(4.1);
    expect(Number.isNaN(trace.rows[0].surrogate_loss)).toBe(true);
  });

  it("rejects a wrong header", () => {
    expect(() => parseTrace("t.csv", "a,b\n1,2\n")).toThrow(FormatError);
  });

  it("rejects an empty trace", () => {
    expect(() => parseTrace("t.csv", `${HEADER}\n`)).toThrow(/no rows/);
  });

  it("rejects non-numeric cells", () => {
    const bad = `${HEADER}\nsgd,0,zero,0.0,1,1,1,1,1\n`;
    expect(() => parseTrace("t.csv", bad)).toThrow(/non-numeric/);
  });
});

describe("loadTraces", () => {
  it("expands a glob and sorts matches", () => {
    const dir = mkdtempSync(join(tmpdir(), "traces-"));
    writeFileSync(join(dir, "b_seed1.csv"), SAMPLE);
    writeFileSync(join(dir, "a_seed0.csv"), SAMPLE);
    writeFileSync(join(dir, "summary.csv"), "other,stuff\n1,2\n");
    const traces = loadTraces(join(dir, "*_seed*.csv"));
    expect(traces.map((t) => t.path.split("/").pop())).toEqual([
      "a_seed0.csv",
      "b_seed1.csv",
    ]);
  });

  it("requires at least one match", () => {
    expect(() => loadTraces("/nonexistent/*.csv")).toThrow(IoError);
  });
});
