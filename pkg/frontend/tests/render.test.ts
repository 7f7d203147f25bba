import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { aggregate } from "../src/aggregate.js";
import { UsageError } from "../src/errors.js";
import { makeSpec } from "../src/figure.js";
import { buildCurves, render } from "../src/render.js";
import { svgFigure } from "../src/svg.js";
import { loadTraces } from "../src/traces.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const GLOB = join(FIXTURES, "*_seed*.csv");

function tmpOut(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "fig-")), name);
}

describe("buildCurves on real bench output", () => {
  it("yields one curve per algorithm", () => {
    const curves = buildCurves(
      makeSpec({ traces: GLOB, metric: "amari", out: "unused.svg" }),
    );
    expect(curves.map((c) => c.algo)).toEqual(["incremental_mm", "online_mm"]);
    for (const curve of curves) {
      expect(curve.x[0]).toBe(0);
      expect(curve.x).toHaveLength(21);
      // separation improves by orders of magnitude over the run
      expect(curve.median[20]).toBeLessThan(curve.median[0] / 20);
    }
  });

  it("surrogate loss median is non-increasing for the incremental solver", () => {
    const traces = loadTraces(join(FIXTURES, "incremental_mm_seed*.csv"));
    const [curve] = aggregate(traces, { metric: "surrogate_loss", x: "epoch" });
    for (let i = 1; i < curve.median.length; i++) {
      expect(curve.median[i]).toBeLessThanOrEqual(curve.median[i - 1] + 1e-9);
    }
  });

  it("errors clearly when the metric has no values", () => {
    // online traces have no surrogate column values
    const spec = makeSpec({
      traces: join(FIXTURES, "online_mm_seed*.csv"),
      metric: "surrogate_loss",
      out: "unused.svg",
    });
    expect(() => buildCurves(spec)).toThrow(/no finite values/);
  });
});

describe("render", () => {
  it("writes an SVG with a median path and a band per algorithm", () => {
    const out = tmpOut("amari.svg");
    render(makeSpec({ traces: GLOB, metric: "amari", x: "epoch", out }));
    const svg = readFileSync(out, "utf8");
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.match(/class="median"/g)).toHaveLength(2);
    expect((svg.match(/class="band"/g) ?? []).length).toBeGreaterThanOrEqual(2);
    expect(svg).toContain(">incremental_mm<");
    expect(svg).toContain(">online_mm<");
    expect(svg).toContain(">epoch<");
  });

  it("is deterministic", () => {
    const a = tmpOut("a.svg");
    const b = tmpOut("b.svg");
    const spec = { traces: GLOB, metric: "amari" as const, out: a };
    render(makeSpec(spec));
    render(makeSpec({ ...spec, out: b }));
    expect(readFileSync(a, "utf8")).toBe(readFileSync(b, "utf8"));
  });

  it("applies shift, truncation, and log scales together", () => {
    const out = tmpOut("shifted.svg");
    render(
      makeSpec({
        traces: GLOB,
        metric: "amari",
        x: "epoch",
        logY: true,
        shift: true,
        truncate: true,
        out,
      }),
    );
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("amari (shifted)");
    expect(svg.match(/class="median"/g)).toHaveLength(2);
  });

  it("supports wall time on a log x axis", () => {
    const out = tmpOut("wall.svg");
    render(
      makeSpec({ traces: GLOB, metric: "test_loss", x: "wall_time_s", logX: true, out }),
    );
    expect(readFileSync(out, "utf8")).toContain("wall time (s)");
  });
});

describe("svgFigure edge cases", () => {
  it("rejects a figure with nothing plottable", () => {
    const curve = { algo: "a", x: [0, 1], median: [-1, -2], q25: [-1, -2], q75: [-1, -2] };
    expect(() =>
      svgFigure([curve], { xLabel: "epoch", yLabel: "v", logX: false, logY: true }),
    ).toThrow(UsageError);
  });

  it("breaks the median line at NaN points", () => {
    const curve = {
      algo: "a",
      x: [0, 1, 2, 3, 4],
      median: [1, 2, NaN, 3, 4],
      q25: [1, 2, NaN, 3, 4],
      q75: [1, 2, NaN, 3, 4],
    };
    const svg = svgFigure([curve], { xLabel: "x", yLabel: "y", logX: false, logY: false });
    const path = svg.match(/class="median" d="([^"]+)"/)![1];
    expect(path.match(/M/g)).toHaveLength(2); // two disjoint segments

    // a segment reduced to one point is drawn as a dot instead
    const dot = { algo: "a", x: [0, 1, 2], median: [1, NaN, 3], q25: [1, NaN, 3], q75: [1, NaN, 3] };
    const svg2 = svgFigure([dot], { xLabel: "x", yLabel: "y", logX: false, logY: false });
    expect(svg2.match(/class="median-point"/g)).toHaveLength(2);
  });
});
