/** render(spec): load traces, aggregate per algorithm, write the SVG. */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { aggregate, type Curve } from "./aggregate.js";
import type { FigureSpec } from "./figure.js";
import { UsageError } from "./errors.js";
import { svgFigure } from "./svg.js";
import { loadTraces } from "./traces.js";

const X_LABELS = { epoch: "epoch", wall_time_s: "wall time (s)" } as const;

export function buildCurves(spec: FigureSpec): Curve[] {
  const traces = loadTraces(spec.traces);
  const curves = aggregate(traces, {
    metric: spec.metric,
    x: spec.x,
    truncate: spec.truncate,
    shift: spec.shift,
  });
  if (curves.length === 0) {
    throw new UsageError(
      `metric ${JSON.stringify(spec.metric)} has no finite values in the matched traces`,
    );
  }
  return curves;
}

export function render(spec: FigureSpec): string {
  const curves = buildCurves(spec);
  const svg = svgFigure(curves, {
    xLabel: X_LABELS[spec.x],
    yLabel: spec.shift ? `${spec.metric} (shifted)` : spec.metric,
    logX: spec.logX,
    logY: spec.logY,
  });
  mkdirSync(dirname(spec.out) || ".", { recursive: true });
  writeFileSync(spec.out, svg);
  return spec.out;
}
