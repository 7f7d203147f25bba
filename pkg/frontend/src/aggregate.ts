/** Per-algorithm aggregation of traces into median curves with IQR bands.
 *
 * Curves are keyed by the algo column, so a bench sweep with several seeds
 * per algorithm collapses to one curve each.  At every x position the
 * median and the 25/75 quantiles are taken across seeds (linear
 * interpolation between order statistics); positions where no seed has a
 * finite value are dropped.
 *
 * Presentation transforms, both off by default:
 *  - truncation clips a curve (and its band) to its own initial median
 *    value, so early divergence spikes do not dominate the y-range;
 *  - the plateau shift subtracts the median of the last 3 points of each
 *    median curve, putting every plateau at 0.  Truncation is applied
 *    before the shift.
 */

import type { MetricName, Trace, XName } from "./traces.js";

export interface Curve {
  algo: string;
  x: number[];
  median: number[];
  q25: number[];
  q75: number[];
}

/** Linear-interpolation quantile of an unsorted sample, q in [0, 1]. */
export function quantile(values: number[], q: number): number {
  if (values.length === 0) return NaN;
  const sorted = [...values].sort((a, b) => a - b);
  const pos = q * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

export function median(values: number[]): number {
  return quantile(values, 0.5);
}

function aggregateOne(algo: string, traces: Trace[], metric: MetricName, x: XName): Curve {
  // per-seed traces sample the same epochs; for wall-time axes each trace
  // keeps its own x, so pool by rank instead of exact value
  const byRank = new Map<number, { xs: number[]; ys: number[] }>();
  for (const trace of traces) {
    trace.rows.forEach((row, rank) => {
      const y = row[metric];
      if (!Number.isFinite(y)) return;
      const slot = byRank.get(rank) ?? { xs: [], ys: [] };
      slot.xs.push(row[x]);
      slot.ys.push(y);
      byRank.set(rank, slot);
    });
  }
  const ranks = [...byRank.keys()].sort((a, b) => a - b);
  const curve: Curve = { algo, x: [], median: [], q25: [], q75: [] };
  for (const rank of ranks) {
    const { xs, ys } = byRank.get(rank)!;
    curve.x.push(median(xs));
    curve.median.push(median(ys));
    curve.q25.push(quantile(ys, 0.25));
    curve.q75.push(quantile(ys, 0.75));
  }
  return curve;
}

function truncateAtStart(curve: Curve): void {
  const cap = curve.median[0];
  for (let i = 0; i < curve.x.length; i++) {
    curve.median[i] = Math.min(curve.median[i], cap);
    curve.q25[i] = Math.min(curve.q25[i], cap);
    curve.q75[i] = Math.min(curve.q75[i], cap);
  }
}

function shiftToPlateau(curve: Curve): void {
  const tail = curve.median.slice(-3);
  const plateau = median(tail);
  for (let i = 0; i < curve.x.length; i++) {
    curve.median[i] -= plateau;
    curve.q25[i] -= plateau;
    curve.q75[i] -= plateau;
  }
}

export interface AggregateOptions {
  metric: MetricName;
  x: XName;
  truncate?: boolean;
  shift?: boolean;
}

/** One curve per algo label, sorted by label for deterministic output. */
export function aggregate(traces: Trace[], opts: AggregateOptions): Curve[] {
  const groups = new Map<string, Trace[]>();
  for (const trace of traces) {
    const group = groups.get(trace.algo) ?? [];
    group.push(trace);
    groups.set(trace.algo, group);
  }
  const curves: Curve[] = [];
  for (const algo of [...groups.keys()].sort()) {
    const curve = aggregateOne(algo, groups.get(algo)!, opts.metric, opts.x);
    if (curve.x.length === 0) continue;
    if (opts.truncate) truncateAtStart(curve);
    if (opts.shift) shiftToPlateau(curve);
    curves.push(curve);
  }
  return curves;
}
