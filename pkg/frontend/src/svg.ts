/** Deterministic SVG rendering of aggregated curves.
 *
 * No DOM, no timestamps, no random ids: the same curves and options always
 * produce byte-identical markup.  Each algorithm gets a median line
 * (class "median") and an interquartile band (class "band") in a fixed
 * palette, plus a legend entry.
 */

import type { Curve } from "./aggregate.js";
import { UsageError } from "./errors.js";

export interface SvgOptions {
  xLabel: string;
  yLabel: string;
  logX: boolean;
  logY: boolean;
}

const WIDTH = 640;
const HEIGHT = 400;
const MARGIN = { top: 16, right: 16, bottom: 44, left: 68 };
const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
];

const fx = (v: number) => v.toFixed(2);

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(1).replace("e+", "e").replace(".0e", "e");
  }
  return String(parseFloat(v.toPrecision(6)));
}

function linearTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / count;
  const base = Math.pow(10, Math.floor(Math.log10(raw)));
  const err = raw / base;
  const step = base * (err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1);
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(parseFloat(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); e <= Math.log10(hi) + 1e-9; e++) {
    for (const m of [1, 2, 5]) {
      const v = m * Math.pow(10, e);
      if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) ticks.push(v);
    }
  }
  const decades = ticks.filter((v) => {
    const e = Math.log10(v);
    return Math.abs(e - Math.round(e)) < 1e-9;
  });
  return decades.length >= 2 ? decades : ticks;
}

interface Scale {
  (v: number): number;
  ticks: number[];
}

function makeScale(lo: number, hi: number, r0: number, r1: number, log: boolean): Scale {
  if (log) {
    const [l0, l1] = [Math.log10(lo), Math.log10(hi)];
    const span = l1 - l0 || 1;
    const f = ((v: number) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0)) as Scale;
    f.ticks = logTicks(lo, hi);
    return f;
  }
  const span = hi - lo || 1;
  const f = ((v: number) => r0 + ((v - lo) / span) * (r1 - r0)) as Scale;
  f.ticks = linearTicks(lo, hi);
  return f;
}

/** Split curve points into plottable runs, breaking on NaN and on values a
 * log axis cannot show. */
function runs(curve: Curve, key: "median" | "q25" | "q75", opts: SvgOptions): number[][] {
  const out: number[][] = [];
  let current: number[] = [];
  for (let i = 0; i < curve.x.length; i++) {
    const y = curve[key][i];
    const ok =
      Number.isFinite(curve.x[i]) &&
      Number.isFinite(y) &&
      (!opts.logX || curve.x[i] > 0) &&
      (!opts.logY || y > 0);
    if (ok) {
      current.push(i);
    } else if (current.length > 0) {
      out.push(current);
      current = [];
    }
  }
  if (current.length > 0) out.push(current);
  return out;
}

export function svgFigure(curves: Curve[], opts: SvgOptions): string {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const curve of curves) {
    for (const idx of runs(curve, "median", opts)) {
      for (const i of idx) {
        xs.push(curve.x[i]);
        ys.push(curve.median[i]);
        for (const key of ["q25", "q75"] as const) {
          const v = curve[key][i];
          if (Number.isFinite(v) && (!opts.logY || v > 0)) ys.push(v);
        }
      }
    }
  }
  if (xs.length === 0) {
    throw new UsageError(
      "nothing to plot: no finite values" +
        (opts.logX || opts.logY ? " compatible with the log scale" : ""),
    );
  }
  const pad = (lo: number, hi: number, log: boolean): [number, number] => {
    if (log) return [lo / 1.1, hi * 1.1];
    const d = (hi - lo || Math.abs(hi) || 1) * 0.05;
    return [lo - d, hi + d];
  };
  const [xLo, xHi] = pad(Math.min(...xs), Math.max(...xs), opts.logX);
  const [yLo, yHi] = pad(Math.min(...ys), Math.max(...ys), opts.logY);
  const sx = makeScale(xLo, xHi, MARGIN.left, WIDTH - MARGIN.right, opts.logX);
  const sy = makeScale(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top, opts.logY);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `font-family="sans-serif" font-size="11">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
  );

  for (const t of sx.ticks) {
    const x = fx(sx(t));
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${HEIGHT - MARGIN.bottom}" stroke="#eee"/>`,
      `<text x="${x}" y="${HEIGHT - MARGIN.bottom + 16}" text-anchor="middle">${fmtTick(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const y = fx(sy(t));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}" y2="${y}" stroke="#eee"/>`,
      `<text x="${MARGIN.left - 6}" y="${y}" dy="0.32em" text-anchor="end">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${MARGIN.left}" y1="${HEIGHT - MARGIN.bottom}" x2="${WIDTH - MARGIN.right}" ` +
      `y2="${HEIGHT - MARGIN.bottom}" stroke="black"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${HEIGHT - MARGIN.bottom}" stroke="black"/>`,
    `<text x="${fx((MARGIN.left + WIDTH - MARGIN.right) / 2)}" y="${HEIGHT - 8}" ` +
      `text-anchor="middle">${opts.xLabel}</text>`,
    `<text transform="translate(14 ${fx((MARGIN.top + HEIGHT - MARGIN.bottom) / 2)}) ` +
      `rotate(-90)" text-anchor="middle">${opts.yLabel}</text>`,
  );

  curves.forEach((curve, c) => {
    const color = PALETTE[c % PALETTE.length];
    // IQR band: only spans where both quartiles are plottable
    for (const idx of runs(curve, "q25", opts).flatMap((run) =>
      intersectRuns(run, runs(curve, "q75", opts)),
    )) {
      if (idx.length < 2) continue;
      const fwd = idx.map((i) => `${fx(sx(curve.x[i]))},${fx(sy(curve.q75[i]))}`);
      const back = [...idx].reverse().map((i) => `${fx(sx(curve.x[i]))},${fx(sy(curve.q25[i]))}`);
      parts.push(
        `<path class="band" d="M${fwd.join(" L")} L${back.join(" L")} Z" ` +
          `fill="${color}" fill-opacity="0.18" stroke="none"/>`,
      );
    }
    const segments: string[] = [];
    for (const idx of runs(curve, "median", opts)) {
      const pts = idx.map((i) => `${fx(sx(curve.x[i]))},${fx(sy(curve.median[i]))}`);
      if (pts.length === 1) {
        parts.push(`<circle class="median-point" cx="${pts[0].split(",")[0]}" ` +
          `cy="${pts[0].split(",")[1]}" r="2.5" fill="${color}"/>`);
      } else {
        segments.push(`M${pts.join(" L")}`);
      }
    }
    if (segments.length > 0) {
      parts.push(
        `<path class="median" d="${segments.join(" ")}" fill="none" ` +
          `stroke="${color}" stroke-width="1.8"/>`,
      );
    }
    const ly = MARGIN.top + 14 + 16 * c;
    parts.push(
      `<line x1="${WIDTH - MARGIN.right - 150}" y1="${ly}" x2="${WIDTH - MARGIN.right - 126}" ` +
        `y2="${ly}" stroke="${color}" stroke-width="1.8"/>`,
      `<text x="${WIDTH - MARGIN.right - 120}" y="${ly}" dy="0.32em">${curve.algo}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Indices present both in `run` and in any of `others`, kept contiguous. */
function intersectRuns(run: number[], others: number[][]): number[][] {
  const allowed = new Set(others.flat());
  const out: number[][] = [];
  let current: number[] = [];
  for (const i of run) {
    if (allowed.has(i)) {
      current.push(i);
    } else if (current.length > 0) {
      out.push(current);
      current = [];
    }
  }
  if (current.length > 0) out.push(current);
  return out;
}
