import { describe, expect, it } from "vitest";

import { aggregate, median, quantile } from "../src/aggregate.js";
import type { Trace, TraceRow } from "../src/traces.js";

function row(partial: Partial<TraceRow>): TraceRow {
  return {
    algo: "a",
    seed: 0,
    epoch: 0,
    wall_time_s: 0,
    train_loss: NaN,
    surrogate_loss: NaN,
    test_loss: NaN,
    grad_norm: NaN,
    amari: NaN,
    ...partial,
  };
}

function trace(algo: string, seed: number, losses: number[]): Trace {
  return {
    path: `${algo}_${seed}.csv`,
    algo,
    seed,
    rows: losses.map((v, epoch) =>
      row({ algo, seed, epoch, wall_time_s: epoch * 0.5 + seed, train_loss: v }),
    ),
  };
}

describe("quantile", () => {
  it("matches hand values with linear interpolation", () => {
    expect(quantile([1, 2, 3, 4], 0.5)).toBe(2.5);
    expect(quantile([1, 2, 3, 4], 0.25)).toBe(1.75);
    expect(quantile([1, 2, 3, 4], 0.75)).toBe(3.25);
    expect(quantile([5], 0.25)).toBe(5);
    expect(median([3, 1, 2])).toBe(2);
  });

  it("is NaN on empty input", () => {
    expect(Number.isNaN(quantile([], 0.5))).toBe(true);
  });
});

describe("aggregate", () => {
  it("takes the median across seeds at each epoch", () => {
    const traces = [
      trace("mm", 0, [10, 4]),
      trace("mm", 1, [20, 5]),
      trace("mm", 2, [30, 9]),
    ];
    const [curve] = aggregate(traces, { metric: "train_loss", x: "epoch" });
    expect(curve.algo).toBe("mm");
    expect(curve.x).toEqual([0, 1]);
    expect(curve.median).toEqual([20, 5]);
    expect(curve.q25).toEqual([15, 4.5]);
    expect(curve.q75).toEqual([25, 7]);
  });

  it("groups by algo label, sorted", () => {
    const curves = aggregate(
      [trace("z", 0, [1, 1]), trace("a", 0, [2, 2]), trace("z", 1, [3, 3])],
      { metric: "train_loss", x: "epoch" },
    );
    expect(curves.map((c) => c.algo)).toEqual(["a", "z"]);
  });

  it("skips NaN values and drops empty positions", () => {
    const t0 = trace("mm", 0, [10, 4, 2]);
    const t1 = trace("mm", 1, [20, NaN, 6]);
    const [curve] = aggregate([t0, t1], { metric: "train_loss", x: "epoch" });
    expect(curve.median).toEqual([15, 4, 4]); // epoch 1 falls back to the one finite seed
    const all = aggregate([t0, t1], { metric: "amari", x: "epoch" });
    expect(all).toEqual([]); // metric entirely missing -> no curve at all
  });

  it("uses the median x when traces disagree on wall time", () => {
    const traces = [trace("mm", 0, [1, 1]), trace("mm", 2, [3, 3])];
    const [curve] = aggregate(traces, { metric: "train_loss", x: "wall_time_s" });
    expect(curve.x).toEqual([1, 1.5]); // median of {0,2} and {0.5,2.5}
  });

  it("clips to the initial value when truncation is on", () => {
    const t = trace("mm", 0, [5, 9, 3]);
    const [curve] = aggregate([t], { metric: "train_loss", x: "epoch", truncate: true });
    expect(curve.median).toEqual([5, 5, 3]);
    expect(curve.q75).toEqual([5, 5, 3]);
  });

  it("shifts the plateau (median of last 3 points) to zero", () => {
    const t = trace("mm", 0, [10, 6, 3.2, 3.0, 2.8]);
    const [curve] = aggregate([t], { metric: "train_loss", x: "epoch", shift: true });
    expect(curve.median[4]).toBeCloseTo(2.8 - 3.0, 12);
    expect(curve.median[0]).toBeCloseTo(7.0, 12);
  });

  it("applies truncation before the shift", () => {
    const t = trace("mm", 0, [5, 9, 4, 4, 4]);
    const [curve] = aggregate([t], {
      metric: "train_loss",
      x: "epoch",
      truncate: true,
      shift: true,
    });
    // truncated to [5,5,4,4,4], plateau 4 -> [1,1,0,0,0]
    expect(curve.median).toEqual([1, 1, 0, 0, 0]);
  });

  it("shifts each algo by its own plateau", () => {
    const curves = aggregate(
      [trace("a", 0, [4, 2, 2, 2]), trace("b", 0, [9, 5, 5, 5])],
      { metric: "train_loss", x: "epoch", shift: true },
    );
    expect(curves[0].median[0]).toBe(2);
    expect(curves[1].median[0]).toBe(4);
  });
});
