import { existsSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli.js";
import { loadSpecFile, makeSpec } from "../src/figure.js";
import { UsageError } from "../src/errors.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const GLOB = join(FIXTURES, "*_seed*.csv");

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "cli-"));
}

describe("makeSpec", () => {
  it("fills defaults", () => {
    const spec = makeSpec({ traces: "x/*.csv", out: "f.svg" });
    expect(spec).toEqual({
      traces: "x/*.csv",
      metric: "train_loss",
      x: "epoch",
      logX: false,
      logY: false,
      shift: false,
      truncate: false,
      out: "f.svg",
    });
  });

  it("rejects unknown metric, bad axis, and non-svg output", () => {
    expect(() => makeSpec({ traces: "g", metric: "loss", out: "f.svg" })).toThrow(UsageError);
    expect(() => makeSpec({ traces: "g", x: "time", out: "f.svg" })).toThrow(UsageError);
    expect(() => makeSpec({ traces: "g", out: "f.png" })).toThrow(/\.svg/);
    expect(() => makeSpec({ out: "f.svg" })).toThrow(/trace glob/);
  });
});

describe("loadSpecFile", () => {
  it("parses the [figure] section with booleans", () => {
    const dir = tmp();
    const cfg = join(dir, "fig.cfg");
    writeFileSync(
      cfg,
      "[figure]\ntraces = out/*.csv\nmetric = amari\nx = epoch\n" +
        "log_y = true\nshift = true\ntruncate = false\nout = fig.svg\n",
    );
    const spec = loadSpecFile(cfg);
    expect(spec.metric).toBe("amari");
    expect(spec.logY).toBe(true);
    expect(spec.shift).toBe(true);
    expect(spec.truncate).toBe(false);
  });

  it("rejects unknown keys and a missing section", () => {
    const dir = tmp();
    const bad = join(dir, "bad.cfg");
    writeFileSync(bad, "[figure]\ntraces = g\nout = f.svg\ncolor = red\n");
    expect(() => loadSpecFile(bad)).toThrow(/unknown key/);
    const nosec = join(dir, "nosec.cfg");
    writeFileSync(nosec, "traces = g\n");
    expect(() => loadSpecFile(nosec)).toThrow(/\[figure\]/);
  });
});

describe("main", () => {
  afterEach(() => {
    vi.restoreAllMocks();
  });

  function quiet() {
    vi.spyOn(console, "log").mockImplementation(() => {});
    vi.spyOn(console, "error").mockImplementation(() => {});
  }

  it("renders from inline flags", async () => {
    quiet();
    const out = join(tmp(), "fig.svg");
    const code = await main([
      "--traces", GLOB, "--metric", "amari", "--x", "epoch",
      "--log-y", "--shift", "--truncate", "--out", out,
    ]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
  });

  it("renders from a spec file and matches the inline result", async () => {
    quiet();
    const dir = tmp();
    const cfgOut = join(dir, "cfg.svg");
    const cfg = join(dir, "fig.cfg");
    writeFileSync(
      cfg,
      `[figure]\ntraces = ${GLOB}\nmetric = amari\nlog_y = true\nout = ${cfgOut}\n`,
    );
    expect(await main(["--spec", cfg])).toBe(0);
    expect(existsSync(cfgOut)).toBe(true);
  });

  it("maps errors to the documented exit codes", async () => {
    quiet();
    const out = join(tmp(), "f.svg");
    expect(await main(["--traces", "/none/*.csv", "--out", out])).toBe(1); // io
    expect(await main(["--traces", GLOB, "--metric", "bogus", "--out", out])).toBe(2);
    expect(await main(["--traces", GLOB, "--out", "f.png"])).toBe(2);
    expect(await main(["--no-such-flag"])).toBe(2);
    expect(await main(["--spec", "/none.cfg"])).toBe(1);
    expect(await main(["--spec", "x.cfg", "--metric", "amari"])).toBe(2); // exclusive
  });

  it("fails cleanly on malformed trace files", async () => {
    quiet();
    const dir = tmp();
    writeFileSync(join(dir, "bad_seed0.csv"), "not,a,trace\n1,2,3\n");
    const code = await main([
      "--traces", join(dir, "*_seed*.csv"), "--metric", "amari",
      "--out", join(dir, "f.svg"),
    ]);
    expect(code).toBe(1);
  });
});
