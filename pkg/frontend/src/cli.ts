/** mmica-plot: trace CSVs in, convergence figure out.
 *
 *   mmica-plot --spec figure.cfg
 *   mmica-plot --traces "bench_out/*_seed*.csv" --metric amari --x epoch \
 *              --log-y --shift --truncate --out amari.svg
 *
 * Exit codes: 0 ok, 1 io/format error, 2 usage error.
 */

import yargs from "yargs";

import { exitCode, UsageError } from "./errors.js";
import { loadSpecFile, makeSpec } from "./figure.js";
import { render } from "./render.js";
import { METRIC_COLUMNS, X_COLUMNS } from "./traces.js";

export async function main(argv: string[]): Promise<number> {
  let args;
  try {
    args = await yargs(argv)
      .usage("mmica-plot --spec cfg | mmica-plot --traces GLOB --out FIG.svg [options]")
      .option("spec", { type: "string", describe: "INI spec file with a [figure] section" })
      .option("traces", { type: "string", describe: "glob of trace CSVs" })
      .option("metric", {
        type: "string",
        describe: `y metric: ${METRIC_COLUMNS.join(", ")}`,
      })
      .option("x", { type: "string", describe: `x axis: ${X_COLUMNS.join(", ")}` })
      .option("log-x", { type: "boolean", describe: "log-scale x axis" })
      .option("log-y", { type: "boolean", describe: "log-scale y axis" })
      .option("shift", { type: "boolean", describe: "shift each curve's plateau to 0" })
      .option("truncate", { type: "boolean", describe: "clip curves to their initial value" })
      .option("out", { type: "string", describe: "output .svg path" })
      .strict()
      .exitProcess(false)
      .fail((msg, err) => {
        throw err ?? new UsageError(msg ?? "bad arguments");
      })
      .help()
      .parse();
  } catch (err) {
    console.error(`mmica-plot: ${(err as Error).message}`);
    return 2;
  }

  try {
    let spec;
    if (args.spec !== undefined) {
      for (const flag of ["traces", "metric", "x", "logX", "logY", "shift", "truncate", "out"]) {
        if ((args as Record<string, unknown>)[flag] !== undefined) {
          throw new UsageError(`--spec cannot be combined with --${flag}`);
        }
      }
      spec = loadSpecFile(args.spec);
    } else {
      spec = makeSpec({
        traces: args.traces,
        metric: args.metric,
        x: args.x,
        logX: args.logX,
        logY: args.logY,
        shift: args.shift,
        truncate: args.truncate,
        out: args.out,
      });
    }
    const out = render(spec);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(`mmica-plot: ${(err as Error).message}`);
    return exitCode(err);
  }
}
