export { aggregate, median, quantile, type AggregateOptions, type Curve } from "./aggregate.js";
export { FormatError, IoError, UsageError } from "./errors.js";
export { loadSpecFile, makeSpec, type FigureSpec } from "./figure.js";
export { buildCurves, render } from "./render.js";
export { svgFigure, type SvgOptions } from "./svg.js";
export {
  loadTraces,
  METRIC_COLUMNS,
  parseTrace,
  TRACE_COLUMNS,
  X_COLUMNS,
  type MetricName,
  type Trace,
  type TraceRow,
  type XName,
} from "./traces.js";
export { main } from "./cli.js";
