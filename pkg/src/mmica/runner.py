"""Command-line front end and benchmark orchestration.

Subcommands:
  gen    write a synthetic Laplace-mixture dataset (and optional mixing)
  run    one solver on one dataset: split, run, write trace CSV + final W
  bench  algorithms x seeds sweep from a config file, with summary.csv

Exit codes: 0 success, 1 I/O or file-format error, 2 usage or config
error, 3 run diverged.

Trace CSVs have the fixed header
``algo,seed,epoch,wall_time_s,train_loss,surrogate_loss,test_loss,grad_norm,amari``
with NaN spelled ``nan``; one row per recorded epoch.  In bench output the
``algo`` column carries the config section label (e.g. ``inc_greedy``), so
two parameterizations of the same solver stay distinguishable.

Bench config is INI-style::

    [bench]
    p = 5             ; or: data = path.icad [mixing = path.icam]
    n = 20000
    gen_seed = 0
    density = huber
    epochs = 10
    test_fraction = 0.1
    seeds = 0 1 2
    outdir = out

    [algo.inc_greedy]
    algo = incremental_mm
    q = 2
    selection = greedy

Unknown keys are rejected.  ``--jobs`` (or env ``MMICA_JOBS``) parallelizes
across (algo, seed) runs only; failed runs are recorded in summary.csv as
``<label>,<seed>,failed,nan,nan,nan`` rows and do not abort the sweep.
"""

import argparse
import concurrent.futures
import configparser
import csv
import math
import os
import re
import sys
import warnings

import numpy as np

from . import baselines, datakit, mm_engine, metrics
from .density import DENSITIES, get_density
from .exceptions import Diverged, FormatError, IoError, MmicaError
from .mm_engine import MMConfig
from .trace import TRACE_COLUMNS, MetricRecord, RunTrace

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

ALGOS = ("incremental_mm", "online_mm", "sgd", "sag", "batch_mm")
ONLINE_CAPABLE = ("online_mm", "sgd")
WHITEN_SUBSAMPLE = 10_000

_ALGO_KEYS = ("algo", "batch_size", "q", "alpha", "step", "selection", "init",
              "epochs", "max_samples", "grad_no_identity")
_BENCH_KEYS = ("data", "mixing", "p", "n", "gen_seed", "density", "epochs",
               "max_samples", "batch_size", "test_fraction", "seeds", "outdir", "jobs")


class UsageError(ValueError):
    """Bad flags or config contents; maps to exit code 2."""


# ---------------------------------------------------------------------------
# trace CSV I/O

def _fmt(value):
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def write_trace_csv(path, trace):
    """One CSV per run; columns fixed by TRACE_COLUMNS, NaN spelled 'nan'."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for rec in trace.records:
                writer.writerow([trace.algo, trace.seed, rec.epoch]
                                + [_fmt(getattr(rec, c)) for c in TRACE_COLUMNS[3:]])
    except OSError as exc:
        raise IoError(f"cannot write trace {path}: {exc}") from None


def read_trace_csv(path):
    """Inverse of write_trace_csv; returns a RunTrace."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames) != TRACE_COLUMNS:
                raise FormatError(f"{path}: unexpected trace header {reader.fieldnames}")
            trace = None
            for row in reader:
                if trace is None:
                    trace = RunTrace(algo=row["algo"], seed=int(row["seed"]))
                rec = MetricRecord(epoch=int(row["epoch"]))
                for col in TRACE_COLUMNS[3:]:
                    setattr(rec, col, float(row[col]))
                trace.append(rec)
            if trace is None:
                raise FormatError(f"{path}: empty trace")
            return trace
    except OSError as exc:
        raise IoError(f"cannot read trace {path}: {exc}") from None
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# single-run plumbing

def split_train_test(X, test_fraction):
    """Hold out the last ceil(test_fraction * n) columns."""
    if not 0.0 <= test_fraction <= 0.5:
        raise UsageError(f"test_fraction must lie in [0, 0.5], got {test_fraction}")
    n = X.shape[1]
    n_test = math.ceil(test_fraction * n)
    return X[:, :n - n_test], X[:, n - n_test:]


def _metric_callback(X_train, X_test, model, mixing):
    def callback(epoch, W):
        rec = MetricRecord()
        try:
            rec.train_loss = metrics.leftout_loss(W, X_train, model)
            if X_test.shape[1]:
                rec.test_loss = metrics.leftout_loss(W, X_test, model)
            rec.grad_norm = metrics.grad_norm(W, X_train, model)
            if mixing is not None:
                rec.amari = metrics.amari_distance(W, mixing)
        except MmicaError:
            pass  # degenerate iterate: leave remaining fields at nan
        return rec
    return callback


def _cycle_columns(X, max_samples):
    n = X.shape[1]
    for j in range(max_samples):
        yield X[:, j % n]


def execute_run(dataset, algo, density="huber", epochs=10, max_samples=None,
                test_fraction=0.1, seed=0, batch_size=1000, q=2, alpha=0.5,
                step=0.1, selection="greedy", init="whiten", include_identity=True,
                label=None):
    """Split the dataset, run one solver, return (W, RunTrace).

    Finite-sum solvers iterate ``epochs`` passes over the training columns.
    Online solvers stream the training columns cyclically; one trace epoch
    spans batch_size * ceil(n_train / batch_size) samples so the x-axis
    matches the finite-sum runs, and max_samples defaults to epochs such
    spans.  ``max_samples`` is only legal for online-capable solvers.
    """
    if algo not in ALGOS:
        raise UsageError(f"unknown algo {algo!r}; choose from {ALGOS}")
    if max_samples is not None and algo not in ONLINE_CAPABLE:
        raise UsageError(f"--max-samples applies to {ONLINE_CAPABLE}, not {algo!r}")
    model = get_density(density)
    X_train, X_test = split_train_test(dataset.X, test_fraction)
    callback = _metric_callback(X_train, X_test, model, dataset.mixing)
    n_train = X_train.shape[1]
    online = algo == "online_mm" or (algo == "sgd" and max_samples is not None)

    if online:
        samples_per_epoch = batch_size * math.ceil(n_train / batch_size)
        if max_samples is None:
            max_samples = epochs * samples_per_epoch
        stream = _cycle_columns(X_train, max_samples)

    if algo == "incremental_mm":
        cfg = MMConfig(batch_size=batch_size, q=q, alpha=alpha,
                       selection=selection, seed=seed)
        W, trace = mm_engine.run_incremental(X_train, model, cfg, epochs=epochs,
                                             init=init, callback=callback)
    elif algo == "online_mm":
        cfg = MMConfig(batch_size=batch_size, q=q, alpha=alpha, seed=seed)
        W, trace = mm_engine.run_online(stream, model, cfg, max_samples=max_samples,
                                        init=init, callback=callback,
                                        samples_per_epoch=samples_per_epoch,
                                        p=X_train.shape[0],
                                        whiten_subsample=WHITEN_SUBSAMPLE)
    elif algo == "batch_mm":
        W, trace = baselines.full_batch_mm_run(X_train, model, epochs=epochs,
                                               init=init, callback=callback,
                                               cfg=MMConfig(seed=seed))
    else:
        sgd_cfg = baselines.SGDConfig(step=step, batch_size=batch_size, seed=seed,
                                      schedule="inv_sqrt" if online else "constant")
        if algo == "sag":
            W, trace = baselines.sag_run(X_train, model, sgd_cfg, epochs=epochs,
                                         init=init, callback=callback,
                                         include_identity=include_identity)
        elif online:
            head = X_train[:, :min(WHITEN_SUBSAMPLE, n_train)]
            W0 = init if isinstance(init, np.ndarray) else (
                np.eye(X_train.shape[0]) if init == "identity"
                else datakit.whiten_init(head, subsample_size=head.shape[1], mode="head"))
            W, trace = baselines.sgd_run(stream, model, sgd_cfg, init=W0,
                                         callback=callback, max_samples=max_samples,
                                         samples_per_epoch=samples_per_epoch,
                                         p=X_train.shape[0],
                                         include_identity=include_identity)
        else:
            W, trace = baselines.sgd_run(X_train, model, sgd_cfg, epochs=epochs,
                                         init=init, callback=callback,
                                         include_identity=include_identity)
    trace.algo = label or algo
    trace.seed = seed
    return W, trace


def _load_dataset(path, mixing_path=None):
    try:
        if str(path).endswith(".csv"):
            ds = datakit.load_dataset_csv(path)
        else:
            ds = datakit.load_dataset(path)
        if mixing_path:
            ds.mixing = datakit.load_matrix(mixing_path)
        return ds
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None


# ---------------------------------------------------------------------------
# bench config

class BenchConfig:
    """Parsed [bench] section plus the ordered [algo.*] sections."""

    def __init__(self):
        self.data = None
        self.mixing = None
        self.p = 5
        self.n = 10_000
        self.gen_seed = 0
        self.density = "huber"
        self.epochs = 10
        self.max_samples = None
        self.batch_size = 1000
        self.test_fraction = 0.1
        self.seeds = [0]
        self.outdir = "bench_out"
        self.jobs = None
        self.algos = []  # (label, knob dict)


def parse_bench_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise UsageError(f"bad config {path}: {exc}") from None

    cfg = BenchConfig()
    if not parser.has_section("bench"):
        raise UsageError(f"{path}: missing [bench] section")
    bench = parser["bench"]
    for key in bench:
        if key not in _BENCH_KEYS:
            raise UsageError(f"{path}: unknown [bench] key {key!r}")
    cfg.data = bench.get("data")
    cfg.mixing = bench.get("mixing")
    cfg.p = bench.getint("p", cfg.p)
    cfg.n = bench.getint("n", cfg.n)
    cfg.gen_seed = bench.getint("gen_seed", cfg.gen_seed)
    cfg.density = bench.get("density", cfg.density)
    cfg.epochs = bench.getint("epochs", cfg.epochs)
    cfg.max_samples = bench.getint("max_samples", None) if "max_samples" in bench else None
    cfg.batch_size = bench.getint("batch_size", cfg.batch_size)
    cfg.test_fraction = bench.getfloat("test_fraction", cfg.test_fraction)
    cfg.seeds = [int(tok) for tok in re.split(r"[,\s]+", bench.get("seeds", "0").strip()) if tok]
    cfg.outdir = bench.get("outdir", cfg.outdir)
    cfg.jobs = bench.getint("jobs", None) if "jobs" in bench else None

    if cfg.density not in DENSITIES:
        raise UsageError(f"{path}: unknown density {cfg.density!r}")
    if not 0.0 <= cfg.test_fraction <= 0.5:
        raise UsageError(f"{path}: test_fraction must lie in [0, 0.5]")
    if not cfg.seeds:
        raise UsageError(f"{path}: at least one seed required")

    for section in parser.sections():
        if section == "bench":
            continue
        if not section.startswith("algo."):
            raise UsageError(f"{path}: unexpected section [{section}]")
        label = section[len("algo."):]
        if not re.fullmatch(r"[A-Za-z0-9_\-]+", label):
            raise UsageError(f"{path}: bad algo label {label!r}")
        sec = parser[section]
        for key in sec:
            if key not in _ALGO_KEYS:
                raise UsageError(f"{path}: unknown key {key!r} in [{section}]")
        if "algo" not in sec:
            raise UsageError(f"{path}: [{section}] needs an 'algo' key")
        knobs = {"algo": sec.get("algo")}
        if knobs["algo"] not in ALGOS:
            raise UsageError(f"{path}: unknown algo {knobs['algo']!r} in [{section}]")
        for key, getter in (("batch_size", sec.getint), ("q", sec.getint),
                            ("epochs", sec.getint), ("max_samples", sec.getint),
                            ("alpha", sec.getfloat), ("step", sec.getfloat)):
            if key in sec:
                knobs[key] = getter(key)
        for key in ("selection", "init"):
            if key in sec:
                knobs[key] = sec.get(key)
        if "grad_no_identity" in sec:
            knobs["grad_no_identity"] = sec.getboolean("grad_no_identity")
        cfg.algos.append((label, knobs))

    if not cfg.algos:
        raise UsageError(f"{path}: at least one [algo.*] section required")
    return cfg


def _bench_dataset(cfg):
    if cfg.data:
        return _load_dataset(cfg.data, cfg.mixing)
    return datakit.gen_laplace_mixture(cfg.p, cfg.n, cfg.gen_seed)


def _bench_one(cfg, label, knobs, seed):
    """One (algo, seed) cell; self-contained so it can run in a worker process."""
    dataset = _bench_dataset(cfg)
    kwargs = dict(density=cfg.density, epochs=cfg.epochs, max_samples=cfg.max_samples,
                  test_fraction=cfg.test_fraction, batch_size=cfg.batch_size)
    knobs = dict(knobs)
    algo = knobs.pop("algo")
    if "grad_no_identity" in knobs:
        kwargs["include_identity"] = not knobs.pop("grad_no_identity")
    kwargs.update(knobs)
    _, trace = execute_run(dataset, algo, seed=seed, label=label, **kwargs)
    return trace


def _bench_cell(payload):
    cfg, label, knobs, seed = payload
    try:
        return label, seed, _bench_one(cfg, label, knobs, seed), None
    except (MmicaError, ValueError) as exc:
        return label, seed, None, f"{type(exc).__name__}: {exc}"


def _quartile_rows(label, traces):
    """Long-format median/IQR rows per (epoch, metric) across one label's seeds."""
    rows = []
    if not traces:
        return rows
    epochs = sorted({rec.epoch for tr in traces for rec in tr.records})
    for epoch in epochs:
        for metric in TRACE_COLUMNS[3:]:
            vals = np.array([getattr(rec, metric)
                             for tr in traces for rec in tr.records if rec.epoch == epoch])
            if vals.size == 0 or np.all(np.isnan(vals)):
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                med, q25, q75 = (np.nanmedian(vals),
                                 np.nanpercentile(vals, 25), np.nanpercentile(vals, 75))
            rows.append([label, epoch, metric, _fmt(float(med)), _fmt(float(q25)),
                         _fmt(float(q75))])
    return rows


def run_bench(cfg, jobs=1):
    """Execute the algos x seeds grid, write per-run traces and summary.csv.

    Returns (num_failures, outdir).  Failures become ``failed`` rows in the
    summary (median column holds the seed) instead of aborting the sweep.
    """
    os.makedirs(cfg.outdir, exist_ok=True)
    cells = [(cfg, label, knobs, seed) for label, knobs in cfg.algos for seed in cfg.seeds]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_cell, cells))
    else:
        results = [_bench_cell(c) for c in cells]

    by_label = {label: [] for label, _ in cfg.algos}
    failures = []
    for label, seed, trace, err in results:
        if err is not None:
            failures.append((label, seed, err))
            print(f"bench: {label} seed {seed} failed: {err}", file=sys.stderr)
            continue
        write_trace_csv(os.path.join(cfg.outdir, f"{label}_seed{seed}.csv"), trace)
        by_label[label].append(trace)

    summary_path = os.path.join(cfg.outdir, "summary.csv")
    try:
        with open(summary_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["algo", "epoch", "metric", "median", "q25", "q75"])
            for label, _ in cfg.algos:
                writer.writerows(_quartile_rows(label, by_label[label]))
            for label, seed, _err in failures:
                writer.writerow([label, seed, "failed", "nan", "nan", "nan"])
    except OSError as exc:
        raise IoError(f"cannot write {summary_path}: {exc}") from None
    return len(failures), cfg.outdir


# ---------------------------------------------------------------------------
# CLI

def _build_parser():
    parser = argparse.ArgumentParser(prog="mmica",
                                     description="Stochastic majorization-minimization ICA")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic Laplace-mixture dataset")
    gen.add_argument("--p", type=int, required=True, help="number of sources (>= 2)")
    gen.add_argument("--n", type=int, required=True, help="number of samples")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output dataset path (.icad)")
    gen.add_argument("--mixing-out", help="optional ground-truth mixing path (.icam)")

    run = sub.add_parser("run", help="run one solver on a dataset")
    run.add_argument("--algo", required=True, choices=ALGOS)
    run.add_argument("--data", required=True, help="dataset path (.icad or .csv)")
    run.add_argument("--density", default="huber", choices=sorted(DENSITIES))
    run.add_argument("--epochs", type=int, default=10)
    run.add_argument("--max-samples", type=int, default=None,
                     help="online mode: total streamed samples")
    run.add_argument("--batch-size", type=int, default=1000)
    run.add_argument("--q", type=int, default=2)
    run.add_argument("--alpha", type=float, default=0.5)
    run.add_argument("--step", type=float, default=0.1)
    run.add_argument("--selection", default="greedy", choices=mm_engine.SELECTIONS)
    run.add_argument("--test-fraction", type=float, default=0.1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--init", default="whiten", choices=("whiten", "identity"))
    run.add_argument("--trace", help="write the run trace CSV here")
    run.add_argument("--w-out", help="write the final unmixing matrix here (.icam)")
    run.add_argument("--mixing", help="ground-truth mixing (.icam) for the amari column")
    run.add_argument("--grad-no-identity", action="store_true",
                     help="use the bare gradient G'(Y)Y^T/n_b without the -I term")

    bench = sub.add_parser("bench", help="run an algorithms x seeds sweep")
    bench.add_argument("--config", required=True, help="INI-style bench config")
    bench.add_argument("--jobs", type=int, default=None,
                       help="parallel runs (default: MMICA_JOBS or 1)")
    return parser


def cli_gen(args):
    if args.p < 2:
        raise UsageError("--p must be >= 2")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    dataset = datakit.gen_laplace_mixture(args.p, args.n, args.seed)
    datakit.save_dataset(args.out, dataset)
    if args.mixing_out:
        datakit.save_matrix(args.mixing_out, dataset.mixing)
    print(f"wrote {args.out} (p={args.p}, n={args.n}, seed={args.seed})"
          + (f" and {args.mixing_out}" if args.mixing_out else ""))
    return EXIT_OK


def cli_run(args):
    if args.max_samples is not None and args.algo not in ONLINE_CAPABLE:
        raise UsageError(f"--max-samples applies to {ONLINE_CAPABLE}, not {args.algo!r}")
    dataset = _load_dataset(args.data, args.mixing)
    try:
        W, trace = execute_run(
            dataset, args.algo, density=args.density, epochs=args.epochs,
            max_samples=args.max_samples, test_fraction=args.test_fraction,
            seed=args.seed, batch_size=args.batch_size, q=args.q, alpha=args.alpha,
            step=args.step, selection=args.selection, init=args.init,
            include_identity=not args.grad_no_identity)
    except Diverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        partial = getattr(exc, "trace", None)
        if partial is not None and args.trace:
            partial.algo, partial.seed = args.algo, args.seed
            write_trace_csv(args.trace, partial)
        return EXIT_DIVERGED
    if args.trace:
        write_trace_csv(args.trace, trace)
    if args.w_out:
        datakit.save_matrix(args.w_out, W)
    last = trace.records[-1]
    print(f"{args.algo}: {len(trace)} records, final train_loss={last.train_loss:.6g}"
          f" test_loss={last.test_loss:.6g}")
    return EXIT_OK


def cli_bench(args):
    cfg = parse_bench_config(args.config)
    jobs = args.jobs
    if jobs is None:
        jobs = cfg.jobs
    if jobs is None:
        jobs = int(os.environ.get("MMICA_JOBS", "1"))
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    failures, outdir = run_bench(cfg, jobs=jobs)
    total = len(cfg.algos) * len(cfg.seeds)
    print(f"bench: {total - failures}/{total} runs ok, output in {outdir}")
    return EXIT_OK if failures == 0 else EXIT_IO


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {"gen": cli_gen, "run": cli_run, "bench": cli_bench}[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IoError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Diverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except MmicaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
