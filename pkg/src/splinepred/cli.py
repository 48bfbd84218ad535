"""Command-line benchmark harness.

Subcommands:
  generate  -- write a clean or noisy benchmark signal to a text table
  run       -- execute a configured sweep and persist the result table
  plot      -- render an SVG comparison from a persisted result table
  selftest  -- run the built-in property suite

Default experiment protocol (mackey_glass): integrate at dt=0.1, down-sample
to h=1, tau=6, dim=6, n_train=1000; lorenz: h=0.01, tau=1, dim=10, tf=h.
All other defaults are listed in `splinepred run --help`.
"""

import argparse
import dataclasses
import sys

from . import bench, plotting, selftest as selftest_mod, signals
from .errors import SplinepredError


def _add_generate(sub):
    p = sub.add_parser("generate", help="generate a benchmark signal",
                       description="Integrate one of the benchmark systems and "
                                   "write a (time, value) table; --snr adds "
                                   "seeded Gaussian noise.")
    p.add_argument("--system", choices=(bench.SYSTEM_MACKEY_GLASS, bench.SYSTEM_LORENZ),
                   required=True)
    p.add_argument("--n-samples", type=int, default=1000, help="samples to keep")
    p.add_argument("--step", type=float, default=None,
                   help="output sample step h (default: 1.0 for mackey_glass "
                        "after x10 down-sampling, 0.01 for lorenz)")
    p.add_argument("--transient", type=float, default=None,
                   help="discarded transient in time units (default: 1000 for "
                        "mackey_glass, 100 for lorenz)")
    p.add_argument("--snr", type=float, default=0.0,
                   help="noise-to-signal variance ratio (default 0 = clean)")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--output", required=True, help="output text file")


def _add_run(sub):
    p = sub.add_parser("run", help="run a configured experiment sweep",
                       description="Run every (seed, snr, tf, method) cell of "
                                   "the configured sweep, sharing the noisy "
                                   "training data across methods, and append "
                                   "records to <output-dir>/results.tsv.")
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--output-dir", default=None, help="override config output_dir")
    p.add_argument("--seed", type=int, default=None,
                   help="run a single seed instead of the configured list")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel worker processes; does not affect outputs")
    p.add_argument("--strict", action="store_true",
                   help="exit nonzero if any record carries a failure marker")


def _add_plot(sub):
    p = sub.add_parser("plot", help="render an SVG from a result table",
                       description="Seed-averaged RMS per method against snr "
                                   "or tf; deterministic output bytes.")
    p.add_argument("--input", required=True, help="results.tsv from a run")
    p.add_argument("--x-axis", choices=("snr", "tf"), default="snr")
    p.add_argument("--snr", type=float, default=None, help="keep only this snr")
    p.add_argument("--tf", type=float, default=None, help="keep only this tf")
    p.add_argument("--output", required=True, help="output .svg path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splinepred",
        description="Benchmarks for noisy dynamical time-series prediction: "
                    "epsilon-SVR and kernel ridge regression on noisy delay "
                    "coordinates versus smoothing-spline denoising followed "
                    "by kernel ridge regression.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_run(sub)
    _add_plot(sub)
    sub.add_parser("selftest", help="run the built-in property suite")
    return parser


def _cmd_generate(args) -> int:
    if args.system == bench.SYSTEM_MACKEY_GLASS:
        step = 1.0 if args.step is None else args.step
        transient = 1000.0 if args.transient is None else args.transient
        factor = step / 0.1
        if abs(factor - round(factor)) > 1e-9 or round(factor) < 1:
            raise SplinepredError(
                f"--step {step} must be a positive multiple of the 0.1 "
                f"integration step")
        factor = int(round(factor))
        fine = signals.generate_mackey_glass(0.1, (args.n_samples - 1) * factor + 1,
                                             transient)
        signal = fine.downsample(factor)
    else:
        step = 0.01 if args.step is None else args.step
        transient = 100.0 if args.transient is None else args.transient
        signal = signals.generate_lorenz(step, args.n_samples, transient)
    if args.snr > 0:
        signal = signals.add_noise(signal, signals.NoiseSpec(args.snr, args.seed))
    signals.write_signal(args.output, signal)
    print(f"wrote {len(signal)} samples (h={signal.h:g}) to {args.output}")
    return 0


def _cmd_run(args) -> int:
    config = bench.parse_config(args.config)
    if args.output_dir is not None:
        config = dataclasses.replace(config, output_dir=args.output_dir)
    if args.seed is not None:
        config = dataclasses.replace(config, seeds=(args.seed,))

    def log(record):
        status = f"rms={record.rms:.5g}" if not record.failed else f"FAILED:{record.error}"
        print(f"  {record.method} seed={record.seed} snr={record.snr:g} "
              f"tf={record.tf:g} {status} ({record.wall_time:.1f}s)")

    records = bench.run_experiment(config, jobs=args.jobs, log=log)
    n_failed = sum(r.failed for r in records)
    print(f"{len(records)} records written to {config.output_dir}/results.tsv "
          f"({n_failed} failed)")
    if args.strict and n_failed:
        return 1
    return 0


def _cmd_plot(args) -> int:
    records = bench.read_records(args.input)
    if args.snr is not None:
        records = [r for r in records if r.snr == args.snr]
    if args.tf is not None:
        records = [r for r in records if r.tf == args.tf]
    plotting.emit_plot(records, args.x_axis, args.output)
    print(f"wrote {args.output}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "plot":
            return _cmd_plot(args)
        return selftest_mod.run_selftest()
    except (SplinepredError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
