"""Command-line front end.

Exit codes: 0 success (or symplectic / PASS), 1 negative verdict (not
symplectic, failed or invalid order study), 2 configuration or usage error,
3 numeric failure during a run, 4 output could not be written.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import harness
from .config import load_config
from .exceptions import CapabilityError, ConvergenceError, NumericError, UsageError
from .registry import list_models

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_NUMERIC, EXIT_OUTPUT = 0, 1, 2, 3, 4


def _write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


class _OutputError(Exception):
    pass


def _write_or_fail(path, text):
    try:
        _write(path, text)
    except OSError as exc:
        raise _OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


def cmd_simulate(args):
    config = load_config(args.config)
    out = args.out or config.output_path
    instance, traj = harness.run_simulation(config)
    _write_or_fail(out, harness.trajectory_csv(instance, traj))
    if args.gnuplot:
        _write_or_fail(os.path.splitext(out)[0] + ".gp",
                       harness.gnuplot_script(out, harness.csv_columns(instance)))
    print(f"wrote {len(traj)} rows to {out} (t_final={float(traj.times[-1])!r}, "
          f"max|dH_total|={traj.max_abs_dH:.3e})")
    return EXIT_OK


def cmd_check(args):
    config = load_config(args.config)
    verdict = harness.run_check(config, constrained=args.constrained,
                                samples=args.samples, tol=args.tol)
    print(verdict.summary())
    return EXIT_OK if verdict.symplectic else EXIT_NEGATIVE


def _parse_dts(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid step list {text!r}") from None


def cmd_order_study(args):
    config = load_config(args.config)
    if args.dts is not None:
        dts = args.dts
    else:
        dts = [config.dt / 2**i for i in range(args.halvings + 1)]
    if len(dts) < 2:
        raise UsageError("an order study needs at least two step sizes")
    report = harness.order_study(config, dts, jobs=args.jobs)
    out = args.out or os.path.splitext(config.output_path)[0] + "_order.csv"
    _write_or_fail(out, report.to_csv())
    print(report.summary())
    print(f"wrote {out}")
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_list_models(args):
    for entry in list_models():
        print(f"{entry.name}: {entry.description}")
        for p in entry.params:
            print(f"    model.{p.name} = {p.default!r}  # {p.doc}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="coupled-ham",
                                     description="Simulate and check coupled Hamiltonian systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a configured model and write CSV")
    p.add_argument("config")
    p.add_argument("--out", help="CSV path (overrides run.output)")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="numerical symplecticity verdict")
    p.add_argument("config")
    p.add_argument("--samples", type=int, help="number of sampled states")
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--constrained", action="store_true",
                   help="restrict to the tangent space of the registered constraints")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("order-study", help="energy-error ratios under step halving")
    p.add_argument("config")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--dts", type=_parse_dts, help="comma-separated step sizes")
    group.add_argument("--halvings", type=int, help="halve the config step this many times")
    p.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p.add_argument("--out", help="report CSV path")
    p.set_defaults(func=cmd_order_study)

    p = sub.add_parser("list-models", help="list registered models and their parameters")
    p.set_defaults(func=cmd_list_models)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, ConvergenceError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
