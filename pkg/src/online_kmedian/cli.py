"""Command line entry point: ``online-kmedian {run,oracle,verify}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .errors import (
    DataError,
    InvalidSolutionError,
    KMedianError,
    PenaltyMonotonicityError,
)
from .ledger import Instance
from .metric import MetricSpace
from .online import F_EQUALS_C, STATIC_F, OnlineConfig
from .oracle import brute_force_kmedo

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3

SETTINGS = {"static-f": STATIC_F, "f-eq-c": F_EQUALS_C}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_data_args(p):
    p.add_argument("--input", required=True, help="CSV of points, one per row, in arrival order")
    p.add_argument("--columns", default=None, help="zero-based feature columns, e.g. 0-9 (default: all)")
    p.add_argument("--max-rows", type=int, default=10_000)
    p.add_argument("--facilities", default=None, help="CSV of candidate facilities (static-f)")
    p.add_argument("--setting", choices=sorted(SETTINGS), default="f-eq-c")
    p.add_argument("--scale", type=float, default=1.0, help="multiply every distance by this")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--z", type=int, default=200)


def _add_run_args(p):
    _add_data_args(p)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.2, help="lazy trigger; 0 runs local search every step")
    p.add_argument("--z-mode", choices=["static", "incremental"], default="static")
    p.add_argument("--epsilon-z", type=float, default=0.05)
    p.add_argument("--baseline-restarts", type=int, default=0, help="0 skips the offline baseline")
    p.add_argument("--stride", type=int, default=50, help="baseline checkpoint spacing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shuffle", action="store_true", help="permute arrivals with --seed")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="online-kmedian", description="Online k-median with outliers")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="replay a stream and write the per-step CSV log")
    _add_run_args(run)
    run.add_argument("--out", default="-", help="log path, '-' for stdout")

    orc = sub.add_parser("oracle", help="brute-force k-median with z outliers on a tiny input")
    _add_data_args(orc)

    ver = sub.add_parser("verify", help="check invariants of a written log")
    _add_run_args(ver)
    ver.add_argument("--log", required=True)
    ver.add_argument("--replay", action="store_true", help="also re-run and compare bytes")
    return ap


def _spec(args, out=None) -> bench.ExperimentSpec:
    cfg = OnlineConfig(
        k=args.k, z=args.z, epsilon=args.epsilon, gamma=args.gamma, ell=args.ell,
        setting=SETTINGS[args.setting], z_mode=args.z_mode, epsilon_z=args.epsilon_z,
        lazy_alpha=args.alpha,
    )
    return bench.ExperimentSpec(
        input_path=args.input, config=cfg, columns=bench.parse_columns(args.columns),
        max_rows=args.max_rows, baseline_restarts=args.baseline_restarts,
        checkpoint_stride=args.stride, output_path=out, seed=args.seed,
        shuffle=args.shuffle, scale=args.scale, facilities_path=args.facilities,
    )


def _cmd_run(args) -> int:
    bench.run_experiment(_spec(args, args.out))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    cols = bench.parse_columns(args.columns)
    pts = bench.load_points_csv(args.input, cols, args.max_rows)
    if SETTINGS[args.setting] == STATIC_F:
        if args.facilities is None:
            raise DataError("static-f needs --facilities")
        fac = bench.load_points_csv(args.facilities, cols, None, min_rows=args.k)
        space = MetricSpace.euclidean(np.vstack([fac, pts]), scale=args.scale)
        F, C = list(range(len(fac))), list(range(len(fac), len(fac) + len(pts)))
    else:
        space = MetricSpace.euclidean(pts, scale=args.scale)
        F = C = list(range(len(pts)))
    opt, medians, outliers = brute_force_kmedo(Instance(space, F, C, args.k, args.z))
    json.dump({"opt": opt, "medians": list(medians), "outliers": list(outliers)}, sys.stdout)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    spec = _spec(args)
    rows = bench.read_log_csv(args.log)
    _, _, clients = bench.load_experiment_points(spec)
    problems = bench.check_log(rows, spec.config, len(clients))
    if len(rows) != len(clients):
        problems.append(f"log has {len(rows)} rows, stream has {len(clients)} points")
    if args.replay:
        fresh = bench.format_log(bench.run_experiment(spec))
        if fresh != Path(args.log).read_text():
            problems.append("replay output differs from the log")
    for msg in problems:
        print(msg, file=sys.stderr)
    print("ok" if not problems else f"{len(problems)} violation(s)")
    return EXIT_INVARIANT if problems else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "oracle": _cmd_oracle, "verify": _cmd_verify}[args.command]
    try:
        return handler(args)
    except (InvalidSolutionError, PenaltyMonotonicityError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (KMedianError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
