"""Command-line front end.

Exit codes: 0 success, 1 usage/config error, 2 numerical or precondition
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import cluster
from .cluster import ShardPolicy
from .decision import Method
from .errors import DistMeanError, ParseError
from .harness import (
    ScenarioSpec,
    emit_power_curve,
    emit_report,
    load_csv,
    paired_diff,
    power_curve,
    run_experiment,
    shift_rows,
)
from .harness.config import load_config
from .harness.scenario import DEFAULT_ORACLE_REPS, DEFAULT_REPLICAS
from .sampler import CovSpec, DistFamily, MeanSpec, RngStream

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("distmean")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(v) for v in str(text).split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None

    return parse


def _methods(text):
    try:
        return [Method.parse(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown method in {text!r}") from None


def _method(text):
    try:
        return Method.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown method {text!r}") from None


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off", ""):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _add_common(p):
    p.add_argument("--config", help="flat key=value file; command-line flags override it")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=20240101, help="master seed")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")


def _add_scenario(p, methods, mean, c):
    p.add_argument("--n", type=int, required=False, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--c", type=float, default=c, help="signal magnitude")
    p.add_argument("--mean", default=mean, help="constant | spike:M")
    p.add_argument("--cov", default="identity", help="identity | ar:RHO | cs:OFFDIAG")
    p.add_argument("--family", default="gaussian", help="gaussian | t:NU")
    p.add_argument("--methods", type=_methods, default=methods)
    p.add_argument("--replicas", type=int, default=DEFAULT_REPLICAS)
    p.add_argument("--policy", type=ShardPolicy, default=ShardPolicy.DROP_REMAINDER)
    p.add_argument("--oracle-reps", type=int, default=DEFAULT_ORACLE_REPS,
                   help="Monte Carlo size for the sign-test drift oracle (0 disables the overlay)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $DISTMEAN_THREADS, 0 = auto)")


def _add_test_opts(p):
    p.add_argument("--header", type=_bool, nargs="?", const=True, default=False, help="skip the first line")
    p.add_argument("--mu0", default="0", help="hypothesized mean: one value (broadcast) or a comma list")
    p.add_argument("--method", type=_method, default=Method.DIS_HOTELLING)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--policy", type=ShardPolicy, default=ShardPolicy.REQUIRE_DIVISIBLE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distmean", description="One-sample mean tests on a simulated k-machine cluster.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("hotelling-sim", help="Monte Carlo size/power of the Hotelling tests")
    _add_common(p)
    _add_scenario(p, [Method.CEN_HOTELLING, Method.DIS_HOTELLING], "spike:2", 0.0)
    p.set_defaults(n=5000, p=50, k=30)

    p = sub.add_parser("sign-sim", help="Monte Carlo size/power of the spatial-sign tests")
    _add_common(p)
    _add_scenario(p, [Method.CEN_SIGN, Method.DIS_SIGN], "spike:20", 0.0)
    p.set_defaults(n=900, p=1000, k=10)

    p = sub.add_parser("power-curve", help="empirical vs analytic power over a (c, k) grid")
    _add_common(p)
    _add_scenario(p, [Method.CEN_HOTELLING, Method.DIS_HOTELLING], "spike:2", 0.0)
    p.add_argument("--c-grid", type=_csv_list(float), default=[0.0, 0.02, 0.04, 0.06])
    p.add_argument("--k-grid", type=_csv_list(int), default=[10, 20, 50, 100])
    p.set_defaults(n=10000, p=50)

    p = sub.add_parser("comm-cost", help="scalars and bytes shipped by each protocol")
    p.add_argument("--config")
    p.add_argument("--k", type=int, required=False, default=None)
    p.add_argument("--p", type=int, required=False, default=None)
    p.add_argument("--methods", type=_methods, default=list(Method))
    p.add_argument("--out", default="-")

    p = sub.add_parser("test-csv", help="one-sample test on a numeric CSV")
    p.add_argument("path")
    _add_common(p)
    _add_test_opts(p)

    p = sub.add_parser("paired-test", help="test the mean of row-wise differences of two CSVs")
    p.add_argument("path_a")
    p.add_argument("path_b")
    _add_common(p)
    _add_test_opts(p)
    p.add_argument("--shift-a", help="CSV whose column means estimate the first population mean")
    p.add_argument("--shift-b", help="CSV whose column means estimate the second population mean")
    p.add_argument("--delta", type=float, default=0.0, help="move differences toward the null by delta*(mean_a - mean_b)")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        values = load_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in values.items():
        action = known.get(key)
        if action is None or key in ("help", "config") or not action.option_strings:
            raise UsageError(f"config key {key!r} is not an option of {args.command}")
        try:
            defaults[key] = action.type(value) if action.type is not None else value
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _scenario(args) -> ScenarioSpec:
    if args.n is None or args.p is None:
        raise UsageError("--n and --p are required")
    try:
        family = DistFamily.parse(args.family)
        mean_spec = MeanSpec.parse(args.mean, args.c)
        cov_spec = CovSpec.parse(args.cov)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return ScenarioSpec(
        family=family,
        mean_spec=mean_spec,
        cov_spec=cov_spec,
        n=args.n,
        p=args.p,
        k=args.k,
        alpha=args.alpha,
        methods=tuple(args.methods),
        replicas=args.replicas,
        master_seed=args.seed,
        policy=args.policy,
        oracle_reps=args.oracle_reps,
    )


def _write_metadata(args, report) -> None:
    if args.out in (None, "-"):
        return
    with open(f"{args.out}.meta.json", "w", encoding="utf-8") as fh:
        json.dump(report.metadata, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _cmd_sim(args) -> None:
    spec = _scenario(args)
    report = run_experiment(spec, workers=args.threads)
    emit_report(report, args.out)
    _write_metadata(args, report)


def _cmd_power_curve(args) -> None:
    spec = _scenario(args)
    points = power_curve(spec, args.c_grid, args.k_grid, workers=args.threads)
    emit_power_curve(points, args.out)


def _cmd_comm_cost(args) -> None:
    if args.k is None or args.p is None:
        raise UsageError("--k and --p are required")
    rows = []
    for m in args.methods:
        ledger = cluster.comm_cost(m, args.k, args.p)
        rows.append(f"{m.value},{args.k},{args.p},{ledger.scalars_sent},{ledger.bytes_sent}\n")
    text = "method,k,p,scalars_sent,bytes_sent\n" + "".join(rows)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_mu0(text: str, p: int) -> np.ndarray:
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--mu0 must be numbers, got {text!r}") from None
    if len(values) == 1:
        return np.full(p, values[0])
    if len(values) != p:
        raise UsageError(f"--mu0 has {len(values)} entries, data has p={p}")
    return np.asarray(values)


def _run_test(args, data) -> None:
    mu0 = _parse_mu0(args.mu0, data.shape[1])
    sd = cluster.shard(data, args.k, RngStream.derive(args.seed, 0, 1), args.policy)
    decision, ledger = cluster.run_protocol(sd, mu0, args.method, args.alpha)
    out = decision.as_dict()
    out.update(
        n=int(data.shape[0]),
        n_used=sd.n_used,
        dropped=int(sd.dropped.size),
        p=sd.p,
        k=sd.k,
        scalars_sent=ledger.scalars_sent,
        bytes_sent=ledger.bytes_sent,
    )
    text = json.dumps(out, indent=2) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_test_csv(args) -> None:
    _run_test(args, load_csv(args.path, header=args.header))


def _cmd_paired_test(args) -> None:
    z = paired_diff(load_csv(args.path_a, header=args.header), load_csv(args.path_b, header=args.header))
    if args.delta:
        if not (args.shift_a and args.shift_b):
            raise UsageError("--delta needs --shift-a and --shift-b")
        shift = load_csv(args.shift_a, header=args.header).mean(axis=0) - load_csv(
            args.shift_b, header=args.header
        ).mean(axis=0)
        z = shift_rows(z, shift, args.delta)
    _run_test(args, z)


COMMANDS = {
    "hotelling-sim": _cmd_sim,
    "sign-sim": _cmd_sim,
    "power-curve": _cmd_power_curve,
    "comm-cost": _cmd_comm_cost,
    "test-csv": _cmd_test_csv,
    "paired-test": _cmd_paired_test,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DistMeanError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
