"""
Command-line front end.

    ncnorm psi --input Y.json --p 1.5 --q 3
    ncnorm nc --input Y.json --p 2 --q 1 --restarts 8
    ncnorm check --suite gradients --trials 50 --seed 1
    ncnorm diverge --p 1.5 --q 3 --n-min 4 --n-max 24 --out table.csv

Exit codes: 0 for success, 1 when a check or table assertion fails, 2 for
usage and input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import checks
from .cl import cl_norm
from .core import DEFAULT_CONFIG, OptimizerConfig, make_order, psi
from .counterexamples import (
    SPLITTINGS,
    decreasing_points,
    divergence_table,
    is_monotone,
    nonmono_scan,
)
from .errors import NCNormError
from .io import MatrixFileError, fmt, read_matrix, write_matrix
from .linalg import INSTANCE_KINDS, random_instances
from .nc import nc_norm

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

CSV_HEADER = ["n", "psi", "nc", "ratio", "paper_bound"]


class UsageError(Exception):
    pass


def _exponent(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != v:
        raise argparse.ArgumentTypeError("exponent must not be nan")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _out(stream, *pairs):
    for key, value in pairs:
        if isinstance(value, float):
            value = fmt(value)
        print(f"{key} {value}", file=stream)


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(
        tol=args.tol if args.tol is not None else DEFAULT_CONFIG.tol,
        max_iters=DEFAULT_CONFIG.max_iters,
        restarts=getattr(args, "restarts", None) or DEFAULT_CONFIG.restarts,
        seed=getattr(args, "seed", None) or 0,
    )


def cmd_psi(args, out) -> int:
    Y = read_matrix(args.input)
    print(fmt(psi(Y, make_order(args.p, args.q))), file=out)
    return EXIT_OK


def cmd_nc(args, out) -> int:
    Y = read_matrix(args.input)
    est = nc_norm(Y, make_order(args.p, args.q), _config(args))
    _out(
        out,
        ("value", float(est.value)),
        ("lower", float(est.lower)),
        ("upper", float(est.upper)),
        ("status", est.status),
    )
    return EXIT_OK


def cmd_cl(args, out) -> int:
    Y = read_matrix(args.input)
    res = cl_norm(Y, make_order(args.p, args.q), _config(args))
    _out(
        out,
        ("value", float(res.value)),
        ("upper", float(res.upper)),
        ("status", res.estimate.status),
        ("path", "hermitian" if res.hermitian_path else "dilation"),
    )
    return EXIT_OK


def cmd_check(args, out) -> int:
    if args.suite not in checks.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(sorted(checks.SUITES))}")
    report = checks.run_suite(args.suite, args.trials, args.seed or 0)
    print(json.dumps(report.as_dict(), indent=2), file=out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _figure_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".png")


def cmd_diverge(args, out) -> int:
    ord = make_order(args.p, args.q)
    n_min = args.n_min if args.n_min is not None else 4
    n_max = args.n_max if args.n_max is not None else 24
    if n_min > n_max:
        raise UsageError("--n-min must not exceed --n-max")
    rows = divergence_table(ord, n_min, n_max)
    path = Path(args.out) if args.out else None
    if path is not None:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([r.n, fmt(r.psi), fmt(r.nc), fmt(r.ratio), fmt(r.paper_bound)])
        from .plotting import divergence_figure

        divergence_figure(rows, ord, _figure_path(path))
    monotone = is_monotone([r.ratio for r in rows])
    bound_ok = all(r.holds(ord) for r in rows)
    last = rows[-1]
    _out(out, ("n", last.n), ("ratio", float(last.ratio)))
    if last.cl_nc_lower is not None:
        _out(
            out,
            ("cl_nc_lower", float(last.cl_nc_lower)),
            ("cl_nc_lower_increasing", str(is_monotone([r.cl_nc_lower for r in rows], strict=True)).lower()),
        )
    _out(out, ("monotone", str(monotone).lower()), ("bound_holds", str(bound_ok).lower()))
    if path is not None:
        _out(out, ("csv", str(path)), ("figure", str(_figure_path(path))))
    return EXIT_OK if monotone and bound_ok else EXIT_FAIL


def cmd_gen(args, out) -> int:
    if args.kind not in INSTANCE_KINDS:
        raise UsageError(f"unknown kind {args.kind!r}; choose from {', '.join(INSTANCE_KINDS)}")
    Y = random_instances(args.kind, args.n, args.m, args.seed or 0)
    if args.out:
        write_matrix(Y, args.out)
        _out(out, ("wrote", args.out))
    else:
        from .io import to_dict

        print(json.dumps(to_dict(Y)), file=out)
    return EXIT_OK


def cmd_nonmono(args, out) -> int:
    points = nonmono_scan()
    found = decreasing_points(points)
    for splitting in SPLITTINGS:
        sub = [pt for pt in found if pt.splitting == splitting]
        _out(out, (f"decreasing[{splitting}]", len(sub)))
    if found:
        best = min(found, key=lambda pt: pt.derivative)
        _out(
            out,
            ("best_p", best.p),
            ("best_q", best.q),
            ("best_splitting", best.splitting),
            ("best_derivative", best.derivative),
        )
    if args.out:
        path = Path(args.out)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["p", "q", "splitting", "derivative", "derivative_half"])
            for pt in points:
                w.writerow([fmt(pt.p), fmt(pt.q), pt.splitting, fmt(pt.derivative), fmt(pt.derivative_half)])
        from .plotting import nonmono_figure

        nonmono_figure(points, _figure_path(path))
        _out(out, ("csv", str(path)), ("figure", str(_figure_path(path))))
    return EXIT_OK if found else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncnorm", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    def orders(p):
        p.add_argument("--p", type=_exponent, required=True)
        p.add_argument("--q", type=_exponent, required=True)

    sp = sub.add_parser("psi", help="evaluate the functional psi on a PSD matrix file")
    sp.add_argument("--input", required=True)
    orders(sp)
    sp.set_defaults(func=cmd_psi)

    sp = sub.add_parser("nc", help="NC norm value with its bracket and status")
    sp.add_argument("--input", required=True)
    orders(sp)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--restarts", type=_positive_int)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_nc)

    sp = sub.add_parser("cl", help="Carlen-Lieb norm upper estimate")
    sp.add_argument("--input", required=True)
    orders(sp)
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_cl)

    sp = sub.add_parser("check", help="run a property suite and print a JSON report")
    sp.add_argument("--suite", required=True)
    sp.add_argument("--trials", type=_positive_int)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("diverge", help="closed-form divergence table (CSV plus figure)")
    orders(sp)
    sp.add_argument("--n-min", type=_positive_int)
    sp.add_argument("--n-max", type=_positive_int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_diverge)

    sp = sub.add_parser("gen", help="write a random instance as a matrix file")
    sp.add_argument("--kind", required=True)
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--m", type=_positive_int, default=1)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("nonmono", help="scan psi along the non-monotone direction")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_nonmono)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, MatrixFileError, NCNormError, ValueError, KeyError, OSError) as exc:
        print(f"ncnorm {args.command}: error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
