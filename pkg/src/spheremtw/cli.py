"""Command-line front end.

Exit codes: 0 for StrongA3/A3w (or a passing check), 2 for Violated, a
failed oracle comparison or a missing sign change, 3 for Indeterminate, 1
for usage and domain errors, 4 when ``suite`` reports a mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .analytic import CONVENTIONS, OrientationCase, gradient_bound, o_value, p_coefficients
from .chart import SphereConfig, target_from_case
from .classifier import (
    DEFAULT_GRID,
    DEFAULT_MARGIN,
    DEFAULT_STRICTNESS,
    classify,
    example_suite,
    mstar_cubic,
    mstar_positive,
    refine_root,
    scan,
)
from .costjet import CostModel, Family
from .errors import MTWError, NoSignChange
from .oracle import mtw_tensor_fd

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_VIOLATED, EXIT_INDETERMINATE, EXIT_MISMATCH = 0, 1, 2, 3, 4
_VERDICT_EXIT = {"StrongA3": EXIT_OK, "A3w": EXIT_OK, "Violated": EXIT_VIOLATED,
                 "Indeterminate": EXIT_INDETERMINATE}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_cost(p: argparse.ArgumentParser, with_dim: bool = True) -> None:
    p.add_argument("--cost", required=True, choices=[f.value for f in Family if f is not Family.CUSTOM])
    p.add_argument("--sign", default="+", choices=["+", "-"], help="sign of the profile")
    p.add_argument("--m", type=float, help="exponent of the power profile")
    p.add_argument("--radius", "--R", dest="radius", type=float, default=1.0)
    if with_dim:
        p.add_argument("--dim", type=int, default=3)
    p.add_argument("--convention", choices=CONVENTIONS, default="geodesic")


def _add_output(p: argparse.ArgumentParser, formats=("text", "json"), default="text") -> None:
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--out", help="write to this path instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spheremtw", description="MTW (A3) checks for costs f(d) on round spheres.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="scan and classify one cost")
    _add_cost(p)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    p.add_argument("--strictness", type=float, default=DEFAULT_STRICTNESS)
    p.add_argument("--d-min", type=float, help="smallest distance considered")
    p.add_argument("--d-max", type=float, help="largest distance considered")
    _add_output(p)

    p = sub.add_parser("scan", help="tabulate P1..P4 and O1..O4 over distance")
    _add_cost(p, with_dim=False)
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    p.add_argument("--d-min", type=float)
    p.add_argument("--d-max", type=float)
    _add_output(p, ("csv", "json"), "csv")

    p = sub.add_parser("oracle", help="compare the analytic value with finite differences")
    _add_cost(p, with_dim=False)
    p.add_argument("--dim", type=int, help="default: 3 for perp, 2 otherwise")
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--case", required=True, choices=[c.value for c in OrientationCase])
    _add_output(p)

    p = sub.add_parser("bifurcate", help="bifurcation constants and thresholds")
    bsub = p.add_subparsers(dest="which", required=True, parser_class=_Parser)
    q = bsub.add_parser("mstar-cubic")
    _add_output(q)
    q = bsub.add_parser("mstar-positive")
    q.add_argument("--R", "--radius", dest="R", type=float, default=1e4)
    q.add_argument("--convention", choices=CONVENTIONS, default="geodesic")
    q.add_argument("--source", choices=("generic", "literal"), default="generic")
    _add_output(q)
    q = bsub.add_parser("root")
    _add_cost(q, with_dim=False)
    q.add_argument("--case", required=True, choices=[c.value for c in OrientationCase])
    q.add_argument("--bracket", type=float, nargs=2, required=True, metavar=("A", "B"))
    _add_output(q)

    p = sub.add_parser("bound", help="displacement bound for optimal maps on the unit sphere")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--rho-sup", type=float, required=True)
    _add_output(p)

    p = sub.add_parser("suite", help="run the built-in scenario suite")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--convention", choices=CONVENTIONS, default="geodesic")
    _add_output(p)
    return parser


def _model(args) -> CostModel:
    return CostModel.from_name(args.cost, sign=args.sign, m=args.m, R=args.radius)


def _json(command: str, payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "command": command, **payload},
                      sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    return "%.17g" % v


def cmd_classify(args) -> int:
    cfg = SphereConfig(args.radius, args.dim)
    report = classify(
        scan(_model(args), cfg, args.grid, args.margin, args.d_min, args.d_max, args.convention),
        args.dim, args.strictness)
    if args.format == "json":
        _emit(_json("classify", {"report": report.to_dict()}), args.out)
    else:
        _emit(report.summary() + "\n", args.out)
    return _VERDICT_EXIT[report.verdict]


def scan_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "P1", "P2", "P3", "P4", "O1", "O2", "O3", "O4", "degenerate"])
    for i, d in enumerate(report.grid):
        if report.degenerate[i]:
            w.writerow([_fmt(d)] + [""] * 8 + [1])
        else:
            w.writerow([_fmt(d)] + [_fmt(v) for v in report.p_values[:, i]]
                       + [_fmt(v) for v in report.o_values[:, i]] + [0])
    return buf.getvalue()


def cmd_scan(args) -> int:
    report = scan(_model(args), SphereConfig(args.radius, 2), args.grid, args.margin,
                  args.d_min, args.d_max, args.convention)
    if args.format == "json":
        _emit(_json("scan", {"scan": report.to_dict()}), args.out)
    else:
        _emit(scan_csv(report), args.out)
    return EXIT_OK


def oracle_record(model: CostModel, R: float, n: int, d: float, case, convention="geodesic") -> dict:
    case = OrientationCase.parse(case)
    cfg = SphereConfig(R, n)
    y, _, xi, eta = target_from_case(d, case, model, cfg)
    res = mtw_tensor_fd(model, cfg, y, xi, eta)
    analytic = float(o_value(p_coefficients(model, d, R, convention), case))
    diff = abs(res.value - analytic)
    tol = max(1e-3 * (1 + abs(analytic)), 5 * res.est_error)
    return {"model": model.to_dict(), "R": R, "n": n, "d": d, "case": case.value,
            "convention": convention, "analytic": analytic, "oracle": res.value,
            "difference": diff, "est_error": res.est_error, "tolerance": tol,
            "condition": res.condition, "pass": bool(diff <= tol)}


def cmd_oracle(args) -> int:
    case = OrientationCase.parse(args.case)
    n = args.dim or (3 if case is OrientationCase.PERP else 2)
    rec = oracle_record(_model(args), args.radius, n, args.d, case, args.convention)
    if args.format == "json":
        _emit(_json("oracle", {"result": rec}), args.out)
    else:
        _emit("analytic   %.12g\noracle     %.12g\ndifference %.3g\nest_error  %.3g\n%s\n" % (
            rec["analytic"], rec["oracle"], rec["difference"], rec["est_error"],
            "PASS" if rec["pass"] else "FAIL"), args.out)
    return EXIT_OK if rec["pass"] else EXIT_VIOLATED


def cmd_bifurcate(args) -> int:
    if args.which == "mstar-cubic":
        res = mstar_cubic()
    elif args.which == "mstar-positive":
        res = mstar_positive(args.R, args.convention, args.source)
    else:
        cfg = SphereConfig(args.radius, 2)
        res = refine_root(_model(args), cfg, args.case, args.bracket, args.convention)
    if args.format == "json":
        _emit(_json("bifurcate", {"result": res.to_dict()}), args.out)
    else:
        _emit(f"{res.parameter}* = {res.root:.12g}  residual {res.residual:.3g}  "
              f"bracket [{res.bracket[0]:g}, {res.bracket[1]:g}]  {res.note}\n", args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    value = gradient_bound(args.dim, args.rho_sup)
    if args.format == "json":
        _emit(_json("bound", {"dim": args.dim, "rho_sup": args.rho_sup, "bound": value}), args.out)
    else:
        _emit(_fmt(value) + "\n", args.out)
    return EXIT_OK


def cmd_suite(args) -> int:
    lines = example_suite(args.grid, args.convention)
    if args.format == "json":
        _emit(_json("suite", {"lines": [l.to_dict() for l in lines]}), args.out)
    else:
        _emit("".join(l.render() + "\n" for l in lines), args.out)
    return EXIT_OK if all(l.match for l in lines) else EXIT_MISMATCH


COMMANDS = {"classify": cmd_classify, "scan": cmd_scan, "oracle": cmd_oracle,
            "bifurcate": cmd_bifurcate, "bound": cmd_bound, "suite": cmd_suite}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NoSignChange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATED
    except (MTWError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
