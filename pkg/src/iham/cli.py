"""Command line entry point (``iham``).

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 invalid problem.
"""

from __future__ import annotations

import argparse
import io
import sys

import numpy as np

from .analysis import infinity_error, parse_levels, refinement_study, solve_case, truncation_errors
from .averaging import AveragingPolicy, QuadratureError
from .config import ConfigError, case_to_toml, load_config
from .exceptions import ConvergenceError, ExprError, ProblemValidationError, ZeroPivotError
from .greens import GreensFunction, reproduction_check
from .problem import CATALOG, CatalogError, ManufacturedCase, catalog_case, list_cases

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _param(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"parameter {name!r}: {value!r} is not a decimal number (fractions are not accepted)"
        ) from None


def _fmt(value, digits=None):
    if value is None:
        return ""
    if digits is None:
        return f"{value:.17g}"
    return f"{value:.{digits - 1}e}"


def _add_source(p):
    src = p.add_argument_group("problem source")
    src.add_argument("--case", choices=sorted(CATALOG), help="built-in manufactured case")
    src.add_argument(
        "--param", action="append", type=_param, default=[], metavar="NAME=VALUE",
        help="override a case parameter (repeatable)",
    )
    src.add_argument("--config", metavar="FILE", help="TOML problem file")


def _add_output(p):
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "table"), default="csv")
    p.add_argument("--digits", type=int, default=None, help="significant digits for display")


def _add_method(p):
    p.add_argument("--method", choices=("improved", "classical"), default=None)
    p.add_argument("--averaging", choices=("midpoint", "integral"), default=None)
    p.add_argument("--symmetrize", action="store_true", default=None)
    p.add_argument("--quad-tol", type=float, default=None)


def build_parser():
    parser = _Parser(prog="iham", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("solve1d", help="solve a 1D problem on one grid")
    _add_source(p)
    _add_method(p)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--emit-solution", action="store_true", help="write x,u nodal values")
    _add_output(p)

    p = sub.add_parser("solve2d", help="solve a 2D problem on one grid")
    _add_source(p)
    p.add_argument("--N", type=int, default=None, help="n for an n x n grid")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--emit-solution", action="store_true", help="write x,y,u nodal values")
    _add_output(p)

    p = sub.add_parser("refine", help="grid refinement study")
    _add_source(p)
    _add_method(p)
    p.add_argument("--N", default=None, help="levels: LO:HI (doubling) or comma list")
    p.add_argument("--tol", type=float, default=None)
    _add_output(p)

    p = sub.add_parser("truncation", help="local truncation errors of a 1D case")
    _add_source(p)
    _add_method(p)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--all", action="store_true", help="list T_i at every interior node")
    _add_output(p)

    p = sub.add_parser("greens-check", help="Green's function exactness check")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta-minus", type=float, required=True)
    p.add_argument("--beta-plus", type=float, required=True)
    p.add_argument("--W", type=float, default=1.0)
    p.add_argument("--N", type=int, default=64)
    _add_output(p)

    p = sub.add_parser("list-cases", help="list built-in cases")
    p.add_argument("--template", choices=sorted(CATALOG), help="print a case as a config file")
    _add_output(p)
    return parser


# ----------------------------------------------------------------- helpers


def _load_source(args, need_exact=False):
    if bool(args.case) == bool(args.config):
        raise UsageError("give exactly one of --case or --config")
    if args.case:
        params = dict(CATALOG[args.case].defaults)
        for name, value in args.param:
            if name not in params:
                raise UsageError(f"case {args.case!r} has no parameter {name!r}")
            params[name] = value
        return catalog_case(args.case, params), {}
    if args.param:
        raise UsageError("--param only applies to --case")
    obj, solver = load_config(args.config)
    if need_exact and not isinstance(obj, ManufacturedCase):
        raise UsageError("this command needs an [exact] section in the config file")
    return obj, solver


def _problem_of(obj):
    return obj.problem if isinstance(obj, ManufacturedCase) else obj


def _pick(cli_value, solver, key, default):
    if cli_value is not None:
        return cli_value
    return solver.get(key, default)


def _method_options(args, solver):
    method = _pick(args.method, solver, "method", "improved")
    averaging = _pick(args.averaging, solver, "averaging", None)
    quad_tol = _pick(args.quad_tol, solver, "quad_tol", 1e-12)
    if averaging is None:
        averaging = "integral" if method == "classical" else "midpoint"
    symmetrize = bool(_pick(args.symmetrize, solver, "symmetrize", False))
    return method, AveragingPolicy(averaging, quad_tol), symmetrize


def _require_dim(obj, dim, command):
    if _problem_of(obj).dim != dim:
        raise UsageError(f"{command} needs a {dim}D problem")


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(header, rows):
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def _records(args, header, rows):
    if args.format == "table":
        return _table(header, rows)
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for r in rows:
        out.write(",".join(r) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------- commands


def cmd_solve1d(args):
    obj, solver = _load_source(args)
    _require_dim(obj, 1, "solve1d")
    method, policy, symmetrize = _method_options(args, solver)
    N = int(_pick(args.N, solver, "N", 64))
    case = obj if isinstance(obj, ManufacturedCase) else None
    sol = solve_case(obj, N, method, symmetrize, policy)
    if args.emit_solution:
        rows = [(_fmt(x, args.digits), _fmt(u, args.digits)) for x, u in zip(sol.nodes, sol.values)]
        return _records(args, ("x", "u"), rows)
    err = infinity_error(sol, case.exact) if case else None
    pair = sol.pair
    row = (str(N), method, str(pair.j), _fmt(pair.h_l), _fmt(pair.h_r), _fmt(err, args.digits))
    return _records(args, ("N", "method", "j", "h_l", "h_r", "error"), [row])


def cmd_solve2d(args):
    obj, solver = _load_source(args)
    _require_dim(obj, 2, "solve2d")
    from .fd2d import solve_interface2d

    N = _pick(args.N, solver, "N", 64)
    m = int(_pick(args.m, solver, "m", N))
    n = int(_pick(args.n, solver, "n", m))
    tol = float(_pick(args.tol, solver, "tol", 1e-12))
    sol = solve_interface2d(_problem_of(obj), m, n, tol, args.max_iter)
    if args.emit_solution:
        X, Y = np.meshgrid(sol.grid.xs, sol.grid.ys)
        d = args.digits
        rows = [
            (_fmt(x, d), _fmt(y, d), _fmt(u, d))
            for x, y, u in zip(X.ravel(), Y.ravel(), sol.values.ravel())
        ]
        return _records(args, ("x", "y", "u"), rows)
    err = infinity_error(sol, obj.exact) if isinstance(obj, ManufacturedCase) else None
    row = (str(m), str(n), _fmt(err, args.digits), str(sol.info.iterations), _fmt(sol.info.residual, 3))
    return _records(args, ("m", "n", "error", "iterations", "residual"), [row])


def cmd_refine(args):
    obj, solver = _load_source(args, need_exact=True)
    levels_spec = _pick(args.N, solver, "N_list", None)
    if levels_spec is None:
        raise UsageError("refine needs --N LO:HI or a comma list")
    try:
        levels = parse_levels(levels_spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    method, policy, symmetrize = _method_options(args, solver)
    tol = float(_pick(args.tol, solver, "tol", 1e-12))
    try:
        table = refinement_study(obj, levels, method, symmetrize, policy, tol)
    except ValueError as exc:
        if isinstance(exc, (ProblemValidationError, ExprError)):
            raise
        raise UsageError(str(exc)) from None
    if args.format == "table":
        return table.to_text(args.digits or 5)
    return table.to_csv(args.digits)


def cmd_truncation(args):
    obj, solver = _load_source(args, need_exact=True)
    _require_dim(obj, 1, "truncation")
    method, policy, _ = _method_options(args, solver)
    N = int(_pick(args.N, solver, "N", 32))
    rep = truncation_errors(obj, N, method, policy)
    d = args.digits
    if args.all:
        rows = [(str(i + 1), _fmt(x, d), _fmt(t, d)) for i, (x, t) in enumerate(zip(rep.nodes, rep.values))]
        return _records(args, ("i", "x", "T"), rows)
    row = (
        str(N), str(rep.j), _fmt(rep.h_l, d), _fmt(rep.h_r, d), _fmt(rep.T_j, d),
        _fmt(rep.T_j1, d), _fmt(rep.cancellation_residual, d), _fmt(rep.regular_max, d),
    )
    header = ("N", "j", "h_l", "h_r", "T_j", "T_j1", "cancellation_residual", "regular_max")
    return _records(args, header, [row])


def cmd_greens_check(args):
    try:
        gf = GreensFunction(args.alpha, args.beta_minus, args.beta_plus)
    except ValueError as exc:
        raise ProblemValidationError([str(exc)]) from None
    if args.N < 8:
        raise UsageError("--N must be at least 8")
    err = reproduction_check(args.alpha, args.beta_minus, args.beta_plus, args.W, args.N)
    threshold = 1e-10 * max(1.0, abs(args.W) * gf.max_abs())
    status = "pass" if err <= threshold else "fail"
    row = (
        _fmt(args.alpha), _fmt(args.beta_minus), _fmt(args.beta_plus), _fmt(args.W),
        str(args.N), _fmt(err, args.digits), _fmt(threshold, 3), status,
    )
    header = ("alpha", "beta_minus", "beta_plus", "W", "N", "max_error", "threshold", "status")
    text = _records(args, header, [row])
    if status != "pass":
        raise _NumericalFailure(text)
    return text


class _NumericalFailure(Exception):
    pass


def cmd_list_cases(args):
    if args.template:
        return case_to_toml(catalog_case(args.template))
    rows = [(name, str(dim), sig, desc) for name, dim, sig, desc in list_cases()]
    if args.format == "table":
        return _table(("name", "dim", "parameters", "description"), rows)
    out = io.StringIO()
    out.write("name,dim,parameters,description\n")
    for r in rows:
        out.write(",".join(f'"{c}"' if "," in c else c for c in r) + "\n")
    return out.getvalue()


COMMANDS = {
    "solve1d": cmd_solve1d,
    "solve2d": cmd_solve2d,
    "refine": cmd_refine,
    "truncation": cmd_truncation,
    "greens-check": cmd_greens_check,
    "list-cases": cmd_list_cases,
}


def run(argv=None):
    """Execute one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        _emit(args, COMMANDS[args.command](args))
    except UsageError as exc:
        print(f"iham {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _NumericalFailure as exc:
        _emit(args, str(exc))
        print(f"iham {args.command}: exactness check failed", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConvergenceError, ZeroPivotError, QuadratureError) as exc:
        print(f"iham {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ProblemValidationError, ExprError, CatalogError, ConfigError) as exc:
        print(f"iham {args.command}: invalid problem: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"iham {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main():  # pragma: no cover
    sys.exit(run())
