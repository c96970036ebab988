"""Command-line harness: ``gltrlab {solve,trace-bounds,table}``.

Exit codes: 0 success, 1 bad arguments or unparseable input, 2 solver
failure, 3 I/O error, 4 problem not eligible for the exact oracle.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BOUND_COLUMNS, trace_bounds
from .exceptions import (
    DenseTooLarge,
    DimensionMismatch,
    AsymmetricMatrix,
    NoConvergence,
    NotBoundaryCase,
    NotConverged,
    ParseError,
    ZeroGradient,
)
from .oracle import Case, classify_and_solve, s_and_cond_of_lambda
from .problem import (
    CallbackOperator,
    gen_example1,
    gen_example2,
    load_problem,
)
from .solver import gltr_solve

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_IO, EXIT_ORACLE = 0, 1, 2, 3, 4
SCHEMA_VERSION = 1
TRACE_COLUMNS = ("k", "lambda_k", "x_norm", "resid", "f", "beta_k", "boundary", "time_ms")

TABLE1_CONFIGS = ((-5.0, 5.0, 1.0), (-10.0, 10.0, 10.0), (-50.0, 50.0, 15.0), (-100.0, 100.0, 20.0))
TABLE3_RHOS = (1e-10, 1e-8, 1e-6, 1e-4)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; here 2 means solver failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "NA"
    return "%.12e" % v


def _write_csv(path, kind, columns, rows):
    buf = io.StringIO()
    buf.write(f"# gltrlab {kind} schema={SCHEMA_VERSION}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    if path is None or path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _add_source_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--diag-json", metavar="PATH", help="diagonal problem {diag, g, delta}")
    src.add_argument("--mtx", metavar="PATH", help="Matrix Market matrix (needs --g-file and --delta)")
    src.add_argument("--example1", action="store_true", help="Chebyshev-node diagonal problem")
    src.add_argument("--example2", action="store_true", help="deterministic problem with multiplier 500")
    p.add_argument("--g-file", metavar="PATH", help="Matrix Market array holding g (with --mtx)")
    p.add_argument("--a", type=float, default=-5.0)
    p.add_argument("--b", type=float, default=5.0)
    p.add_argument("--n", type=int, default=None, help="problem order (default 10000)")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--rho", type=float, default=1e-8)


def _add_solver_args(p):
    p.add_argument("--tol", type=float, default=1e-10, help="residual tolerance relative to ||g||")
    p.add_argument("--k-max", type=int, default=None, help="cap on Lanczos steps")
    p.add_argument("--no-reorth", action="store_true", help="plain three-term Lanczos recurrence")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gltrlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gltrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="run GLTR and write the iteration trace")
    _add_source_args(solve)
    _add_solver_args(solve)
    solve.add_argument("--out", help="trace CSV path (default: stdout)")
    solve.add_argument("--no-timing", action="store_true", help="write NA in time_ms (byte-reproducible output)")

    tb = sub.add_parser("trace-bounds", help="GLTR + oracle + every bound, one CSV row per iteration")
    _add_source_args(tb)
    _add_solver_args(tb)
    tb.add_argument("--out", help="bounds CSV path (default: stdout)")
    tb.add_argument("--json-out", help="problem-level JSON summary path")
    tb.add_argument("--no-sep", action="store_true", help="skip sep(lambda_opt, C_k) and the bound using it")
    tb.add_argument("--sep-stride", type=int, default=1, help="compute sep every N iterations (and the last)")

    table = sub.add_parser("table", help="reproduce the summary tables")
    table.add_argument("--which", type=int, choices=(1, 2, 3), default=3)
    table.add_argument("--n", type=int, default=None)
    table.add_argument("--seed", type=int, default=42)
    table.add_argument("--tol", type=float, default=1e-10)
    table.add_argument("--k-max", type=int, default=None)
    table.add_argument("--workers", type=int, default=1)
    table.add_argument("--skip-gltr", action="store_true", help="oracle columns only")
    return parser


def problem_from_args(args):
    n = args.n
    if args.example1:
        if args.delta is None:
            raise UsageError("--example1 needs --delta")
        return gen_example1(args.a, args.b, 10000 if n is None else n, args.delta, args.seed)
    if args.example2:
        return gen_example2(args.rho, 10000 if n is None else n)
    if args.diag_json:
        return load_problem(args.diag_json, "diag-json")
    if args.g_file is None or args.delta is None:
        raise UsageError("--mtx needs --g-file and --delta")
    return load_problem(args.mtx, "matrix-market", g=args.g_file, delta=args.delta)


def _solve(problem, args):
    return gltr_solve(problem, tol_resid=args.tol, k_max_cap=args.k_max, reorth=not args.no_reorth)


def cmd_solve(args) -> int:
    problem = problem_from_args(args)
    result = _solve(problem, args)
    rows = [
        (
            r.k,
            r.lambda_k,
            r.x_norm,
            r.residual_norm,
            r.f_value,
            r.beta_k,
            r.boundary,
            None if args.no_timing else 1e3 * r.wall_time,
        )
        for r in result.trace
    ]
    _write_csv(args.out, "trace", TRACE_COLUMNS, rows)
    last = result.trace[-1]
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    print(
        f"k_final={result.k_final} lambda={result.lam:.6f} x_norm={last.x_norm:.6f} "
        f"resid={last.residual_norm:.4e} converged={'yes' if result.converged else 'no'} ({result.reason})",
        file=stream,
    )
    return EXIT_OK


def _oracle_eligible(problem):
    if isinstance(problem.A, CallbackOperator):
        raise DenseTooLarge("matrix-free operators are not supported by the exact oracle")
    exact = classify_and_solve(problem)
    if exact.case is not Case.EASY_BOUNDARY:
        raise NotBoundaryCase(f"bounds need an easy boundary problem, got {exact.case.value}")
    return exact


def problem_summary(problem, exact, result, ctx) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "n": problem.n,
        "delta": problem.delta,
        "g_norm": problem.g_norm,
        "case": exact.case.value,
        "lambda_opt": exact.lambda_opt,
        "x_opt_norm": float(np.linalg.norm(exact.x_opt)),
        "alpha_1": exact.alpha_1,
        "alpha_n": exact.alpha_n,
        "kappa": exact.kappa,
        "t": ctx.t,
        "A_opt_norm": exact.A_opt_norm,
        "s_opt": ctx.s_opt,
        "cond_opt": ctx.cond_opt,
        "y1_norm": ctx.y1_norm,
        "y2_norm": ctx.y2_norm,
        "M_norm": ctx.M_norm,
        "k_final": result.k_final,
        "converged": result.converged,
        "lambda_final": result.lam,
        "resid_final": result.trace[-1].residual_norm,
    }


def cmd_trace_bounds(args) -> int:
    problem = problem_from_args(args)
    exact = _oracle_eligible(problem)
    result = _solve(problem, args)
    rows, ctx = trace_bounds(problem, result, exact, compute_sep=not args.no_sep, sep_stride=args.sep_stride)
    _write_csv(args.out, "bounds", BOUND_COLUMNS, [tuple(getattr(r, c) for c in BOUND_COLUMNS) for r in rows])
    summary = problem_summary(problem, exact, result, ctx)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n")
    else:
        print(text, file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def _table_row(which, cfg, args):
    n = args.n
    if which == 3:
        rho = cfg
        problem = gen_example2(rho, 10000 if n is None else n)
        label = {"rho": rho}
    else:
        a, b, delta = cfg
        problem = gen_example1(a, b, 10000 if n is None else n, delta, args.seed)
        label = {"a": a, "b": b, "delta": delta}
    exact = classify_and_solve(problem)
    row = dict(label)
    row.update(lambda_opt=exact.lambda_opt, x_norm=float(np.linalg.norm(exact.x_opt)), kappa=exact.kappa)
    if exact.case is Case.EASY_BOUNDARY:
        row["s_opt"], row["cond_opt"] = s_and_cond_of_lambda(exact, problem)
    if which == 1 and not args.skip_gltr:
        res = gltr_solve(problem, tol_resid=args.tol, k_max_cap=args.k_max)
        x = res.x
        row.update(
            lambda_gltr=res.lam,
            k_final=res.k_final,
            resid_final=float(np.linalg.norm(problem.A.matvec(x) + res.lam * x + problem.g)),
            converged=res.converged,
        )
    if which == 3 and not args.skip_gltr:
        res = gltr_solve(problem, tol_resid=args.tol, k_max_cap=args.k_max)
        row.update(lambda_gltr=res.lam, k_final=res.k_final)
    return row


TABLE_COLUMNS = {
    1: ("a", "b", "delta", "lambda_opt", "lambda_gltr", "x_norm", "resid_final", "kappa", "k_final"),
    2: ("a", "b", "delta", "s_opt", "cond_opt", "kappa"),
    3: ("rho", "s_opt", "cond_opt", "lambda_gltr", "kappa", "k_final"),
}


def table_rows(which, args):
    configs = TABLE3_RHOS if which == 3 else TABLE1_CONFIGS
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        return list(pool.map(lambda cfg: _table_row(which, cfg, args), configs))


def _cell(v):
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, int):
        return str(v)
    return f"{v:.6g}" if abs(v) < 1e-3 or abs(v) >= 1e5 else f"{v:.6f}".rstrip("0").rstrip(".")


def cmd_table(args) -> int:
    rows = table_rows(args.which, args)
    cols = TABLE_COLUMNS[args.which]
    cells = [[_cell(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    print("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
    for row in cells:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "trace-bounds": cmd_trace_bounds, "table": cmd_table}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gltrlab: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ParseError, DimensionMismatch, AsymmetricMatrix, ZeroGradient) as exc:
        print(f"gltrlab: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DenseTooLarge, NotBoundaryCase) as exc:
        print(f"gltrlab: not eligible for the exact oracle: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (NoConvergence, NotConverged) as exc:
        print(f"gltrlab: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        name = getattr(exc, "filename", None)
        print(f"gltrlab: I/O error{f' on {name}' if name else ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"gltrlab: error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
