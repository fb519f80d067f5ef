"""Command-line interface: ``point``, ``sweep`` and ``fit``.

Exit codes: 0 success, 1 computation failure, 2 usage or validation error.
Settings may also come from a ``key = value`` file given with ``--config``;
keys mirror the long flags (``xi-nodes = 60``) and flags win over the file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .energy import (
    ConvergenceError,
    Geometry,
    LmaxCapError,
    SolverParams,
    casimir_ratio,
)
from .roundtrip import SingularBlockError
from .sweep import NU_SCALAR, SweepSpec, fit_nu, read_csv, run_sweep, write_csv

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2
DEFAULT_FIT_WINDOW = (0.16, 0.6)


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (value > 0.0 and np.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def _lmax(text):
    if str(text).strip().lower() == "auto":
        return "auto"
    return _positive_int(text)


def _eps_list(text):
    values = [_positive_float(v) for v in str(text).replace(" ", "").split(",") if v]
    if not values:
        raise argparse.ArgumentTypeError("empty L/R list")
    return values


def _grid(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be lo:hi:count")
    lo, hi = _positive_float(parts[0]), _positive_float(parts[1])
    n = _positive_int(parts[2])
    if hi <= lo or n < 2:
        raise argparse.ArgumentTypeError("grid needs lo < hi and count >= 2")
    return [float(v) for v in np.linspace(lo, hi, n)]


def _window(text):
    parts = str(text).split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("window must be lo:hi")
    lo, hi = float(parts[0]), float(parts[1])
    if not 0.0 <= lo < hi:
        raise argparse.ArgumentTypeError("window needs 0 <= lo < hi")
    return lo, hi


_BOOL_KEYS = {"no_error_estimate", "json", "weighted"}
_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def load_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key in _BOOL_KEYS:
            if value.lower() not in _BOOL_WORDS:
                raise ValueError(f"{path}:{lineno}: {key} expects true/false")
            value = _BOOL_WORDS[value.lower()]
        out[key] = value
    return out


def _solver_flags(p):
    p.add_argument("--lmax", type=_lmax, default="auto", help="multipole cutoff or 'auto'")
    p.add_argument("--alpha", type=_positive_float, default=4.0, help="localization constant for auto lmax")
    p.add_argument("--lmax-cap", type=_positive_int, default=40)
    p.add_argument("--xi-nodes", type=_positive_int, default=40)
    p.add_argument("--u-nodes", type=_positive_int, default=40)
    p.add_argument("--m-tol", type=_positive_float, default=1e-10, help="relative cutoff of the m sum")
    p.add_argument("--no-error-estimate", action="store_true")
    p.add_argument("--workers", type=_positive_int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casimir-ps",
        description="Casimir energy between a perfectly reflecting sphere and plane, relative to PFA.",
    )
    parser.add_argument("--config", help="file of 'key = value' settings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="evaluate one L/R")
    p.add_argument("--l-over-r", type=_positive_float, required=True)
    _solver_flags(p)
    p.add_argument("--out", help="write a one-row CSV here")
    p.add_argument("--json", action="store_true", help="also print a JSON record")

    s = sub.add_parser("sweep", help="evaluate a list of L/R and write CSV")
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--l-over-r", type=_eps_list, help="comma-separated L/R values")
    grp.add_argument("--grid", type=_grid, help="linear grid lo:hi:count")
    _solver_flags(s)
    s.add_argument("--out", help="CSV path (stdout when omitted)")

    f = sub.add_parser("fit", help="constrained quadratic fit of a sweep CSV")
    f.add_argument("csv", nargs="?", help="sweep CSV")
    f.add_argument("--in", dest="csv_in", help="sweep CSV (alternative to the positional)")
    f.add_argument("--fit-window", type=_window, default=DEFAULT_FIT_WINDOW, help="lo:hi in L/R")
    f.add_argument("--weighted", action="store_true", help="weight samples by 1/est_rel_error")
    return parser, (p, s, f)


def _params(args) -> SolverParams:
    return SolverParams(
        lmax=args.lmax,
        xi_nodes=args.xi_nodes,
        u_nodes=args.u_nodes,
        m_tail_tol=args.m_tol,
        alpha=args.alpha,
        lmax_cap=args.lmax_cap,
        estimate_error=not args.no_error_estimate,
        workers=args.workers,
    )


def run_point(args, out=sys.stdout):
    geom = Geometry.from_ratio(args.l_over_r)
    result = casimir_ratio(geom, _params(args))
    print(
        f"L/R={args.l_over_r:.6g} rho={result.rho:.10g} "
        f"E={result.energy_hbar_c_over_R:.10g} hbar*c/R lmax={result.lmax_used} "
        f"m_count={result.m_count} xi_nodes={result.xi_nodes_used} "
        f"est_rel_error={result.est_rel_error:.2e}",
        file=out,
    )
    if args.json:
        record = {
            "l_over_r": args.l_over_r,
            "rho": result.rho,
            "energy_hbar_c_over_R": result.energy_hbar_c_over_R,
            "lmax_used": result.lmax_used,
            "m_count": result.m_count,
            "xi_nodes": result.xi_nodes_used,
            "est_rel_error": result.est_rel_error,
        }
        print(json.dumps(record), file=out)
    if args.out:
        write_csv(args.out, [args.l_over_r], [result])
    return result


def _sweep(args, parser, out):
    eps = args.l_over_r if args.l_over_r is not None else args.grid
    if not eps:
        parser.error("sweep needs --l-over-r or --grid")
    spec = SweepSpec(tuple(sorted(eps)), _params(args), args.out)
    results = run_sweep(spec, workers=args.workers)
    if not args.out:
        write_csv(out, spec.epsilon_values, results)
    return results


def _fit(args, parser, out):
    path = args.csv or args.csv_in
    if not path:
        parser.error("fit needs a sweep CSV")
    lo, hi = args.fit_window
    rows = [r for r in read_csv(path) if lo <= r["l_over_r"] <= hi]
    weights = None
    if args.weighted:
        weights = [1.0 / max(r["est_rel_error"], 1e-16) for r in rows]
    fit = fit_nu([(r["l_over_r"], r["rho"]) for r in rows], weights)
    print(
        f"nu={fit.nu:.6g} nu2={fit.nu2:.6g} rms_residual={fit.rms_residual:.3e} "
        f"n_points={fit.n_points} window={lo:g}:{hi:g} "
        f"nu/nu_scalar={fit.ratio_to_scalar:.4g} (nu_scalar={NU_SCALAR:.6g})",
        file=out,
    )
    return fit


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            defaults = load_config(known.config)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for sp in subparsers:
            sp.set_defaults(**defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "point":
            run_point(args, out)
        elif args.command == "sweep":
            _sweep(args, parser, out)
        else:
            _fit(args, parser, out)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (LmaxCapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularBlockError, ConvergenceError, RuntimeError, ArithmeticError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
