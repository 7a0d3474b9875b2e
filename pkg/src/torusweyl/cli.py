"""Command-line interface: ``torusweyl <command> [options]``.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 IO error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import runner
from .checks import run_selftest
from .errors import TorusWeylError
from .io import (
    RunConfig,
    SpectrumCache,
    atomic_write_text,
    canonical_json,
    matrix_to_csv,
    table_to_csv,
)
from .lattice import make_geometry
from .stats import NuRule, ScalingRegime, regime_sweep
from .symbols import SYMBOLS, analytic_spectrum_a, analytic_spectrum_b, assemble

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
BUILD_ROUTES = ("appendixB", "finite", "both")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with "numerical failure"
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)


def _geometry(args):
    return make_geometry(args.N, args.ellx, args.hbar)


def _cache(args):
    return SpectrumCache(args.cache_dir)


def cmd_build(args):
    geom = _geometry(args)
    routes = ("appendixB", "finite") if args.route == "both" else (args.route,)
    if args.symbol != "h" and args.route != "appendixB":
        raise TorusWeylError(f"route {args.route!r} only applies to symbol 'h'")
    if len(routes) == 1:
        op = assemble(geom, args.symbol, routes[0])
        _emit(matrix_to_csv(op.real_symmetric()), args.out)
        return EXIT_OK
    outdir = Path(args.out or ".")
    for route in routes:
        op = assemble(geom, args.symbol, route)
        path = outdir / f"{args.symbol}_N{geom.N}_{route}.csv"
        atomic_write_text(path, matrix_to_csv(op.real_symmetric()))
        print(path)
    return EXIT_OK


def cmd_spectrum(args):
    if args.route == "both":
        raise TorusWeylError("spectrum takes a single route")
    geom = _geometry(args)
    rec, hit = runner.compute_spectrum(geom, args.symbol, args.route, _cache(args),
                                       want_vectors=not args.values_only)
    logging.getLogger(__name__).info("spectrum %s", "served from cache" if hit else "computed")
    payload = rec.to_dict()
    if args.symbol in ("a", "b"):
        exact = (analytic_spectrum_a if args.symbol == "a" else analytic_spectrum_b)(geom).eigenvalues
        scale = max(float(np.max(np.abs(exact))), 1e-300)
        payload["analytic"] = {
            "eigenvalues": exact.tolist(),
            "max_rel_error": float(np.max(np.abs(rec.eigenvalues - exact))) / scale,
        }
    _emit(canonical_json(payload), args.out)
    return EXIT_OK


def cmd_histogram(args):
    geom = _geometry(args)
    rec, _ = runner.compute_spectrum(geom, "h", args.route if args.route != "both" else "appendixB",
                                     _cache(args), want_vectors=not args.values_only)
    rows = runner.histogram_table(rec, args.bins, args.emin, args.emax)
    _emit(table_to_csv(("bin_center", "density", "semiclassical_d"), rows), args.out)
    return EXIT_OK


def cmd_density_sweep(args):
    Ns = runner.sweep_values(args.N_min, args.N_max, args.step)
    rows, summary = runner.density_sweep(Ns, args.K, _cache(args), args.hbar,
                                         want_vectors=not args.values_only)
    key = "mean_rel_dev_N>=500"
    table = [list(r) for r in rows] + [["summary", None, None, None, summary[key]]]
    _emit(table_to_csv(("N", "E", "d_K", "mean_density", "rel_dev"), table), args.out)
    return EXIT_OK


def cmd_regimes(args):
    regime = ScalingRegime(args.alpha, args.A, args.hbar)
    rows, summary = regime_sweep(regime, args.N, args.nu_rule, args.nu0)
    header = ("N", "ell_xi", "ell_x", "nu", "E_pred", "s_pred", "E_exact", "s_exact", "rel_err")
    text = table_to_csv(header, [[r[h] for h in header] for r in rows])
    _emit(text, args.out)
    slope = summary["fitted_slope"]
    print(f"# exponent={summary['exponent']:.6g} fitted_slope="
          f"{'n/a' if slope is None else f'{slope:.6g}'} behaviour={summary['behaviour']}", file=sys.stderr)
    return EXIT_OK


def cmd_selftest(args):
    results = run_selftest(perturb=args.perturb)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--hbar", type=float, default=1.0)
    common.add_argument("--out", default=None, help="output file ('-' or omitted: stdout)")
    common.add_argument("--cache-dir", default=None,
                        help="spectrum cache directory (default: $TORUSWEYL_CACHE or ~/.cache/torusweyl)")
    common.add_argument("--values-only", action="store_true", help="skip eigenvectors (no residual certificate)")
    common.add_argument("-v", "--verbose", action="store_true")

    geo = _Parser(add_help=False)
    geo.add_argument("--N", type=int, required=True)
    geo.add_argument("--ellx", type=float, default=None, help="default sqrt(2 pi hbar N)")

    p = _Parser(prog="torusweyl", description="Weyl-quantised xp operator on the torus.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", parents=[common, geo], help="write op_N as a CSV matrix")
    b.add_argument("--symbol", choices=SYMBOLS, default="h")
    b.add_argument("--route", choices=BUILD_ROUTES, default="appendixB",
                   help="'both' writes one file per route into the --out directory")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("spectrum", parents=[common, geo], help="eigenvalues and certificates as JSON")
    s.add_argument("--symbol", choices=SYMBOLS, default="h")
    s.add_argument("--route", choices=BUILD_ROUTES, default="appendixB")
    s.set_defaults(func=cmd_spectrum)

    h = sub.add_parser("histogram", parents=[common, geo], help="eigenvalue histogram vs semiclassical density")
    h.add_argument("--bins", type=int, default=None, help="default ceil(sqrt(N))")
    h.add_argument("--emin", type=float, default=None)
    h.add_argument("--emax", type=float, default=None)
    h.add_argument("--route", choices=BUILD_ROUTES, default="appendixB")
    h.set_defaults(func=cmd_histogram)

    d = sub.add_parser("density-sweep", parents=[common], help="K-nearest density along E(N)")
    d.add_argument("--N-min", type=int, default=500)
    d.add_argument("--N-max", type=int, default=2000)
    d.add_argument("--step", type=int, default=100)
    d.add_argument("--K", type=int, default=3)
    d.set_defaults(func=cmd_density_sweep)

    r = sub.add_parser("regimes", parents=[common], help="op_N(a) spacings under ell_xi = A N^alpha")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--A", type=float, required=True)
    r.add_argument("--N", type=int, nargs="+", required=True)
    r.add_argument("--nu-rule", choices=[x.value for x in NuRule], default="fixed")
    r.add_argument("--nu0", type=int, default=1)
    r.set_defaults(func=cmd_regimes)

    t = sub.add_parser("selftest", parents=[common], help="run the invariant suite at small N")
    t.add_argument("--perturb", action="store_true", help=argparse.SUPPRESS)
    t.set_defaults(func=cmd_selftest)
    return p


def parse_config(argv) -> tuple[argparse.Namespace, RunConfig]:
    args = build_parser().parse_args(argv)
    skip = {"func", "command", "hbar", "out", "cache_dir", "verbose"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg = RunConfig(args.command, params, args.hbar, args.out, args.cache_dir)
    return args, cfg


def main(argv=None) -> int:
    try:
        args, cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger(__name__).debug("config %s", cfg.to_json())
    try:
        return args.func(args)
    except TorusWeylError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ArithmeticError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
