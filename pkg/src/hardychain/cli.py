"""Command-line front end.

Subcommands: ``bounds`` (sigma_p, basic and improved estimates as JSON),
``solve`` (eigenvalue + verified eigenfunction as JSON), ``sweep`` (p-grid
CSV of the bound ladder and the exact eigenvalue), ``verify`` (invariant
suite with a per-check table), ``duality`` (DN vs dual-ND cross-check) and
``gnuplot-script`` (a plotting script for sweep output).

Exit codes: 0 success, 2 usage error, 3 verification failure, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .chain import (
    BoundaryCase,
    Chain,
    ChainError,
    Exponent,
    ExponentError,
    load_chain,
    geometric_chain,
    uniform_chain,
)
from . import dn as _dn
from . import nd as _nd
from .reports import bounds_report, solution_to_dict
from .solver import (
    SolverError,
    check_duality,
    lambda_truncated_seq,
    solve,
    verify_solution,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


def _add_chain_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--case", choices=["nd", "dn"], default="nd",
                     help="boundary case for --uniform/--geometric (files carry their own)")
    src = sub.add_mutually_exclusive_group()
    src.add_argument("--uniform", type=int, metavar="N", help="all-ones chain on the index set")
    src.add_argument("--geometric", nargs=3, type=float, metavar=("A", "R", "N"),
                     help="mu_k = R**k, nu_k = A * R**(k+1)")
    src.add_argument("--file", metavar="PATH", help="chain JSON {case, mu, nu}")


def _build_chain(args) -> Chain:
    if args.file is not None:
        return load_chain(args.file)
    if args.uniform is not None:
        return uniform_chain(args.uniform, args.case)
    if args.geometric is not None:
        a, r, n = args.geometric
        return geometric_chain(a, r, int(n), args.case)
    raise UsageError("one of --uniform, --geometric or --file is required")


def _exponent(p: float) -> Exponent:
    return Exponent.from_p(p)


# ---------------------------------------------------------------------------
# subcommands


def cmd_bounds(args) -> int:
    chain = _build_chain(args)
    rep = bounds_report(chain, _exponent(args.p), iters=max(1, args.iters))
    print(json.dumps(rep.to_dict(), indent=2))
    return EXIT_OK


def cmd_solve(args) -> int:
    chain = _build_chain(args)
    exponent = _exponent(args.p)
    sol = solve(chain, exponent, tol=args.tol)
    report = verify_solution(chain, exponent, sol.lam, sol.g)
    print(json.dumps(solution_to_dict(sol, report), indent=2))
    return EXIT_OK if report.ok else EXIT_VERIFY


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _sweep_rows(chain: Chain, p_values, transform: str) -> list[str]:
    nd_case = chain.case is BoundaryCase.ND
    rows = []
    for p in p_values:
        exponent = _exponent(p)
        if nd_case:
            log_sigma, _ = _nd.log_sigma_p_nd(chain, exponent)
            log_d1, log_d1p, log_dbar = _nd.log_improved_estimates_nd(chain, exponent)
        else:
            log_sigma, _ = _dn.log_sigma_p_dn(chain, exponent)
            log_d1, log_d1p, log_dbar = _dn.log_improved_estimates_dn(chain, exponent)
        log_ks = math.log(exponent.kp) + log_sigma
        try:
            log_lam = math.log(solve(chain, exponent).lam)
        except SolverError:
            log_lam = None
        if transform == "root":
            cols = [math.exp(v / p) for v in (log_ks, log_d1, log_dbar, log_d1p, log_sigma)]
            # the bound columns approximate 1/lambda, so the comparable
            # eigenvalue scale is lambda**(-1/p)
            lam_cell = "NA" if log_lam is None else _fmt(math.exp(-log_lam / p))
        else:
            cols = [math.exp(v) for v in (log_ks, log_d1, log_dbar, log_d1p, log_sigma)]
            lam_cell = "NA" if log_lam is None else _fmt(math.exp(log_lam))
        rows.append(",".join([_fmt(p)] + [_fmt(c) for c in cols] + [lam_cell]))
    return rows


SWEEP_HEADER = "p,k_sigma,delta1,delta_bar1,delta1_prime,sigma,lambda_exact"


def cmd_sweep(args) -> int:
    chain = _build_chain(args)
    if args.p is not None:
        p_values = [args.p]
    elif args.p_grid is not None:
        start, stop, count = args.p_grid
        p_values = np.linspace(start, stop, int(count)).tolist()
    else:
        raise UsageError("sweep needs --p or --p-grid START STOP COUNT")
    rows = _sweep_rows(chain, p_values, args.transform)
    text = "\n".join([SWEEP_HEADER] + rows) + "\n"
    if args.out:
        # all-or-nothing: the full text exists before the file is touched
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _random_lower_upper_checks(chain, exponent, lam, trials, rng, tol):
    """Certificate soundness on random admissible candidates."""
    nd_case = chain.case is BoundaryCase.ND
    L = chain.size
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(0.1, 1.0, L)
        if nd_case:
            f = np.cumsum(x[::-1])[::-1]
            w = rng.uniform(0.05, 0.95, L)
            w[-1] = 0.0
            bound = _nd.bound_from_test_function_nd
        else:
            f = np.cumsum(x)
            w = 1.0 + rng.uniform(0.1, 1.0, L)
            bound = _dn.bound_from_test_function_dn
        lowers = [
            bound(chain, exponent, f=f, side="lower", operator="I").value,
            bound(chain, exponent, f=f, side="lower", operator="II").value,
            bound(chain, exponent, w=w, side="lower").value,
        ]
        # truncated / plateaued candidate for the upper-side classes
        cut = int(rng.integers(0, L))
        ft = f.copy()
        if nd_case:
            ft[cut + 1 :] = 0.0
        else:
            ft[cut + 1 :] = ft[cut]
        uppers = [
            bound(chain, exponent, f=ft, side="upper", operator="I").value,
            bound(chain, exponent, f=ft, side="upper", operator="II").value,
        ]
        for v in lowers:
            worst = max(worst, v / lam - 1.0)
        for v in uppers:
            worst = max(worst, 1.0 - v / lam)
    return worst


def run_verify(chain: Chain, exponent: Exponent, trials: int, tol: float, seed: int = 0):
    """The invariant suite behind ``verify``; returns [(name, ok, detail)]."""
    nd_case = chain.case is BoundaryCase.ND
    rng = np.random.default_rng(seed)
    results = []
    sol = solve(chain, exponent)
    lam = sol.lam

    if nd_case:
        sigma, _ = _nd.sigma_p_nd(chain, exponent)
        lower, upper = _nd.basic_bounds_nd(chain, exponent)
    else:
        sigma, _ = _dn.sigma_p_dn(chain, exponent)
        lower, upper = _dn.basic_bounds_dn(chain, exponent)
    ok = lower <= lam * (1.0 + tol) and lam <= upper * (1.0 + tol)
    results.append(("basic-sandwich", ok, f"{lower:.6g} <= {lam:.6g} <= {upper:.6g}"))

    n_max = 5
    if nd_case:
        deltas, _ = _nd.delta_seq_nd(chain, exponent, n_max)
        have_family = chain.N >= 1
        if have_family:
            fam = _nd.delta_prime_bar_seq_nd(chain, exponent, n_max)
            dprime, dbar = fam.delta_prime, fam.delta_bar
        else:
            dprime, dbar = [], []
    else:
        deltas, _ = _dn.delta_seq_dn(chain, exponent, n_max)
        dprime, dbar, _, _ = _dn.delta_prime_bar_seq_dn(chain, exponent, n_max)
        have_family = True
    ok = all(deltas[i + 1] <= deltas[i] * (1.0 + tol) for i in range(n_max - 1))
    if have_family:
        ok = ok and all(dprime[i + 1] >= dprime[i] * (1.0 - tol) for i in range(n_max - 1))
    results.append(("delta-monotone", ok, f"delta={deltas[-1]:.6g}"))

    ok = 1.0 / deltas[-1] <= lam * (1.0 + tol)
    if have_family:
        ok = ok and lam <= (1.0 / dprime[-1]) * (1.0 + tol)
        ok = ok and sigma * (1.0 - tol) <= dbar[0] <= exponent.p * sigma * (1.0 + tol)
        ok = ok and all(dbar[i + 1] >= dprime[i] * (1.0 - tol) for i in range(n_max - 1))
    results.append(("iterated-sandwich", ok, f"n={n_max}"))

    worst = _random_lower_upper_checks(chain, exponent, lam, trials, rng, tol)
    results.append(("certificate-soundness", worst <= tol,
                    f"{trials} trials, worst slack {worst:.3g}"))

    vrep = verify_solution(chain, exponent, lam, sol.g, tol=max(tol, 1e-9))
    detail = ", ".join(f"{k}={v['err']:.2g}" for k, v in vrep.checks.items())
    results.append(("eigenfunction-structure", vrep.ok, detail))

    first = 0 if nd_case else 1
    ms = sorted(set(np.linspace(first, chain.N, min(chain.N - first + 1, 8)).astype(int).tolist())) or [first]
    trunc = lambda_truncated_seq(chain, exponent, ms)
    ok = all(trunc[i + 1] <= trunc[i] * (1.0 + tol) for i in range(len(trunc) - 1))
    ok = ok and abs(trunc[-1] / lam - 1.0) <= max(tol, 1e-12)
    results.append(("truncated-lambda", ok, f"m={ms}"))
    return results


def cmd_verify(args) -> int:
    chain = _build_chain(args)
    results = run_verify(chain, _exponent(args.p), args.trials, args.tol, seed=args.seed)
    width = max(len(name) for name, _, _ in results)
    failed = [name for name, ok, _ in results if not ok]
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_duality(args) -> int:
    chain = _build_chain(args)
    if chain.case is not BoundaryCase.DN:
        raise UsageError("duality starts from a DN chain (--case dn)")
    rep = check_duality(chain, _exponent(args.p))
    print(json.dumps({
        "lambda_dn_root": rep.lhs,
        "lambda_dual_root": rep.rhs,
        "rel_gap": rep.rel_gap,
        "lambda_dn": rep.lam_dn,
        "lambda_dual": rep.lam_dual,
        "pass": rep.rel_gap <= args.tol,
    }, indent=2))
    return EXIT_OK if rep.rel_gap <= args.tol else EXIT_VERIFY


GNUPLOT_TEMPLATE = """\
# plot a sweep CSV: all bound columns on the root scale against p
set datafile separator ','
set key autotitle columnhead
set logscale y
set xlabel 'p'
plot '{csv}' using 1:2 with lines, \\
     '' using 1:3 with lines, \\
     '' using 1:4 with lines, \\
     '' using 1:5 with lines, \\
     '' using 1:6 with lines, \\
     '' using 1:7 with lines
"""


def cmd_gnuplot_script(args) -> int:
    print(GNUPLOT_TEMPLATE.format(csv=args.csv))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardychain",
        description="Certified bounds and exact principal eigenvalues of the "
                    "discrete p-Laplacian on finite weighted chains.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("bounds", help="sigma_p, basic and improved estimates (JSON)")
    _add_chain_flags(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--iters", type=int, default=1)
    sp.set_defaults(fn=cmd_bounds)

    sp = subs.add_parser("solve", help="principal eigenvalue and eigenfunction (JSON)")
    _add_chain_flags(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-14)
    sp.set_defaults(fn=cmd_solve)

    sp = subs.add_parser("sweep", help="p-grid CSV of the bound ladder")
    _add_chain_flags(sp)
    sp.add_argument("--p", type=float, help="single-point grid")
    sp.add_argument("--p-grid", nargs=3, type=float, metavar=("START", "STOP", "COUNT"))
    sp.add_argument("--transform", choices=["root", "raw"], default="root",
                    help="root: x -> x**(1/p) (lambda_exact as lambda**(-1/p))")
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(fn=cmd_sweep)

    sp = subs.add_parser("verify", help="invariant suite with a per-check table")
    _add_chain_flags(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_verify)

    sp = subs.add_parser("duality", help="DN eigenvalue vs conjugate dual ND")
    _add_chain_flags(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.set_defaults(fn=cmd_duality)

    sp = subs.add_parser("gnuplot-script", help="print a gnuplot script for a sweep CSV")
    sp.add_argument("csv", help="path of the CSV the script will plot")
    sp.set_defaults(fn=cmd_gnuplot_script)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, ChainError, ExponentError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
