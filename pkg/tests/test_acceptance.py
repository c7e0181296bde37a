"""Acceptance gate: the headline reproduction and property criteria.

Each test prints a single summary line.  Criterion 1 pins a published
closed-form constant that the certified two-sided bounds exclude; it is
kept as a strict expected failure with the analysis in the companion
test directly below it.
"""

import math
import time

import numpy as np
import pytest

import hardychain as hc
from hardychain.cli import SWEEP_HEADER, _sweep_rows

from conftest import EXPONENTS, P_SET

TOL = 1e-9


def _line(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} — {detail}")


# --- 1: headline closed-form value ----------------------------------------


@pytest.mark.xfail(
    strict=True,
    reason="the quoted constant sin^2(pi/84) for the uniform chain (N=40, p=2) "
    "is excluded by the certified bounds; the consistent closed form is "
    "4 sin^2(pi/166), see the companion test",
)
def test_criterion_01_quoted_constant():
    ch = hc.uniform_chain(40)
    lam = hc.solve_nd(ch, EXPONENTS[2.0]).lam
    quoted = math.sin(math.pi / 84.0) ** 2
    _line(1, False, f"solver gives {lam:.16g}, quoted constant {quoted:.16g} "
                    "(certified bounds exclude the quoted value)")
    assert lam == pytest.approx(quoted, rel=TOL)


def test_criterion_01_certified_closed_form():
    """The value consistent with every other criterion: 4 sin^2(pi/(2(2N+3)))."""
    ch = hc.uniform_chain(40)
    e = EXPONENTS[2.0]
    t0 = time.perf_counter()
    lam = hc.solve_nd(ch, e).lam
    elapsed = time.perf_counter() - t0
    derived = 4.0 * math.sin(math.pi / 166.0) ** 2
    quoted = math.sin(math.pi / 84.0) ** 2
    # certified bracket from five iterations of the approximating sequences
    delta, _ = hc.delta_seq_nd(ch, e, 5)
    res = hc.delta_prime_bar_seq_nd(ch, e, 5)
    lo, hi = 1.0 / delta[-1], 1.0 / res.delta_prime[-1]
    assert lo <= derived <= hi, "certified bracket must contain the closed form"
    assert not (lo <= quoted <= hi), "certified bracket excludes the quoted constant"
    assert lam == pytest.approx(derived, rel=TOL)
    assert elapsed < 0.1
    _line(1, True, f"lambda = 4 sin^2(pi/166) = {derived:.12g} reproduced to "
                   f"{abs(lam / derived - 1.0):.2e} in {elapsed * 1e3:.1f} ms; "
                   f"certified bracket [{lo:.12g}, {hi:.12g}] excludes sin^2(pi/84)")


# --- 2: basic-estimate sandwich -------------------------------------------


def test_criterion_02_basic_sandwich(corpus):
    t0 = time.perf_counter()
    worst = 0.0
    for ch in corpus:
        basic = hc.basic_bounds_nd if ch.case is hc.BoundaryCase.ND else hc.basic_bounds_dn
        for p in P_SET:
            e = EXPONENTS[p]
            lam = hc.solve(ch, e).lam
            lo, hi = basic(ch, e)
            worst = max(worst, lo / lam - 1.0, lam / hi - 1.0)
    elapsed = time.perf_counter() - t0
    ok = worst <= TOL and elapsed < 30.0
    _line(2, ok, f"{len(corpus) * len(P_SET)} solves, max sandwich violation "
                 f"{worst:.2e}, {elapsed:.1f} s")
    assert worst <= TOL
    assert elapsed < 30.0


# --- 3: approximating sequences -------------------------------------------


def test_criterion_03_sequence_monotonicity(corpus, corpus_solutions):
    worst = 0.0
    for i, ch in enumerate(corpus):
        nd = ch.case is hc.BoundaryCase.ND
        for p in P_SET:
            e = EXPONENTS[p]
            lam = corpus_solutions[i, p].lam
            delta = (hc.delta_seq_nd if nd else hc.delta_seq_dn)(ch, e, 5)[0]
            if nd:
                res = hc.delta_prime_bar_seq_nd(ch, e, 5)
                dp, dbar = res.delta_prime, res.delta_bar
            else:
                dp, dbar, _, _ = hc.delta_prime_bar_seq_dn(ch, e, 5)
            # delta_n nonincreasing, delta'_n nondecreasing
            for a, b in zip(delta, delta[1:]):
                worst = max(worst, b / a - 1.0)
            for a, b in zip(dp, dp[1:]):
                worst = max(worst, a / b - 1.0)
            # 1/delta_n <= lambda <= 1/delta'_n at every n
            for n in range(5):
                worst = max(worst, 1.0 / (delta[n] * lam) - 1.0)
                worst = max(worst, lam * dp[n] - 1.0)
            # the Rayleigh variant dominates the previous upper iterate
            for n in range(4):
                worst = max(worst, dp[n] / dbar[n + 1] - 1.0)
    ok = worst <= TOL
    _line(3, ok, f"max monotonicity/bracket violation {worst:.2e} over n = 1..5")
    assert worst <= TOL


# --- 4: closed forms for the first iterates --------------------------------


def test_criterion_04_closed_forms(corpus):
    worst_cf = 0.0
    worst_window = 0.0
    worst_eq = 0.0
    order_ok = True
    for ch in corpus:
        nd = ch.case is hc.BoundaryCase.ND
        for p in P_SET:
            e = EXPONENTS[p]
            if nd:
                d1, d1p, dbar1 = hc.improved_estimates_nd(ch, e)
                delta = hc.delta_seq_nd(ch, e, 1)[0]
                res = hc.delta_prime_bar_seq_nd(ch, e, 1)
                dp, dbar = res.delta_prime, res.delta_bar
                sigma = hc.sigma_p_nd(ch, e)[0]
            else:
                d1, d1p, dbar1 = hc.improved_estimates_dn(ch, e)
                delta = hc.delta_seq_dn(ch, e, 1)[0]
                dp, dbar, _, _ = hc.delta_prime_bar_seq_dn(ch, e, 1)
                sigma = hc.sigma_p_dn(ch, e)[0]
            worst_cf = max(worst_cf,
                           abs(d1 / delta[0] - 1.0),
                           abs(d1p / dp[0] - 1.0),
                           abs(dbar1 / dbar[0] - 1.0))
            worst_window = max(worst_window,
                               sigma / dbar1 - 1.0,
                               dbar1 / (e.p * sigma) - 1.0)
            if p in (1.2, 1.5):
                order_ok &= dbar1 <= d1p * (1.0 + TOL)
            if p in (3.0, 5.0):
                order_ok &= dbar1 >= d1p * (1.0 - TOL)
            if p == 2.0:
                worst_eq = max(worst_eq, abs(dbar1 / d1p - 1.0))
    ok = worst_cf <= 1e-12 and worst_window <= TOL and order_ok and worst_eq <= 1e-10
    _line(4, ok, f"closed-form deviation {worst_cf:.2e}, "
                 f"Rayleigh window violation {worst_window:.2e}, "
                 f"p=2 equality gap {worst_eq:.2e}, ordering holds: {order_ok}")
    assert worst_cf <= 1e-12
    assert worst_window <= TOL
    assert order_ok
    assert worst_eq <= 1e-10


# --- 5/6: sweep reproductions ----------------------------------------------


def _parse_rows(rows):
    names = SWEEP_HEADER.split(",")
    return [dict(zip(names, row.split(","))) for row in rows]


def _check_ordering(parsed, tol=TOL):
    """Top-to-bottom on the root scale: k_sigma, delta1, then delta_bar1 /
    delta1_prime (swapped below p=2), then sigma."""
    worst = 0.0
    for row in parsed:
        p = float(row["p"])
        ks, d1 = float(row["k_sigma"]), float(row["delta1"])
        db, dpv, sig = (float(row["delta_bar1"]), float(row["delta1_prime"]),
                        float(row["sigma"]))
        mid = (d1, db, dpv) if p >= 2.0 else (d1, dpv, db)
        seq = (ks,) + mid + (sig,)
        for a, b in zip(seq, seq[1:]):
            worst = max(worst, b / a - 1.0)
    return worst


def test_criterion_05_geometric_chain_sweep():
    ch = hc.geometric_chain(1.0, 20.0, 80)
    t0 = time.perf_counter()
    rows = _parse_rows(_sweep_rows(ch, np.linspace(1.001, 30.001, 200), "root"))
    elapsed = time.perf_counter() - t0
    worst = _check_ordering(rows)
    sigma2 = hc.sigma_p_nd(ch, EXPONENTS[2.0])[0]
    sigma_err = abs(sigma2 / (20.0 / 361.0) - 1.0)
    ok = worst <= TOL and sigma_err <= 1e-6 and elapsed < 60.0
    _line(5, ok, f"200-point sweep in {elapsed:.1f} s, max ordering violation "
                 f"{worst:.2e}, sigma_p(2) off 20/361 by {sigma_err:.2e}")
    assert worst <= TOL
    assert sigma_err <= 1e-6
    assert elapsed < 60.0


def test_criterion_06_uniform_chain_sweep():
    ch = hc.uniform_chain(40)
    rows = _parse_rows(_sweep_rows(ch, np.linspace(1.0175, 30.0175, 200), "root"))
    worst = _check_ordering(rows)
    assert all(row["lambda_exact"] != "NA" for row in rows)
    # regression baseline: away from p=2 the three first iterates nearly
    # coincide on the root scale
    spread = 0.0
    for row in rows:
        if abs(float(row["p"]) - 2.0) < 1.0:
            continue
        tri = [float(row["delta1"]), float(row["delta_bar1"]), float(row["delta1_prime"])]
        spread = max(spread, max(tri) / min(tri) - 1.0)
    ok = worst <= TOL and spread <= 0.15
    _line(6, ok, f"orderings hold (max violation {worst:.2e}), eigenvalue column "
                 f"complete, near-overlap spread {spread:.3f} (baseline 0.15)")
    assert worst <= TOL
    assert spread <= 0.15


# --- 7: oracle equivalence --------------------------------------------------


def test_criterion_07_oracle_equivalence(corpus, corpus_solutions):
    worst = 0.0
    for i, ch in enumerate(corpus):
        for p in P_SET:
            it = hc.inverse_iteration(ch, EXPONENTS[p])
            assert it.converged
            worst = max(worst, abs(it.lam / corpus_solutions[i, p].lam - 1.0))
    ok = worst <= 1e-8
    _line(7, ok, f"max |inverse-iteration / bisection - 1| = {worst:.2e}")
    assert worst <= 1e-8


# --- 8: duality --------------------------------------------------------------


def test_criterion_08_duality():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        size = int(rng.integers(1, 61))
        mu = 10.0 ** rng.uniform(-3, 3, size)
        nu = 10.0 ** rng.uniform(-3, 3, size)
        ch = hc.make_chain("dn", mu, nu)
        for p in (1.5, 2.0, 3.0):
            worst = max(worst, hc.check_duality(ch, EXPONENTS[p]).rel_gap)
    ok = worst <= 1e-8
    _line(8, ok, f"max duality gap {worst:.2e} over 300 chain/exponent pairs")
    assert worst <= 1e-8


# --- 9: eigenfunction structure ---------------------------------------------


def test_criterion_09_eigenfunction_structure(corpus, corpus_solutions):
    fails = 0
    worst = ("", 0.0)
    for i, ch in enumerate(corpus):
        for p in P_SET:
            sol = corpus_solutions[i, p]
            rep = hc.verify_solution(ch, EXPONENTS[p], sol.lam, sol.g, tol=TOL)
            if not rep.ok:
                fails += 1
            for name, c in rep.checks.items():
                ratio = c["err"] / c["tol"] if c["tol"] > 0 else 0.0
                if ratio > worst[1]:
                    worst = (name, ratio)
    ok = fails == 0
    _line(9, ok, f"{len(corpus) * len(P_SET)} eigenpairs verified, {fails} failures; "
                 f"tightest margin: {worst[0]} at {worst[1]:.2f} of tolerance")
    assert fails == 0


# --- 10: truncated-eigenvalue convergence ------------------------------------


def test_criterion_10_truncated_convergence(corpus, corpus_solutions):
    checked = 0
    worst_mono = 0.0
    worst_final = 0.0
    picked = [i for i, ch in enumerate(corpus) if ch.size <= 30][:20]
    for i in picked:
        ch = corpus[i]
        for p in (1.5, 2.0, 3.0):
            seq = hc.lambda_truncated_seq(ch, EXPONENTS[p])
            for a, b in zip(seq, seq[1:]):
                worst_mono = max(worst_mono, b / a - 1.0)
            worst_final = max(worst_final,
                              abs(seq[-1] / corpus_solutions[i, p].lam - 1.0))
            checked += 1
    ok = worst_mono <= 1e-12 and worst_final <= 1e-12
    _line(10, ok, f"{checked} truncation ladders: max monotonicity violation "
                  f"{worst_mono:.2e}, final-step gap {worst_final:.2e}")
    assert worst_mono <= 1e-12
    assert worst_final <= 1e-12
