"""Exact principal-eigenvalue solver via shooting plus safeguarded bisection.

For a trial lambda the eigen-recursion is integrated from the reflecting
boundary; the terminal defect at the absorbing/reflecting end is a monotone
sign indicator: positive means lambda is below the principal eigenvalue,
nonpositive (or a monotonicity breakdown before the end) means at or above.
Bisection runs on log(lambda) with the basic two-sided estimate as the seed
bracket, a geometric widening pass and a 64-point scan as safeguards.

Each shot has a plain floating-point path and a log-scale path; the latter
is selected up front when the weight magnitudes predict overflow (see
``LOG_SCALE_THRESHOLD``) and as a fallback whenever the plain path produces
a non-finite intermediate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    LOG_SCALE_THRESHOLD,
    BoundaryCase,
    Chain,
    ChainError,
    Exponent,
    make_chain,
    sum_table,
)
from . import dn as _dn
from . import nd as _nd
from .logspace import NEG_INF


class SolverError(RuntimeError):
    """Bracketing or integration failure; carries diagnostic data."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class ShotResult:
    """Outcome of one shooting integration at a trial lambda.

    ``status`` is "low" when the terminal defect is positive (trial below the
    eigenvalue) and "high" otherwise.  ``rel_terminal`` is the defect on a
    scale-free relative scale; ``fail_index`` marks an early monotonicity
    breakdown (profile ``g`` is then unavailable).
    """

    status: str
    rel_terminal: float
    fail_index: int | None = None
    g: np.ndarray | None = None


@dataclass(frozen=True)
class EigenSolution:
    lam: float
    g: np.ndarray
    residual: float
    iterations: int
    bracket: tuple[float, float]
    case: BoundaryCase
    p: float


@dataclass(frozen=True)
class InverseIterationResult:
    """Fixed-point iteration of the double-summation operator with a
    certified two-sided bracket per step."""

    lam: float
    lam_lo: float
    lam_hi: float
    iterations: int
    converged: bool
    f: np.ndarray


class _NonFinite(ArithmeticError):
    pass


def _check(x: float) -> float:
    if not math.isfinite(x):
        raise _NonFinite
    return x


# ---------------------------------------------------------------------------
# shooting integrations


#: Linear-path magnitudes below this trigger the log-scale fallback before
#: denormal rounding can corrupt the sign classification.
_TINY = 1e-280


def _shoot_nd_linear(chain: Chain, exponent: Exponent, lam: float) -> ShotResult:
    mu, nu = chain.mu.tolist(), chain.nu.tolist()
    p1, e = exponent.p - 1.0, exponent.pstar - 1.0
    L = chain.size
    g, S = 1.0, 0.0
    gs = np.empty(L)
    for i in range(L):
        gs[i] = g
        S = _check(S + lam * mu[i] * g**p1)
        step = _check((S / nu[i]) ** e)
        if i < L - 1:
            g = g - step
            if not (g > 0.0):
                return ShotResult(status="high", rel_terminal=-math.inf, fail_index=i + 1)
            if g < _TINY:
                raise _NonFinite
        else:
            rel = 1.0 - step / gs[-1]
    return ShotResult(status="low" if rel > 0.0 else "high", rel_terminal=rel, g=gs)


def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == NEG_INF:
        return a
    return a + math.log1p(math.exp(b - a))


def _shoot_nd_log(chain: Chain, exponent: Exponent, lam: float) -> ShotResult:
    log_mu, log_nu = chain.log_mu.tolist(), chain.log_nu.tolist()
    p1, e = exponent.p - 1.0, exponent.pstar - 1.0
    loglam = math.log(lam)
    L = chain.size
    logg, logS = 0.0, NEG_INF
    logs = np.empty(L)
    for i in range(L):
        logs[i] = logg
        logS = _logaddexp(logS, loglam + log_mu[i] + p1 * logg)
        logstep = e * (logS - log_nu[i])
        d = logstep - logg
        if i < L - 1:
            if d >= 0.0:
                return ShotResult(status="high", rel_terminal=-math.inf, fail_index=i + 1)
            logg = logg + math.log1p(-math.exp(d))
        else:
            rel = -math.expm1(d) if d < 700.0 else -math.inf
    # logs[0] = 0, so exponentiating keeps the g_0 = 1 normalization
    with np.errstate(over="ignore"):
        gs = np.exp(logs)
    return ShotResult(status="low" if rel > 0.0 else "high", rel_terminal=rel, g=gs)


def _shoot_dn_linear(chain: Chain, exponent: Exponent, lam: float) -> ShotResult:
    mu, nu = chain.mu.tolist(), chain.nu.tolist()
    p1, e = exponent.p - 1.0, exponent.pstar - 1.0
    L = chain.size
    g, T = 1.0, nu[0]
    gs = np.empty(L)
    gs[0] = g
    for pos in range(L):
        d = _check(lam * mu[pos] * g**p1)
        if pos == L - 1:
            rel = T / d - 1.0
            break
        T = T - d
        if not (T > 0.0):
            return ShotResult(status="high", rel_terminal=-math.inf, fail_index=pos + 2)
        if T < _TINY:
            raise _NonFinite
        g = _check(g + (T / nu[pos + 1]) ** e)
        gs[pos + 1] = g
    return ShotResult(status="low" if rel > 0.0 else "high", rel_terminal=rel, g=gs)


def _shoot_dn_log(chain: Chain, exponent: Exponent, lam: float) -> ShotResult:
    log_mu, log_nu = chain.log_mu.tolist(), chain.log_nu.tolist()
    p1, e = exponent.p - 1.0, exponent.pstar - 1.0
    loglam = math.log(lam)
    L = chain.size
    logg, logT = 0.0, log_nu[0]
    logs = np.empty(L)
    logs[0] = logg
    for pos in range(L):
        logd = loglam + log_mu[pos] + p1 * logg
        if pos == L - 1:
            u = logT - logd
            rel = math.expm1(u) if u < 700.0 else math.inf
            break
        if logd >= logT:
            return ShotResult(status="high", rel_terminal=-math.inf, fail_index=pos + 2)
        logT = logT + math.log1p(-math.exp(logd - logT))
        logg = _logaddexp(logg, e * (logT - log_nu[pos + 1]))
        logs[pos + 1] = logg
    with np.errstate(over="ignore"):
        gs = np.exp(logs)
    return ShotResult(status="low" if rel > 0.0 else "high", rel_terminal=rel, g=gs)


def _needs_log_scale(chain: Chain, exponent: Exponent) -> bool:
    scale = max(np.max(np.abs(chain.log_mu)), np.max(np.abs(chain.log_nu)), 1.0)
    blow = max(1.0, exponent.p - 1.0, exponent.pstar - 1.0)
    return scale * blow > LOG_SCALE_THRESHOLD


def shoot(chain: Chain, exponent: Exponent, lam: float, use_log: bool | None = None) -> ShotResult:
    """Integrate the eigen-recursion at trial ``lam`` and classify the sign."""
    if not (lam > 0.0 and math.isfinite(lam)):
        raise SolverError(f"trial eigenvalue must be positive and finite, got {lam}")
    if chain.case is BoundaryCase.ND:
        linear, logged = _shoot_nd_linear, _shoot_nd_log
    else:
        linear, logged = _shoot_dn_linear, _shoot_dn_log
    if use_log is None:
        use_log = _needs_log_scale(chain, exponent)
    if use_log:
        return logged(chain, exponent, lam)
    try:
        return linear(chain, exponent, lam)
    except _NonFinite:
        return logged(chain, exponent, lam)


def shoot_nd(chain: Chain, exponent: Exponent, lam: float, **kw) -> ShotResult:
    if chain.case is not BoundaryCase.ND:
        raise ChainError("shoot_nd expects an ND chain")
    return shoot(chain, exponent, lam, **kw)


def shoot_dn(chain: Chain, exponent: Exponent, lam: float, **kw) -> ShotResult:
    if chain.case is not BoundaryCase.DN:
        raise ChainError("shoot_dn expects a DN chain")
    return shoot(chain, exponent, lam, **kw)


# ---------------------------------------------------------------------------
# bisection


def _basic_bounds(chain: Chain, exponent: Exponent) -> tuple[float, float]:
    if chain.case is BoundaryCase.ND:
        return _nd.basic_bounds_nd(chain, exponent)
    return _dn.basic_bounds_dn(chain, exponent)


def _bracket(chain: Chain, exponent: Exponent, use_log: bool):
    lo, hi = _basic_bounds(chain, exponent)
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(8):
        if shoot(chain, exponent, math.exp(llo), use_log).status == "low":
            break
        llo -= math.log(16.0)
    else:
        llo = None
    for _ in range(8):
        if shoot(chain, exponent, math.exp(lhi), use_log).status == "high":
            break
        lhi += math.log(16.0)
    else:
        lhi = None
    if llo is not None and lhi is not None:
        return llo, lhi
    # last resort: geometric scan for an adjacent sign change
    s0 = math.log(lo) - 10.0 * math.log(16.0)
    s1 = math.log(hi) + 10.0 * math.log(16.0)
    grid = np.linspace(s0, s1, 64)
    statuses = [shoot(chain, exponent, math.exp(s), use_log).status for s in grid]
    for a, b, sa, sb in zip(grid[:-1], grid[1:], statuses[:-1], statuses[1:]):
        if sa == "low" and sb == "high":
            return float(a), float(b)
    raise SolverError(
        "no sign change found for the terminal defect; the seed bracket, "
        "widening passes and a 64-point geometric scan all failed",
        diagnostics={
            "basic_bounds": (lo, hi),
            "scan_log_lambda": grid.tolist(),
            "scan_status": statuses,
        },
    )


def _ii_kernel_fn(chain: Chain, exponent: Exponent):
    """The log-scale double-summation kernel for either case."""
    log_nuhat = (1.0 - exponent.pstar) * chain.log_nu
    log_mu = chain.log_mu
    if chain.case is BoundaryCase.ND:
        mask = np.ones(chain.size, dtype=bool)

        def kernel(logF):
            return _nd._log_II_kernel(log_mu, log_nuhat, exponent, logF, mask)

        return kernel

    def kernel(logF):
        return _dn._log_II_kernel_dn(log_mu, log_nuhat, exponent, logF)

    return kernel


def _refine_profile(chain: Chain, exponent: Exponent, lam: float, g0: np.ndarray):
    """Polish an eigenfunction estimate by iterating f -> f * II(f)**(pstar-1).

    The fixed point of this map is the eigenfunction direction, independent
    of lam, and the map involves only sums of positive terms, so the polished
    tail is accurate even where the shot recursion was hypersensitive.
    Returns (g, residual) with residual = max_i |lam * II_i(g) - 1|.
    """
    kernel = _ii_kernel_fn(chain, exponent)
    with np.errstate(divide="ignore"):
        logF = np.log(np.asarray(g0, dtype=float))
    for _ in range(80):
        logII, B = kernel(logF)
        if float(np.max(logII) - np.min(logII)) < 5e-14:
            break
        logF = B - B[0]
    logII, _ = kernel(logF)
    loglam = math.log(lam)
    residual = float(np.max(np.abs(np.expm1(loglam + logII))))
    with np.errstate(over="ignore"):
        g = np.exp(logF - logF[0])
    return g, residual


def solve(chain: Chain, exponent: Exponent, *, tol: float = 1e-14,
          max_iter: int = 200) -> EigenSolution:
    """Principal eigenvalue to relative bracket width ``tol``.

    The eigenfunction is the shot at the certified lower endpoint polished
    by the double-summation fixed point (normalized to first entry 1), and
    ``residual`` is the summed-form eigen-equation defect
    max_i |lambda * II_i(g) - 1|.
    """
    use_log = _needs_log_scale(chain, exponent)
    llo, lhi = _bracket(chain, exponent, use_log)
    iters = 0
    while lhi - llo > tol and iters < max_iter:
        mid = 0.5 * (llo + lhi)
        if shoot(chain, exponent, math.exp(mid), use_log).status == "low":
            llo = mid
        else:
            lhi = mid
        iters += 1
    final = shoot(chain, exponent, math.exp(llo), use_log)
    if final.g is None:  # pragma: no cover - llo always classifies "low"
        raise SolverError("lower bracket endpoint lost its classification")
    lam = math.exp(0.5 * (llo + lhi))
    g, residual = _refine_profile(chain, exponent, lam, final.g)
    return EigenSolution(
        lam=lam,
        g=g,
        residual=residual,
        iterations=iters,
        bracket=(math.exp(llo), math.exp(lhi)),
        case=chain.case,
        p=exponent.p,
    )


def solve_nd(chain: Chain, exponent: Exponent, **kw) -> EigenSolution:
    if chain.case is not BoundaryCase.ND:
        raise ChainError("solve_nd expects an ND chain")
    return solve(chain, exponent, **kw)


def solve_dn(chain: Chain, exponent: Exponent, **kw) -> EigenSolution:
    if chain.case is not BoundaryCase.DN:
        raise ChainError("solve_dn expects a DN chain")
    return solve(chain, exponent, **kw)


# ---------------------------------------------------------------------------
# inverse iteration (fixed point of the double-summation operator)


def inverse_iteration(chain: Chain, exponent: Exponent, *, tol: float = 1e-12,
                      max_iter: int = 5000) -> InverseIterationResult:
    """Iterate f -> f * II(f)**(pstar-1) until sup II and inf II agree.

    Every step yields the certified bracket (1/sup II) <= lambda <= (1/inf II);
    the loop stops when its relative width drops below ``tol``.
    """
    st = sum_table(chain, exponent)
    logF = st.log_nuhat_suffix / exponent.pstar
    kernel = _ii_kernel_fn(chain, exponent)
    converged = False
    n = 0
    for n in range(1, max_iter + 1):
        logII, B = kernel(logF)
        hi_ii, lo_ii = float(np.max(logII)), float(np.min(logII))
        lam_lo, lam_hi = math.exp(-hi_ii), math.exp(-lo_ii)
        if lam_hi - lam_lo <= tol * lam_lo:
            converged = True
            break
        logF = B - np.max(B)
    return InverseIterationResult(
        lam=math.sqrt(lam_lo * lam_hi),
        lam_lo=lam_lo,
        lam_hi=lam_hi,
        iterations=n,
        converged=converged,
        f=np.exp(logF - np.max(logF)),
    )


# ---------------------------------------------------------------------------
# verification and derived sequences


@dataclass(frozen=True)
class VerificationReport:
    """Per-check errors with their effective tolerances.

    ``checks`` maps a check name to ``{"err": ..., "tol": ...}``; ``ok`` is
    true when every error is within its tolerance.  Checks whose achievable
    precision depends on the conditioning of the data (the I and R identities
    and the truncation identity involve differences of nearly-equal terms)
    carry a widened tolerance derived from that conditioning.
    """

    ok: bool
    tol: float
    checks: dict = field(default_factory=dict)

    def err(self, name: str) -> float:
        return self.checks[name]["err"]


_EPS = 2.3e-16


def _max_rel_err(vals, target: float) -> float:
    vals = np.asarray(vals, dtype=float)
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0
    return float(np.max(np.abs(vals / target - 1.0)))


def verify_solution(chain: Chain, exponent: Exponent, lam: float, g,
                    tol: float = 1e-9) -> VerificationReport:
    """Independent checks on a claimed eigenpair.

    Residual, positivity, monotonicity toward the reflecting end (strict up
    to a 1e-13 relative margin for increments that underflow the double
    grid), operator identities I(g) = II(g) = 1/lambda and R(successive
    ratios of g) = lambda, and (ND only) the truncation identity
    min_i II_i(g restricted to {0..m}) = (1 - g_{m+1}/g_m)**(p-1) / lambda
    over every representable cut m.
    """
    g = np.asarray(g, dtype=float)
    p = exponent.p
    nd_case = chain.case is BoundaryCase.ND
    checks: dict[str, dict] = {}

    def add(name, err, tol_eff=tol):
        checks[name] = {"err": float(err), "tol": float(max(tol_eff, tol))}

    # a profile that is not strictly positive fails outright; the operator
    # identities are not even defined on it
    if g.shape[0] != chain.size or not np.all(np.isfinite(g)) or np.any(g <= 0.0):
        add("positivity", math.inf)
        return VerificationReport(ok=False, tol=tol, checks=checks)

    # summed-form eigen-equation defect: lambda * II(g) = 1 at every state
    # (this encodes the absorbing-end terminal condition as well)
    op_ii = _nd.op_II_nd if nd_case else _dn.op_II_dn
    add("residual", _max_rel_err(op_ii(chain, exponent, g), 1.0 / lam))
    # sign bracket: the shot terminal must change sign across lam
    margin = 10.0 * tol
    sign_ok = (shoot(chain, exponent, lam * (1.0 - margin)).status == "low"
               and shoot(chain, exponent, lam * (1.0 + margin)).status == "high")
    add("terminal_sign", 0.0 if sign_ok else math.inf)
    add("positivity", 0.0 if np.all(g > 0.0) else math.inf)

    # relative increments toward the absorbing end; the boundary edge has
    # relative size 1 by the zero convention
    if nd_case:
        rel_inc = np.append((g[:-1] - g[1:]) / g[:-1], 1.0)
    else:
        rel_inc = np.concatenate([[1.0], (g[1:] - g[:-1]) / g[1:]])
    add("strict_monotone", max(0.0, float(-np.min(rel_inc))), 1e-13)

    inv = 1.0 / lam
    # conditioning of quantities built from increments of g: an increment of
    # relative size s is known only to eps/s, amplified by the (p-1) power
    min_inc = max(float(np.min(np.maximum(rel_inc, 0.0))), _EPS)
    inc_tol = 64.0 * max(1.0, p - 1.0) * _EPS / min_inc

    # difference-form identity R(successive ratios of g) = lambda, evaluated
    # directly from the relative increments; indices whose increments are too
    # small to represent the ratio in doubles are skipped, and each evaluated
    # index gets a tolerance reflecting the cancellation between its two terms
    thr = 1e-8
    amp_c = 256.0 * max(1.0, p - 1.0) * _EPS
    mu_l, nu_l = chain.mu, chain.nu
    L = chain.size
    score, seen = 0.0, False
    for i in range(L):
        s1 = rel_inc[i]
        if s1 < thr:
            continue
        t1 = nu_l[i] / mu_l[i] * s1 ** (p - 1.0)
        if nd_case:
            # second term: (1/w_{i-1} - 1) = s0 * g_{i-1}/g_i
            s_other = rel_inc[i - 1] if i > 0 else 1.0
            t2 = 0.0 if i == 0 else nu_l[i - 1] / mu_l[i] * (s_other * g[i - 1] / g[i]) ** (p - 1.0)
        else:
            # second term: (w_i - 1) = s2 * g_{i+1}/g_i
            s_other = rel_inc[i + 1] if i < L - 1 else 1.0
            t2 = 0.0 if i == L - 1 else nu_l[i + 1] / mu_l[i] * (s_other * g[i + 1] / g[i]) ** (p - 1.0)
        if s_other < thr or not math.isfinite(t2):
            continue
        tol_i = max(tol, amp_c * (t1 / (lam * s1) + t2 / (lam * s_other)))
        err_i = abs((t1 - t2) / lam - 1.0)
        score = max(score, err_i / tol_i)
        seen = True
    add("identity_R", score * tol if seen else 0.0)

    if nd_case:
        add("identity_I", _max_rel_err(_nd.op_I_nd(chain, exponent, g, tilde=True), inv),
            inc_tol)
        if chain.N >= 1:
            score = 0.0
            for m in range(chain.N):
                s = rel_inc[m]
                if not (s > 0.0):
                    continue  # increment below the double grid: rhs not representable
                gt = np.concatenate([g[: m + 1], np.zeros(chain.N - m)])
                lhs = float(np.min(_nd.op_II_nd(chain, exponent, gt)))
                rhs = s ** (p - 1.0) / lam
                tol_m = max(tol, 64.0 * max(1.0, p - 1.0) * _EPS / s)
                score = max(score, abs(lhs / rhs - 1.0) / tol_m)
            add("truncation_identity", score * tol)
    else:
        add("identity_I", _max_rel_err(_dn.op_I_dn(chain, exponent, g, tilde=True), inv),
            inc_tol)

    ok = all(c["err"] <= c["tol"] for c in checks.values())
    return VerificationReport(ok=ok, tol=tol, checks=checks)


def lambda_truncated_seq(chain: Chain, exponent: Exponent, m_values=None,
                         **solve_kw) -> list[float]:
    """Principal eigenvalues of the chains cut at m, nonincreasing in m.

    ND: plain restriction to {0..m}.  DN: restriction to {1..m} with the tail
    mass mu_m + ... + mu_N folded onto the cut state, so the final entry
    (m = N) reproduces the full-chain eigenvalue exactly.
    """
    if chain.case is BoundaryCase.ND:
        if m_values is None:
            m_values = range(0, chain.N + 1)
        out = []
        for m in m_values:
            pos = chain.state_index(m)
            sub = make_chain("nd", chain.mu[: pos + 1], chain.nu[: pos + 1])
            out.append(solve(sub, exponent, **solve_kw).lam)
        return out
    if m_values is None:
        m_values = range(1, chain.N + 1)
    out = []
    for m in m_values:
        pos = chain.state_index(m)
        mu_t = chain.mu[: pos + 1].copy()
        mu_t[pos] = _dn.tilde_mu(chain, m)
        sub = make_chain("dn", mu_t, chain.nu[: pos + 1])
        out.append(solve(sub, exponent, **solve_kw).lam)
    return out


@dataclass(frozen=True)
class DualityReport:
    lhs: float          # lambda_p(DN chain) ** (-1/p)
    rhs: float          # lambda_pstar(ND dual) ** (-1/pstar)
    rel_gap: float
    lam_dn: float
    lam_dual: float


def check_duality(chain: Chain, exponent: Exponent, **solve_kw) -> DualityReport:
    """Compare lambda_p(DN)**(-1/p) with lambda_pstar(dual ND)**(-1/pstar)."""
    from .chain import dual_chain

    if chain.case is not BoundaryCase.DN:
        raise ChainError("duality check starts from a DN chain")
    lam_dn = solve(chain, exponent, **solve_kw).lam
    dual = dual_chain(chain, exponent)
    conj = Exponent.from_p(exponent.pstar)
    lam_dual = solve(dual, conj, **solve_kw).lam
    lhs = math.exp(-math.log(lam_dn) / exponent.p)
    rhs = math.exp(-math.log(lam_dual) / exponent.pstar)
    return DualityReport(lhs=lhs, rhs=rhs, rel_gap=abs(lhs / rhs - 1.0),
                         lam_dn=lam_dn, lam_dual=lam_dual)
