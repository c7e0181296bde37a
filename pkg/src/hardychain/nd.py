"""Estimators for the Neumann-at-origin / Dirichlet-at-right (ND) case.

Everything here bounds the principal eigenvalue lambda_p of the discrete
p-Laplacian on {0..N} from one side or the other:

* ``sigma_p_nd`` / ``basic_bounds_nd``: the sup-of-products quantity and the
  two-sided basic estimate (k(p) sigma)^-1 <= lambda <= sigma^-1.
* operators I (single summation), II (double summation), R (difference):
  inf/sup over admissible test functions certify lower/upper bounds.
* ``delta_seq_nd`` / ``delta_prime_bar_seq_nd``: iterative approximating
  sequences; delta_n decreases (lower bounds 1/delta_n), delta'_n increases
  (upper bounds 1/delta'_n), delta_bar_n are Rayleigh-quotient variants.
* ``improved_estimates_nd``: the n=1 closed forms.

All sums of positive terms run in log scale so that extreme weights and
exponents (e.g. geometric chains at large N with p near 1 or 30) stay finite.
Operators I, II, R are degree-0 homogeneous in the test function, so iterates
are renormalized to max-entry 1 without changing any reported bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import (
    MAX_SCAN_SIZE,
    BoundaryCase,
    Chain,
    ChainError,
    Exponent,
    sum_table,
)
from .logspace import NEG_INF, log_cumsum, log_cumsum_rev, log_sub, log_sum


class ClassError(ValueError):
    """Test function or weight ratio outside the admissible class."""


@dataclass(frozen=True)
class Certificate:
    """A one-sided eigenvalue bound together with the data realizing it."""

    value: float
    side: str              # "lower" | "upper"
    operator: str          # "I" | "II" | "R"
    argmin_index: int | None = None
    detail: dict = field(default_factory=dict)


@dataclass
class DeltaPrimeBar:
    """Iterated upper-bound family: delta'_n with optimal (l, m) pairs and
    the Rayleigh-quotient variant delta_bar_n."""

    delta_prime: list[float]
    delta_bar: list[float]
    prime_pairs: list[tuple[int, int]]
    bar_pairs: list[tuple[int, int]]
    exhaustive: bool = True


def _require_nd(chain: Chain):
    if chain.case is not BoundaryCase.ND:
        raise ChainError("operation defined for ND chains only")


# ---------------------------------------------------------------------------
# sigma_p and basic estimates


def log_sigma_p_nd(chain: Chain, exponent: Exponent) -> tuple[float, int]:
    """log(sigma_p) and the first index attaining the supremum."""
    _require_nd(chain)
    st = sum_table(chain, exponent)
    vals = st.log_mu_prefix + (exponent.p - 1.0) * st.log_nuhat_suffix
    n = int(np.argmax(vals))
    return float(vals[n]), n


def sigma_p_nd(chain: Chain, exponent: Exponent) -> tuple[float, int]:
    """sigma_p = sup_n mu[0,n] * nuhat[n,N]**(p-1), by exact full scan."""
    log_s, n = log_sigma_p_nd(chain, exponent)
    return float(np.exp(log_s)), n


def basic_bounds_nd(chain: Chain, exponent: Exponent) -> tuple[float, float]:
    """(k(p) sigma_p)^-1 <= lambda_p <= sigma_p^-1."""
    log_s, _ = log_sigma_p_nd(chain, exponent)
    return float(np.exp(-log_s - np.log(exponent.kp))), float(np.exp(-log_s))


# ---------------------------------------------------------------------------
# operator kernels (log scale)


def _log_f_from_values(chain: Chain, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[0] != chain.size:
        raise ClassError(f"test function length {f.shape[0]} != chain size {chain.size}")
    if np.any(f < 0.0) or not np.all(np.isfinite(f)):
        raise ClassError("test function must be nonnegative and finite")
    with np.errstate(divide="ignore"):
        return np.log(f)


def _support_end(logf: np.ndarray) -> int:
    """Largest index of the positive initial segment; rejects interior zeros."""
    pos = ~np.isneginf(logf)
    if not pos[0]:
        raise ClassError("test function vanishes at index 0")
    m = int(np.max(np.flatnonzero(pos)))
    if not np.all(pos[: m + 1]):
        raise ClassError("support must be an initial segment of the index set")
    return m


def _log_II_kernel(log_mu, log_nuhat, exponent: Exponent, logF, mask):
    """log II over rows of logF (entries -inf outside support).

    Returns (logII, logB) where logB is the log of the double sum, i.e. the
    log of the next iterate f * II(f)**(pstar-1) before renormalization.
    Entries outside ``mask`` are meaningless.
    """
    p, ps = exponent.p, exponent.pstar
    with np.errstate(invalid="ignore"):
        A = log_cumsum(log_mu + (p - 1.0) * logF, axis=-1)
        T = np.where(mask, log_nuhat + (ps - 1.0) * A, NEG_INF)
        B = log_cumsum_rev(T, axis=-1)
        logII = (p - 1.0) * (B - logF)
    return logII, B


def op_II_nd(chain: Chain, exponent: Exponent, f) -> np.ndarray:
    """II_i(f) for i in supp(f) (an initial segment {0..m}); length m+1."""
    _require_nd(chain)
    logf = _log_f_from_values(chain, f)
    m = _support_end(logf)
    mask = np.arange(chain.size) <= m
    logII, _ = _log_II_kernel(chain.log_mu, _log_nuhat(chain, exponent), exponent, logf, mask)
    return np.exp(logII[: m + 1])


def _log_nuhat(chain: Chain, exponent: Exponent) -> np.ndarray:
    return (1.0 - exponent.pstar) * chain.log_nu


def op_I_nd(chain: Chain, exponent: Exponent, f, tilde: bool = False) -> np.ndarray:
    """I_i(f) over E; +inf where f_i = f_{i+1} (allowed only in tilde classes).

    ``tilde=False`` demands f strictly decreasing and positive (class for the
    lower bound); ``tilde=True`` accepts plateau-then-drop shapes with an
    optional vanishing tail.
    """
    _require_nd(chain)
    logf = _log_f_from_values(chain, f)
    fvals = np.asarray(f, dtype=float)
    d = fvals - np.append(fvals[1:], 0.0)
    if not tilde:
        if np.any(fvals <= 0.0):
            raise ClassError(
                f"strictly-decreasing class requires f > 0; violated at index "
                f"{int(np.flatnonzero(fvals <= 0.0)[0])}"
            )
        if np.any(d <= 0.0):
            raise ClassError(
                f"strictly-decreasing class violated at index {int(np.flatnonzero(d <= 0.0)[0])}"
            )
    else:
        m = _support_end(logf)
        if np.any(d[: m + 1] < 0.0):
            raise ClassError(
                f"nonincreasing shape violated at index {int(np.flatnonzero(d < 0.0)[0])}"
            )
    with np.errstate(divide="ignore", invalid="ignore"):
        logP = log_cumsum(chain.log_mu + (exponent.p - 1.0) * logf)
        logd = np.where(d > 0.0, np.log(np.maximum(d, 0.0)), NEG_INF)
        logI = logP - chain.log_nu - (exponent.p - 1.0) * logd
    out = np.exp(np.where(np.isneginf(logd), np.inf, logI))
    # entries past the support carry no information
    if tilde:
        out[np.isneginf(logf)] = np.inf
    return out


def op_R_nd(chain: Chain, exponent: Exponent, w, tilde: bool = False) -> np.ndarray:
    """R_i(w) over E.

    Class W (lower side): w_i in (0,1) for i < N and w_N = 0.  Class W-tilde
    (upper side): w_i > 0 up to some m-1, w_m = 0, vanishing after, and every
    bracket nu_i (1-w_i)^(p-1) - nu_{i-1} (1/w_{i-1}-1)^(p-1) positive up to m;
    entries past m are reported as -inf (they never contribute to the sup).
    """
    _require_nd(chain)
    w = np.asarray(w, dtype=float)
    L = chain.size
    if w.shape[0] != L:
        raise ClassError(f"weight ratio length {w.shape[0]} != chain size {L}")
    if w[-1] != 0.0:
        raise ClassError(f"convention w_N = 0 violated at index {L - 1}")
    if tilde:
        zeros = np.flatnonzero(w == 0.0)
        m = int(zeros[0])
        if np.any(w[:m] <= 0.0):
            raise ClassError(
                f"tilde class requires w > 0 before the cut; violated at index "
                f"{int(np.flatnonzero(w[:m] <= 0.0)[0])}"
            )
        if np.any(w[m:] != 0.0):
            raise ClassError("tilde class requires w = 0 from the cut index on")
    else:
        m = L - 1
        bad = np.flatnonzero((w[:-1] <= 0.0) | (w[:-1] >= 1.0))
        if bad.size:
            raise ClassError(f"class W requires w in (0,1); violated at index {int(bad[0])}")
    p = exponent.p
    log_nu, log_mu = chain.log_nu, chain.log_mu
    out = np.full(L, NEG_INF)
    with np.errstate(divide="ignore", over="ignore"):
        for i in range(m + 1):
            t1 = np.exp(log_nu[i] - log_mu[i] + (p - 1.0) * np.log1p(-w[i]))
            if i == 0:
                t2 = 0.0  # nu_{-1} = 0
            else:
                t2 = np.exp(log_nu[i - 1] - log_mu[i] + (p - 1.0) * np.log(1.0 / w[i - 1] - 1.0))
            out[i] = t1 - t2
    if tilde and np.any(out[: m + 1] <= 0.0):
        raise ClassError(
            f"tilde class positivity violated at index {int(np.flatnonzero(out[: m + 1] <= 0.0)[0])}"
        )
    return out


def bound_from_test_function_nd(
    chain: Chain,
    exponent: Exponent,
    *,
    f=None,
    w=None,
    side: str = "lower",
    operator: str | None = None,
) -> Certificate:
    """Certified one-sided bound from an admissible candidate.

    Lower side: (sup_i I_i(f))^-1, (sup_i II_i(f))^-1 or inf_i R_i(w), each
    a certified lower bound for lambda_p.  Upper side uses the tilde
    classes and the mirrored sup/inf.
    """
    _require_nd(chain)
    if (f is None) == (w is None):
        raise ClassError("provide exactly one of f= (operators I/II) or w= (operator R)")
    if side not in ("lower", "upper"):
        raise ClassError(f"side must be 'lower' or 'upper', got {side!r}")
    tilde = side == "upper"
    if w is not None:
        vals = op_R_nd(chain, exponent, w, tilde=tilde)
        finite = vals[~np.isneginf(vals)]
        value = float(np.max(finite)) if tilde else float(np.min(vals))
        idx = int(np.argmax(vals)) if tilde else int(np.argmin(vals))
        return Certificate(value=value, side=side, operator="R", argmin_index=idx,
                           detail={"w": np.asarray(w, float).tolist()})
    operator = operator or "II"
    if operator == "I":
        vals = op_I_nd(chain, exponent, f, tilde=tilde)
        finite = np.flatnonzero(np.isfinite(vals))
        if tilde:
            idx = int(finite[np.argmin(vals[finite])])
            value = 1.0 / float(vals[idx])
        else:
            idx = int(np.argmax(vals))
            value = 1.0 / float(vals[idx])
    elif operator == "II":
        fvals = np.asarray(f, dtype=float)
        if not tilde and np.any(fvals <= 0.0):
            raise ClassError(
                f"lower-side class for II requires f > 0 on E; violated at index "
                f"{int(np.flatnonzero(fvals <= 0.0)[0])}"
            )
        vals = op_II_nd(chain, exponent, f)
        idx = int(np.argmin(vals)) if tilde else int(np.argmax(vals))
        value = 1.0 / float(vals[idx])
    else:
        raise ClassError(f"unknown operator {operator!r}")
    return Certificate(value=value, side=side, operator=operator, argmin_index=idx,
                       detail={"f": np.asarray(f, float).tolist()})


# ---------------------------------------------------------------------------
# approximating sequences


def delta_seq_nd(chain: Chain, exponent: Exponent, n_max: int) -> tuple[list[float], np.ndarray]:
    """Nonincreasing delta_1..delta_n; each 1/delta_n is a certified lower bound.

    Starts from f_1 = nuhat[.,N]**(1/pstar) and iterates
    f_n = f_{n-1} * II(f_{n-1})**(pstar-1), renormalized each step.
    Returns the sequence and the final (renormalized) iterate.
    """
    _require_nd(chain)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    st = sum_table(chain, exponent)
    log_nuhat = _log_nuhat(chain, exponent)
    logF = st.log_nuhat_suffix / exponent.pstar
    mask = np.ones(chain.size, dtype=bool)
    deltas = []
    p = exponent.p
    for _ in range(n_max):
        logII, B = _log_II_kernel(chain.log_mu, log_nuhat, exponent, logF, mask)
        deltas.append(float(np.exp(np.max(logII))))
        # f * II(f)**(pstar-1) collapses to exp(B) since (p-1)(pstar-1) = 1
        logF = B - np.max(B)
    return deltas, np.exp(logF)


def _pair_logF_initial(log_nuhat: np.ndarray, ell: np.ndarray, m: np.ndarray):
    """Initial family f_1^(l,m)(i) = nuhat[i or l, m] for i <= m, in log scale."""
    L = log_nuhat.shape[0]
    i_grid = np.arange(L)
    # C[m, i] = log nuhat[i, m] (suffix sums within each row's [0, m] window)
    T = np.where(i_grid[None, :] <= i_grid[:, None], log_nuhat[None, :], NEG_INF)
    C = log_cumsum_rev(T, axis=1)
    idx = np.maximum(i_grid[None, :], ell[:, None])
    logF = C[m[:, None], idx]
    mask = i_grid[None, :] <= m[:, None]
    return np.where(mask, logF, NEG_INF), mask


def _pair_rayleigh(chain: Chain, exponent: Exponent, logF, mask):
    """log of mu(|f|^p) / D_p(f) per row of the pair family."""
    p = exponent.p
    log_num = log_sum(np.where(mask, chain.log_mu + p * logF, NEG_INF), axis=1)
    logd = np.concatenate([log_sub(logF[:, :-1], logF[:, 1:]), logF[:, -1:]], axis=1)
    log_den = log_sum(chain.log_nu + p * logd, axis=1)
    return log_num - log_den


def delta_prime_bar_seq_nd(
    chain: Chain,
    exponent: Exponent,
    n_max: int,
    *,
    m_values=None,
    scan_cap: int = MAX_SCAN_SIZE,
    row_budget: int = 500_000,
) -> DeltaPrimeBar:
    """delta'_n (nondecreasing; 1/delta'_n certified upper bounds) and
    delta_bar_n over the compactly-supported family f_n^(l,m).

    The supremum over pairs l <= m is an exact full scan unless ``m_values``
    restricts the m grid (results then flagged non-exhaustive).  Pairs are
    processed in chunks so memory stays at ``row_budget`` rows.
    """
    _require_nd(chain)
    N = chain.N
    if N < 1:
        raise ChainError("pair family needs N >= 1 (no l < m pairs on a single state)")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    exhaustive = m_values is None
    if m_values is None:
        if N > scan_cap:
            raise ChainError(
                f"N={N} exceeds the pair-scan cap {scan_cap}; pass m_values to subsample"
            )
        m_values = np.arange(1, N + 1)
    else:
        m_values = np.unique(np.asarray(m_values, dtype=int))
        if m_values[0] < 1 or m_values[-1] > N:
            raise ChainError("m_values must lie in [1, N]")
    pairs = [(l, m) for m in m_values for l in range(int(m) + 1)]
    ell_all = np.array([p_[0] for p_ in pairs])
    m_all = np.array([p_[1] for p_ in pairs])
    log_nuhat = _log_nuhat(chain, exponent)
    p = exponent.p

    best_prime = np.full(n_max, NEG_INF)
    best_bar = np.full(n_max, NEG_INF)
    prime_pairs = [(0, 0)] * n_max
    bar_pairs = [(0, 0)] * n_max

    chunk = max(1, row_budget // (N + 1))
    for start in range(0, ell_all.size, chunk):
        ell = ell_all[start : start + chunk]
        m = m_all[start : start + chunk]
        logF, mask = _pair_logF_initial(log_nuhat, ell, m)
        for n in range(n_max):
            logII, B = _log_II_kernel(chain.log_mu, log_nuhat, exponent, logF, mask)
            row_min = np.min(np.where(mask, logII, np.inf), axis=1)
            r = int(np.argmax(row_min))
            if row_min[r] > best_prime[n]:
                best_prime[n] = row_min[r]
                prime_pairs[n] = (int(ell[r]), int(m[r]))
            log_rq = _pair_rayleigh(chain, exponent, logF, mask)
            r = int(np.argmax(log_rq))
            if log_rq[r] > best_bar[n]:
                best_bar[n] = log_rq[r]
                bar_pairs[n] = (int(ell[r]), int(m[r]))
            if n + 1 < n_max:
                logF = np.where(mask, B, NEG_INF)
                logF = logF - np.max(logF, axis=1, keepdims=True)
    return DeltaPrimeBar(
        delta_prime=[float(np.exp(v)) for v in best_prime],
        delta_bar=[float(np.exp(v)) for v in best_bar],
        prime_pairs=prime_pairs,
        bar_pairs=bar_pairs,
        exhaustive=exhaustive,
    )


def delta_prime_seq_nd(chain: Chain, exponent: Exponent, n_max: int, **kw):
    """delta'_1..delta'_n with the optimal (l, m) pair per n."""
    res = delta_prime_bar_seq_nd(chain, exponent, n_max, **kw)
    return res.delta_prime, res.prime_pairs


def delta_bar_seq_nd(chain: Chain, exponent: Exponent, n_max: int, **kw):
    """delta_bar_1..delta_bar_n (Rayleigh quotients; 1/delta_bar_n >= lambda_p)."""
    res = delta_prime_bar_seq_nd(chain, exponent, n_max, **kw)
    return res.delta_bar, res.bar_pairs


# ---------------------------------------------------------------------------
# closed forms (n = 1)


def log_improved_estimates_nd(chain: Chain, exponent: Exponent) -> tuple[float, float, float]:
    """(log delta_1, log delta'_1, log delta_bar_1) via the closed forms."""
    _require_nd(chain)
    st = sum_table(chain, exponent)
    p, ps = exponent.p, exponent.pstar
    log_mu, log_nuhat = chain.log_mu, _log_nuhat(chain, exponent)
    phi = st.log_nuhat_suffix  # log nuhat[i, N]

    # delta_1: II applied to nuhat[., N]**(1/pstar)
    A = log_cumsum(log_mu + ((p - 1.0) / ps) * phi)
    B = log_cumsum_rev(log_nuhat + (ps - 1.0) * A)
    log_d1 = (p - 1.0) * float(np.max(B - phi / ps))

    # delta'_1: sup over l of the m = N member (the pair value is increasing in m)
    L = chain.size
    i_grid = np.arange(L)
    phi_max = (p - 1.0) * phi[np.maximum(i_grid[None, :], i_grid[:, None])]  # row l, col k
    A2 = log_cumsum(log_mu[None, :] + phi_max, axis=1)
    T2 = log_nuhat[None, :] + (ps - 1.0) * A2
    B2 = log_cumsum_rev(T2, axis=1)
    log_d1p = (p - 1.0) * float(np.max(B2[i_grid, i_grid] - phi))

    # delta_bar_1: sup over m of (1/nuhat[m,N]) sum_j mu_j nuhat[j or m, N]**p
    terms = log_mu[None, :] + p * phi[np.maximum(i_grid[None, :], i_grid[:, None])]
    log_dbar = float(np.max(log_sum(terms, axis=1) - phi))
    return log_d1, log_d1p, log_dbar


def improved_estimates_nd(chain: Chain, exponent: Exponent) -> tuple[float, float, float]:
    """(delta_1, delta'_1, delta_bar_1) closed forms.

    Orderings: delta_bar_1 in [sigma_p, p*sigma_p]; delta_bar_1 <= delta'_1
    for 1 < p <= 2 and >= for p >= 2, with equality at p = 2.
    """
    return tuple(float(np.exp(v)) for v in log_improved_estimates_nd(chain, exponent))
