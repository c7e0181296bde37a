"""Estimators for the Dirichlet-at-origin / Neumann-at-right (DN) case.

Mirrors the ND module with the boundary roles exchanged: test functions
increase away from the absorbing origin, the double-summation operator
accumulates nuhat from the left and mu from the right, and the difference
form R gains a modified variant R-tilde whose cut index m replaces mu_m by
the tail mass mu_m + ... + mu_N (the reflecting boundary folded into one
state).  The upper-bound family is singly indexed by the plateau position m.
"""

from __future__ import annotations

import numpy as np

from .chain import BoundaryCase, Chain, ChainError, Exponent, sum_table
from .logspace import NEG_INF, log_cumsum, log_cumsum_rev, log_sub, log_sum
from .nd import Certificate, ClassError


def _require_dn(chain: Chain):
    if chain.case is not BoundaryCase.DN:
        raise ChainError("operation defined for DN chains only")


def _log_nuhat(chain: Chain, exponent: Exponent) -> np.ndarray:
    return (1.0 - exponent.pstar) * chain.log_nu


def tilde_mu(chain: Chain, m: int) -> float:
    """Tail mass mu_m + ... + mu_N folded onto the cut state m."""
    _require_dn(chain)
    pos = chain.state_index(m)
    return float(np.sum(chain.mu[pos:]))


# ---------------------------------------------------------------------------
# sigma_p and basic estimates


def log_sigma_p_dn(chain: Chain, exponent: Exponent) -> tuple[float, int]:
    _require_dn(chain)
    st = sum_table(chain, exponent)
    vals = st.log_mu_prefix + (exponent.p - 1.0) * st.log_nuhat_suffix
    n = int(np.argmax(vals))
    return float(vals[n]), n + 1  # states are 1-based


def sigma_p_dn(chain: Chain, exponent: Exponent) -> tuple[float, int]:
    """sigma_p = sup_n mu[n,N] * nuhat[1,n]**(p-1) over n in {1..N}."""
    log_s, n = log_sigma_p_dn(chain, exponent)
    return float(np.exp(log_s)), n


def basic_bounds_dn(chain: Chain, exponent: Exponent) -> tuple[float, float]:
    """(k(p) sigma_p)^-1 <= lambda_p <= sigma_p^-1."""
    log_s, _ = log_sigma_p_dn(chain, exponent)
    return float(np.exp(-log_s - np.log(exponent.kp))), float(np.exp(-log_s))


# ---------------------------------------------------------------------------
# operators


def _log_f(chain: Chain, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[0] != chain.size:
        raise ClassError(f"test function length {f.shape[0]} != chain size {chain.size}")
    if np.any(f <= 0.0) or not np.all(np.isfinite(f)):
        raise ClassError(
            f"test function must be positive on E; violated at index "
            f"{int(np.flatnonzero(~((f > 0.0) & np.isfinite(f)))[0]) + 1}"
        )
    return np.log(f)


def _log_II_kernel_dn(log_mu, log_nuhat, exponent: Exponent, logF):
    """log II over rows; returns (logII, logB) with logB the next iterate."""
    p, ps = exponent.p, exponent.pstar
    A = log_cumsum_rev(log_mu + (p - 1.0) * logF, axis=-1)
    B = log_cumsum(log_nuhat + (ps - 1.0) * A, axis=-1)
    return (p - 1.0) * (B - logF), B


def op_II_dn(chain: Chain, exponent: Exponent, f) -> np.ndarray:
    """II_i(f) for i in E = {1..N} (array position i-1)."""
    _require_dn(chain)
    logf = _log_f(chain, f)
    logII, _ = _log_II_kernel_dn(chain.log_mu, _log_nuhat(chain, exponent), exponent, logf)
    return np.exp(logII)


def op_I_dn(chain: Chain, exponent: Exponent, f, tilde: bool = False) -> np.ndarray:
    """I_i(f) over E, with f_0 = 0; +inf on plateaus (tilde class only)."""
    _require_dn(chain)
    logf = _log_f(chain, f)
    fvals = np.asarray(f, dtype=float)
    d = fvals - np.concatenate(([0.0], fvals[:-1]))
    if np.any(d < 0.0):
        raise ClassError(
            f"increasing class violated at index {int(np.flatnonzero(d < 0.0)[0]) + 1}"
        )
    if not tilde and np.any(d == 0.0):
        raise ClassError(
            f"strictly-increasing class violated at index {int(np.flatnonzero(d == 0.0)[0]) + 1}"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        logS = log_cumsum_rev(chain.log_mu + (exponent.p - 1.0) * logf)
        logd = np.where(d > 0.0, np.log(np.maximum(d, 0.0)), NEG_INF)
        logI = logS - chain.log_nu - (exponent.p - 1.0) * logd
    return np.exp(np.where(np.isneginf(logd), np.inf, logI))


def op_R_dn(chain: Chain, exponent: Exponent, w) -> np.ndarray:
    """R_i(w) over E for w in class W (w_i > 1), with w_0 = infinity and
    nu_{N+1} = 0 baked into the end terms."""
    _require_dn(chain)
    w = np.asarray(w, dtype=float)
    L = chain.size
    if w.shape[0] != L:
        raise ClassError(f"weight ratio length {w.shape[0]} != chain size {L}")
    bad = np.flatnonzero(~(w > 1.0))
    if bad.size:
        raise ClassError(f"class W requires w > 1 on E; violated at index {int(bad[0]) + 1}")
    return _r_dn_values(chain, exponent, w, mu_at=chain.mu)


def _r_dn_values(chain: Chain, exponent: Exponent, w, mu_at) -> np.ndarray:
    p = exponent.p
    nu = chain.nu
    out = np.empty(chain.size)
    for pos in range(chain.size):
        head = 1.0 if pos == 0 else (1.0 - 1.0 / w[pos - 1])
        t1 = nu[pos] * head ** (p - 1.0)
        t2 = 0.0 if pos == chain.size - 1 else nu[pos + 1] * (w[pos] - 1.0) ** (p - 1.0)
        out[pos] = (t1 - t2) / mu_at[pos]
    return out


def op_Rtilde_dn(chain: Chain, exponent: Exponent, w, m: int) -> np.ndarray:
    """R-tilde over E for w in the tilde class with plateau index m:
    w_i > 1 up to m-1, w_i = 1 from m on, brackets positive up to m.

    Agrees with R before the cut, uses the tail mass at i = m and vanishes
    after it.
    """
    _require_dn(chain)
    w = np.asarray(w, dtype=float)
    L = chain.size
    if w.shape[0] != L:
        raise ClassError(f"weight ratio length {w.shape[0]} != chain size {L}")
    pos_m = chain.state_index(m)
    head = np.flatnonzero(~(w[:pos_m] > 1.0))
    if head.size:
        raise ClassError(
            f"tilde class requires w > 1 before the cut; violated at index {int(head[0]) + 1}"
        )
    tail = np.flatnonzero(w[pos_m:] != 1.0)
    if tail.size:
        raise ClassError(
            f"tilde class requires w = 1 from the cut on; violated at index "
            f"{int(tail[0]) + m}"
        )
    mu_at = chain.mu.copy()
    mu_at[pos_m] = tilde_mu(chain, m)
    out = _r_dn_values(chain, exponent, w, mu_at=mu_at)
    out[pos_m + 1 :] = 0.0
    bad = np.flatnonzero(out[: pos_m + 1] <= 0.0)
    if bad.size:
        raise ClassError(
            f"tilde class positivity violated at index {int(bad[0]) + 1}"
        )
    return out


def bound_from_test_function_dn(
    chain: Chain,
    exponent: Exponent,
    *,
    f=None,
    w=None,
    side: str = "lower",
    operator: str | None = None,
    m: int | None = None,
) -> Certificate:
    """Certified one-sided bound from an admissible DN candidate.

    Upper-side R requires the tilde class with its plateau index ``m``.
    """
    _require_dn(chain)
    if (f is None) == (w is None):
        raise ClassError("provide exactly one of f= (operators I/II) or w= (operator R)")
    if side not in ("lower", "upper"):
        raise ClassError(f"side must be 'lower' or 'upper', got {side!r}")
    tilde = side == "upper"
    if w is not None:
        if tilde:
            if m is None:
                raise ClassError("upper-side R needs the plateau index m")
            vals = op_Rtilde_dn(chain, exponent, w, m)
            pos_m = chain.state_index(m)
            idx = int(np.argmax(vals[: pos_m + 1]))
            value = float(vals[idx])
        else:
            vals = op_R_dn(chain, exponent, w)
            idx = int(np.argmin(vals))
            value = float(vals[idx])
        return Certificate(value=value, side=side, operator="R", argmin_index=idx + 1,
                           detail={"w": np.asarray(w, float).tolist()})
    operator = operator or "II"
    if operator == "I":
        vals = op_I_dn(chain, exponent, f, tilde=tilde)
        if tilde:
            finite = np.flatnonzero(np.isfinite(vals))
            idx = int(finite[np.argmin(vals[finite])])
        else:
            idx = int(np.argmax(vals))
        value = 1.0 / float(vals[idx])
    elif operator == "II":
        vals = op_II_dn(chain, exponent, f)
        idx = int(np.argmin(vals)) if tilde else int(np.argmax(vals))
        value = 1.0 / float(vals[idx])
    else:
        raise ClassError(f"unknown operator {operator!r}")
    return Certificate(value=value, side=side, operator=operator, argmin_index=idx + 1,
                       detail={"f": np.asarray(f, float).tolist()})


# ---------------------------------------------------------------------------
# approximating sequences


def delta_seq_dn(chain: Chain, exponent: Exponent, n_max: int) -> tuple[list[float], np.ndarray]:
    """Nonincreasing delta_1..delta_n from f_1 = nuhat[1,.]**(1/pstar)."""
    _require_dn(chain)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    st = sum_table(chain, exponent)
    log_nuhat = _log_nuhat(chain, exponent)
    logF = st.log_nuhat_suffix / exponent.pstar
    deltas = []
    for _ in range(n_max):
        logII, B = _log_II_kernel_dn(chain.log_mu, log_nuhat, exponent, logF)
        deltas.append(float(np.exp(np.max(logII))))
        logF = B - np.max(B)
    return deltas, np.exp(logF)


def delta_prime_bar_seq_dn(chain: Chain, exponent: Exponent, n_max: int):
    """delta'_n (sup over the plateau family, nondecreasing) and delta_bar_n,
    with the optimal cut index m per n.  The family is singly indexed by m,
    so the scan is O(N^2) per iteration."""
    _require_dn(chain)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    st = sum_table(chain, exponent)
    log_nuhat = _log_nuhat(chain, exponent)
    L = chain.size
    p = exponent.p
    i_grid = np.arange(L)
    # row m-1, column i-1: f_1^(m)(i) = nuhat[1, min(i, m)]
    logF = st.log_nuhat_suffix[np.minimum(i_grid[None, :], i_grid[:, None])]
    delta_prime, delta_bar = [], []
    prime_ms, bar_ms = [], []
    for n in range(n_max):
        logII, B = _log_II_kernel_dn(chain.log_mu, log_nuhat, exponent, logF)
        row_min = np.min(logII, axis=1)
        r = int(np.argmax(row_min))
        delta_prime.append(float(np.exp(row_min[r])))
        prime_ms.append(r + 1)
        log_num = log_sum(chain.log_mu + p * logF, axis=1)
        logd = np.concatenate([logF[:, :1], log_sub(logF[:, 1:], logF[:, :-1])], axis=1)
        log_den = log_sum(chain.log_nu + p * logd, axis=1)
        r = int(np.argmax(log_num - log_den))
        delta_bar.append(float(np.exp(log_num[r] - log_den[r])))
        bar_ms.append(r + 1)
        if n + 1 < n_max:
            # f_n^(m) = f_{n-1}^(m) * II(f_{n-1}^(m))(. cut at m)**(pstar-1)
            logF = B[i_grid[:, None], np.minimum(i_grid[None, :], i_grid[:, None])]
            logF = logF - np.max(logF, axis=1, keepdims=True)
    return delta_prime, delta_bar, prime_ms, bar_ms


def delta_prime_seq_dn(chain: Chain, exponent: Exponent, n_max: int):
    dp, _, ms, _ = delta_prime_bar_seq_dn(chain, exponent, n_max)
    return dp, ms


def delta_bar_seq_dn(chain: Chain, exponent: Exponent, n_max: int):
    _, db, _, ms = delta_prime_bar_seq_dn(chain, exponent, n_max)
    return db, ms


# ---------------------------------------------------------------------------
# closed forms (n = 1)


def log_improved_estimates_dn(chain: Chain, exponent: Exponent) -> tuple[float, float, float]:
    """(log delta_1, log delta'_1, log delta_bar_1) via the closed forms."""
    _require_dn(chain)
    st = sum_table(chain, exponent)
    p, ps = exponent.p, exponent.pstar
    log_mu, log_nuhat = chain.log_mu, _log_nuhat(chain, exponent)
    phi = st.log_nuhat_suffix  # log nuhat[1, i] at position i-1
    L = chain.size
    i_grid = np.arange(L)

    # delta_1: II applied to nuhat[1, .]**(1/pstar)
    A = log_cumsum_rev(log_mu + ((p - 1.0) / ps) * phi)
    B = log_cumsum(log_nuhat + (ps - 1.0) * A)
    log_d1 = (p - 1.0) * float(np.max(B - phi / ps))

    # delta'_1: sup over m; inner weight nuhat[1, k and m]**(p-1)
    phi_min = (p - 1.0) * phi[np.minimum(i_grid[None, :], i_grid[:, None])]  # row m, col k
    A2 = log_cumsum_rev(log_mu[None, :] + phi_min, axis=1)
    B2 = log_cumsum(log_nuhat[None, :] + (ps - 1.0) * A2, axis=1)
    log_d1p = (p - 1.0) * float(np.max(B2[i_grid, i_grid] - phi))

    # delta_bar_1 = sup_m (1/nuhat[1,m]) sum_j mu_j nuhat[1, j and m]**p
    terms = log_mu[None, :] + p * phi[np.minimum(i_grid[None, :], i_grid[:, None])]
    log_dbar = float(np.max(log_sum(terms, axis=1) - phi))
    return log_d1, log_d1p, log_dbar


def improved_estimates_dn(chain: Chain, exponent: Exponent) -> tuple[float, float, float]:
    """(delta_1, delta'_1, delta_bar_1) closed forms; same orderings as ND."""
    return tuple(float(np.exp(v)) for v in log_improved_estimates_dn(chain, exponent))
