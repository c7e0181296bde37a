"""Operators, sigma_p and the approximating sequences for the DN case
(absorbing left end, reflecting right end)."""

import math

import numpy as np
import pytest

import hardychain as hc
from hardychain.dn import (
    delta_prime_bar_seq_dn,
    delta_seq_dn,
    improved_estimates_dn,
    log_improved_estimates_dn,
    op_I_dn,
    op_II_dn,
    op_R_dn,
    op_Rtilde_dn,
    sigma_p_dn,
    tilde_mu,
)
from hardychain.nd import ClassError

P2 = hc.Exponent.from_p(2.0)


# --- direct reference implementations --------------------------------------


def ref_sigma(ch, e):
    mu, nuhat = ch.mu, ch.nu ** (1.0 - e.pstar)
    vals = [mu[n:].sum() * nuhat[: n + 1].sum() ** (e.p - 1.0)
            for n in range(ch.size)]
    return max(vals), int(np.argmax(vals)) + 1


def ref_II(ch, e, f):
    mu, nuhat, f = ch.mu, ch.nu ** (1.0 - e.pstar), np.asarray(f, float)
    A = np.cumsum((mu * f ** (e.p - 1.0))[::-1])[::-1]
    out = np.empty(ch.size)
    for i in range(ch.size):
        out[i] = (sum(nuhat[j] * A[j] ** (e.pstar - 1.0) for j in range(i + 1))
                  / f[i]) ** (e.p - 1.0)
    return out


def ref_I(ch, e, f):
    mu, nu, f = ch.mu, ch.nu, np.asarray(f, float)
    fz = np.concatenate([[0.0], f])
    A = np.cumsum((mu * f ** (e.p - 1.0))[::-1])[::-1]
    return A / (nu * (fz[1:] - fz[:-1]) ** (e.p - 1.0))


def ref_R(ch, e, w):
    mu, nu, w = ch.mu, ch.nu, np.asarray(w, float)
    L = ch.size
    out = np.empty(L)
    for i in range(L):
        head = 1.0 if i == 0 else (1.0 - 1.0 / w[i - 1]) ** (e.p - 1.0)
        tail = 0.0 if i == L - 1 else nu[i + 1] * (w[i] - 1.0) ** (e.p - 1.0)
        out[i] = (nu[i] * head - tail) / mu[i]
    return out


@pytest.fixture
def random_dn():
    rng = np.random.default_rng(43)
    mu = 10.0 ** rng.uniform(-2, 2, 9)
    nu = 10.0 ** rng.uniform(-2, 2, 9)
    return hc.make_chain("dn", mu, nu)


# --- hand values -----------------------------------------------------------


def test_op_I_hand_value():
    ch = hc.uniform_chain(2, "dn")
    vals = op_I_dn(ch, P2, [1.0, 2.0])
    assert np.allclose(vals, [3.0, 2.0])


def test_op_II_hand_value():
    ch = hc.uniform_chain(2, "dn")
    vals = op_II_dn(ch, P2, [1.0, 1.0])
    assert np.allclose(vals, [2.0, 3.0])


def test_op_R_hand_value():
    ch = hc.uniform_chain(2, "dn")
    vals = op_R_dn(ch, P2, [2.0, 2.0])
    assert np.allclose(vals, [0.0, 0.5])


def test_sigma_uniform_chain_tie_takes_smallest_state():
    ch = hc.uniform_chain(40, "dn")
    sigma, n = sigma_p_dn(ch, P2)
    assert sigma == pytest.approx(420.0, rel=1e-12) and n == 20


def test_tilde_mu_tail_mass():
    ch = hc.make_chain("dn", [1.0, 2.0, 4.0], [1.0, 1.0, 1.0])
    assert tilde_mu(ch, 1) == pytest.approx(7.0)
    assert tilde_mu(ch, 3) == pytest.approx(4.0)


# --- agreement with the reference loops ------------------------------------


@pytest.mark.parametrize("p", [1.2, 2.0, 3.7])
def test_operators_match_reference(random_dn, p):
    ch, e = random_dn, hc.Exponent.from_p(p)
    rng = np.random.default_rng(2)
    f = np.sort(rng.uniform(0.5, 2.0, ch.size))
    assert np.allclose(op_II_dn(ch, e, f), ref_II(ch, e, f), rtol=1e-12)
    assert np.allclose(op_I_dn(ch, e, f), ref_I(ch, e, f), rtol=1e-12)
    w = rng.uniform(1.2, 3.0, ch.size)
    assert np.allclose(op_R_dn(ch, e, w), ref_R(ch, e, w), rtol=1e-12)
    sig, n = sigma_p_dn(ch, e)
    rsig, rn = ref_sigma(ch, e)
    assert math.isclose(sig, rsig, rel_tol=1e-12) and n == rn


def test_operators_scale_invariant(random_dn):
    e = hc.Exponent.from_p(2.5)
    f = np.linspace(1.0, 5.0, random_dn.size)
    for c in (1e-6, 3.0, 1e6):
        assert np.allclose(op_II_dn(random_dn, e, c * f),
                           op_II_dn(random_dn, e, f), rtol=1e-12)
        assert np.allclose(op_I_dn(random_dn, e, c * f),
                           op_I_dn(random_dn, e, f), rtol=1e-12)


def test_class_errors():
    ch = hc.uniform_chain(3, "dn")
    with pytest.raises(ClassError):
        op_I_dn(ch, P2, [3.0, 2.0, 1.0])  # decreasing: wrong class
    with pytest.raises(ClassError):
        op_II_dn(ch, P2, [1.0, 0.0, 1.0])  # must be positive everywhere
    with pytest.raises(ClassError):
        op_R_dn(ch, P2, [2.0, 1.0, 2.0])  # w must exceed 1
    with pytest.raises(ClassError):
        op_Rtilde_dn(ch, P2, [2.0, 2.0, 1.0], m=3)  # w=1 required from the cut


def test_Rtilde_identity_on_truncated_eigenfunction(random_dn):
    e = hc.Exponent.from_p(2.5)
    L = random_dn.size
    m = 5
    mu_t = random_dn.mu[:m].copy()
    mu_t[m - 1] = tilde_mu(random_dn, m)
    sub = hc.make_chain("dn", mu_t, random_dn.nu[:m])
    sol = hc.solve(sub, e)
    w = np.ones(L)
    w[: m - 1] = sol.g[1:] / sol.g[:-1]
    vals = op_Rtilde_dn(random_dn, e, w, m)
    assert np.allclose(vals[:m], sol.lam, rtol=1e-9)
    assert np.all(vals[m:] == 0.0)
    # and it certifies an upper bound for the full chain
    cert = hc.bound_from_test_function_dn(random_dn, e, w=w, side="upper", m=m)
    lam_full = hc.solve(random_dn, e).lam
    assert cert.value >= lam_full * (1.0 - 1e-12)


def test_bound_certificates_sandwich(random_dn):
    e = hc.Exponent.from_p(3.0)
    lam = hc.solve(random_dn, e).lam
    st = hc.sum_table(random_dn, e)
    f = np.exp(st.log_nuhat_suffix / e.pstar)
    for op in ("I", "II"):
        lo = hc.bound_from_test_function_dn(random_dn, e, f=f, side="lower", operator=op)
        assert lo.value <= lam * (1.0 + 1e-12)
    up = hc.bound_from_test_function_dn(random_dn, e, f=f, side="upper", operator="II")
    assert up.value >= lam * (1.0 - 1e-12)


def test_R_certificate_from_eigenfunction(random_dn):
    e = hc.Exponent.from_p(2.0)
    sol = hc.solve(random_dn, e)
    w = np.append(sol.g[1:] / sol.g[:-1], 2.0)  # last entry multiplies nu_{N+1}=0
    lo = hc.bound_from_test_function_dn(random_dn, e, w=w, side="lower")
    assert lo.value == pytest.approx(sol.lam, rel=1e-8)


# --- approximating sequences ----------------------------------------------


def test_closed_forms_match_sequences(random_dn):
    for p in (1.3, 2.0, 4.0):
        e = hc.Exponent.from_p(p)
        d1, d1p, dbar1 = improved_estimates_dn(random_dn, e)
        delta, _ = delta_seq_dn(random_dn, e, 1)
        dp, dbar, _, _ = delta_prime_bar_seq_dn(random_dn, e, 1)
        assert d1 == pytest.approx(delta[0], rel=1e-12)
        assert d1p == pytest.approx(dp[0], rel=1e-12)
        assert dbar1 == pytest.approx(dbar[0], rel=1e-12)
        logs = log_improved_estimates_dn(random_dn, e)
        assert np.allclose(np.exp(logs), [d1, d1p, dbar1], rtol=1e-12)


def test_delta1_is_sup_II_of_seed(random_dn):
    e = hc.Exponent.from_p(2.5)
    st = hc.sum_table(random_dn, e)
    f1 = np.exp(st.log_nuhat_suffix / e.pstar)
    d1, _, _ = improved_estimates_dn(random_dn, e)
    assert d1 == pytest.approx(float(np.max(ref_II(random_dn, e, f1))), rel=1e-11)


def test_sequences_monotone_and_bracket(random_dn):
    e = hc.Exponent.from_p(1.8)
    lam = hc.solve(random_dn, e).lam
    delta, _ = delta_seq_dn(random_dn, e, 5)
    dp, dbar, _, _ = delta_prime_bar_seq_dn(random_dn, e, 5)
    tol = 1e-9
    for a, b in zip(delta, delta[1:]):
        assert b <= a * (1.0 + tol)
    for a, b in zip(dp, dp[1:]):
        assert b >= a * (1.0 - tol)
    for n in range(5):
        assert 1.0 / delta[n] <= lam * (1.0 + tol)
        assert 1.0 / dp[n] >= lam * (1.0 - tol)
    for n in range(4):
        assert dbar[n + 1] >= dp[n] * (1.0 - tol)


def test_single_state_chain():
    ch = hc.make_chain("dn", [2.0], [3.0])
    e = hc.Exponent.from_p(2.0)
    lam = hc.solve(ch, e).lam
    assert lam == pytest.approx(1.5)
    d1, d1p, _ = improved_estimates_dn(ch, e)
    assert 1.0 / d1 == pytest.approx(lam, rel=1e-12)
    assert 1.0 / d1p == pytest.approx(lam, rel=1e-12)
