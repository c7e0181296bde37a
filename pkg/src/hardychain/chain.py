"""Finite weighted chains, conjugate-exponent arithmetic and cumulative tables.

Index conventions (baked into every evaluation, never stored in the arrays):

* ND chains live on {0, ..., N} with a reflecting (Neumann) boundary at the
  origin (nu_{-1} = 0) and an absorbing (Dirichlet) boundary past the right
  end (f_{N+1} = 0).
* DN chains live on {1, ..., N} with an absorbing boundary at 0 (f_0 = 0)
  and a reflecting boundary past the right end (nu_{N+1} = 0).

Arrays are stored densely: position k of an ND array is state k, position
k of a DN array is state k+1.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .logspace import log_cumsum, log_cumsum_rev

P_MIN = 1.0 + 1e-6
P_MAX = 1e6

#: |log| threshold past which linear-scale evaluation of weight products is
#: not trusted and log-scale recursions are used instead.
LOG_SCALE_THRESHOLD = 600.0

#: Largest chain accepted by the constructors (O(N) tables).
MAX_CHAIN_SIZE = 100_000

#: Default cap for the O(N^2)-O(N^3) pair scans in the estimator modules.
MAX_SCAN_SIZE = 2000


class ChainError(ValueError):
    """Invalid chain data or an operation applied to the wrong boundary case."""


class ExponentError(ValueError):
    """Exponent outside the supported open interval (1, infinity)."""


class BoundaryCase(str, enum.Enum):
    ND = "nd"
    DN = "dn"


def _as_case(case) -> BoundaryCase:
    if isinstance(case, BoundaryCase):
        return case
    try:
        return BoundaryCase(str(case).lower())
    except ValueError:
        raise ChainError(f"unknown boundary case {case!r}; expected 'nd' or 'dn'")


@dataclass(frozen=True)
class Exponent:
    """An exponent p > 1 with its conjugate p* = p/(p-1) and k(p) = p*(p*)**(p-1)."""

    p: float
    pstar: float
    kp: float

    @classmethod
    def from_p(cls, p: float) -> "Exponent":
        p = float(p)
        if not (P_MIN <= p <= P_MAX):
            raise ExponentError(
                f"p={p} outside the supported window [{P_MIN}, {P_MAX}]; "
                "the degenerate endpoints p=1 and p=infinity are excluded"
            )
        pstar = p / (p - 1.0)
        # k(p) = p * pstar**(p-1); evaluated via expm1/log1p so large p does
        # not overflow the intermediate power.
        kp = p * math.exp((p - 1.0) * math.log1p(1.0 / (p - 1.0)))
        return cls(p=p, pstar=pstar, kp=kp)

    @property
    def kp_root(self) -> float:
        """k(p)**(1/p), the basic-estimate gap; at most 2, with equality at p=2."""
        return self.kp ** (1.0 / self.p)


@dataclass(frozen=True)
class Chain:
    """A finite weighted chain with state weights mu and edge weights nu."""

    case: BoundaryCase
    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float))
        self.mu.setflags(write=False)
        self.nu.setflags(write=False)

    @property
    def size(self) -> int:
        """Number of states in the index set."""
        return self.mu.shape[0]

    @property
    def N(self) -> int:
        return self.size - 1 if self.case is BoundaryCase.ND else self.size

    @property
    def states(self) -> np.ndarray:
        first = 0 if self.case is BoundaryCase.ND else 1
        return np.arange(first, first + self.size)

    @property
    def log_mu(self) -> np.ndarray:
        return np.log(self.mu)

    @property
    def log_nu(self) -> np.ndarray:
        return np.log(self.nu)

    def state_index(self, k: int) -> int:
        """Array position of state k."""
        first = 0 if self.case is BoundaryCase.ND else 1
        if not (first <= k <= self.N):
            raise ChainError(f"state {k} outside index set [{first}, {self.N}]")
        return k - first

    def to_dict(self) -> dict:
        return {"case": self.case.value, "mu": self.mu.tolist(), "nu": self.nu.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class NuHat:
    """Transformed edge weights nu**(1-pstar), with a log-scale companion."""

    nuhat: np.ndarray
    log_nuhat: np.ndarray


@dataclass(frozen=True)
class SumTable:
    """Cumulative mu and nu-hat sums growing away from the Dirichlet end.

    ND: ``mu_prefix[n] = mu[0,n]`` and ``nuhat_suffix[n] = nuhat[n,N]``.
    DN: ``mu_prefix[n]`` holds mu[n,N] and ``nuhat_suffix[n]`` holds
    nuhat[1,n] (array position n-1).  Both kept in log scale; the linear
    views exponentiate on access.
    """

    log_mu_prefix: np.ndarray
    log_nuhat_suffix: np.ndarray

    @property
    def mu_prefix(self) -> np.ndarray:
        return np.exp(self.log_mu_prefix)

    @property
    def nuhat_suffix(self) -> np.ndarray:
        return np.exp(self.log_nuhat_suffix)


def make_chain(case, mu, nu) -> Chain:
    """Validate weight sequences and build a chain."""
    case = _as_case(case)
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.ndim != 1 or nu.ndim != 1:
        raise ChainError("mu and nu must be one-dimensional sequences")
    if mu.shape[0] == 0:
        raise ChainError("empty weight sequences")
    if mu.shape[0] != nu.shape[0]:
        raise ChainError(f"length mismatch: len(mu)={mu.shape[0]}, len(nu)={nu.shape[0]}")
    if mu.shape[0] > MAX_CHAIN_SIZE:
        raise ChainError(f"chain size {mu.shape[0]} exceeds cap {MAX_CHAIN_SIZE}")
    first = 0 if case is BoundaryCase.ND else 1
    for name, arr in (("mu", mu), ("nu", nu)):
        bad = np.flatnonzero(~(np.isfinite(arr) & (arr > 0.0)))
        if bad.size:
            raise ChainError(
                f"nonpositive or non-finite {name} weight at index {bad[0] + first}"
            )
    return Chain(case=case, mu=mu, nu=nu)


def geometric_chain(a: float, r: float, N: int, case="nd") -> Chain:
    """Chain with mu_k = r**k and nu_k = a * r**(k+1) over the index set."""
    if not (a > 0.0):
        raise ChainError(f"scale a must be positive, got {a}")
    if not (r > 1.0):
        raise ChainError(f"ratio r must exceed 1, got {r}")
    case = _as_case(case)
    first = 0 if case is BoundaryCase.ND else 1
    if N < first:
        raise ChainError(f"N={N} below minimum {first} for case {case.value}")
    k = np.arange(first, N + 1, dtype=float)
    return make_chain(case, np.power(r, k), a * np.power(r, k + 1.0))


def uniform_chain(N: int, case="nd") -> Chain:
    """All-ones weights over the index set."""
    case = _as_case(case)
    first = 0 if case is BoundaryCase.ND else 1
    if N < first:
        raise ChainError(f"N={N} below minimum {first} for case {case.value}")
    n = N + 1 - first
    return make_chain(case, np.ones(n), np.ones(n))


def chain_from_dict(data: dict) -> Chain:
    try:
        return make_chain(data["case"], data["mu"], data["nu"])
    except KeyError as exc:
        raise ChainError(f"chain JSON missing field {exc}")


def load_chain(path) -> Chain:
    with open(path) as fh:
        data = json.load(fh)
    return chain_from_dict(data)


def nu_hat(chain: Chain, exponent: Exponent) -> NuHat:
    """Elementwise nu**(1 - pstar), kept in both linear and log scale."""
    log_nuhat = (1.0 - exponent.pstar) * chain.log_nu
    with np.errstate(over="ignore"):
        nuhat = np.exp(log_nuhat)
    nuhat.setflags(write=False)
    log_nuhat.setflags(write=False)
    return NuHat(nuhat=nuhat, log_nuhat=log_nuhat)


def sum_table(chain: Chain, exponent: Exponent) -> SumTable:
    """Cumulative tables used by every estimator, in log scale."""
    log_nuhat = nu_hat(chain, exponent).log_nuhat
    if chain.case is BoundaryCase.ND:
        log_mu_c = log_cumsum(chain.log_mu)
        log_nuhat_c = log_cumsum_rev(log_nuhat)
    else:
        log_mu_c = log_cumsum_rev(chain.log_mu)
        log_nuhat_c = log_cumsum(log_nuhat)
    log_mu_c.setflags(write=False)
    log_nuhat_c.setflags(write=False)
    return SumTable(log_mu_prefix=log_mu_c, log_nuhat_suffix=log_nuhat_c)


def increments(chain: Chain, f: np.ndarray) -> np.ndarray:
    """Signed differences toward the Dirichlet boundary.

    ND: f_k - f_{k+1} with f_{N+1} = 0; DN: f_k - f_{k-1} with f_0 = 0.
    One entry per edge, aligned with nu.
    """
    f = np.asarray(f, dtype=float)
    if f.shape[0] != chain.size:
        raise ChainError(f"test function length {f.shape[0]} != chain size {chain.size}")
    if chain.case is BoundaryCase.ND:
        return f - np.append(f[1:], 0.0)
    return f - np.concatenate(([0.0], f[:-1]))


def dirichlet_form(chain: Chain, exponent: Exponent, f) -> float:
    """D_p(f): weighted p-power sum of increments over the chain's edges."""
    d = np.abs(increments(chain, f))
    return float(np.sum(chain.nu * d**exponent.p))


def mu_norm_p(chain: Chain, exponent: Exponent, f) -> float:
    """sum_k mu_k |f_k|**p."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != chain.size:
        raise ChainError(f"test function length {f.shape[0]} != chain size {chain.size}")
    return float(np.sum(chain.mu * np.abs(f) ** exponent.p))


def rayleigh_quotient(chain: Chain, exponent: Exponent, f) -> float:
    """D_p(f) / mu(|f|^p); an upper bound for the principal eigenvalue."""
    denom = mu_norm_p(chain, exponent, f)
    if denom == 0.0:
        raise ChainError("Rayleigh quotient of the zero function")
    return dirichlet_form(chain, exponent, f) / denom


def dual_chain(chain: Chain, exponent: Exponent) -> Chain:
    """ND dual of a DN chain on {0..N-1}: mu'_j = nu_{j+1}**(1-pstar),
    nu'_j = mu_{j+1}**(1-pstar).

    The principal eigenvalues are linked by
    lambda_p(DN)**(-1/p) = lambda_{pstar}(dual)**(-1/pstar).
    Only the DN -> ND direction is implemented; invert by dualizing twice
    (with p replaced by pstar), which restores the original weights.
    """
    if chain.case is not BoundaryCase.DN:
        raise ChainError("dual_chain expects a DN chain; dualize twice to invert")
    e = 1.0 - exponent.pstar
    return make_chain(BoundaryCase.ND, chain.nu**e, chain.mu**e)
