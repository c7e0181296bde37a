"""Report objects bridging the estimator/solver layers and the CLI.

Everything here is plain serialization: collect the certified quantities for
a chain at one exponent and emit JSON-ready dictionaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import BoundaryCase, Chain, Exponent
from . import dn as _dn
from . import nd as _nd
from .solver import EigenSolution, VerificationReport


@dataclass(frozen=True)
class BoundsReport:
    """sigma_p, the basic two-sided estimate and the improved sequences."""

    sigma_p: float
    argmax_n: int
    lower: float
    upper: float
    delta: list[float]
    delta_prime: list[float]
    delta_bar: list[float]
    certificates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sigma_p": self.sigma_p,
            "argmax_n": self.argmax_n,
            "lower": self.lower,
            "upper": self.upper,
            "delta": list(self.delta),
            "delta_prime": list(self.delta_prime),
            "delta_bar": list(self.delta_bar),
            "certificates": dict(self.certificates),
        }


def bounds_report(chain: Chain, exponent: Exponent, iters: int = 1) -> BoundsReport:
    """Assemble the bound ladder for one chain and exponent.

    ``iters`` > 1 runs the approximating sequences that far; the n = 1
    entries always come from the closed forms.  The pair/plateau families
    need at least two states; on a single-state ND chain the upper-bound
    sequences are empty and the basic estimate stands alone.
    """
    nd_case = chain.case is BoundaryCase.ND
    if nd_case:
        sigma, argmax_n = _nd.sigma_p_nd(chain, exponent)
        lower, upper = _nd.basic_bounds_nd(chain, exponent)
    else:
        sigma, argmax_n = _dn.sigma_p_dn(chain, exponent)
        lower, upper = _dn.basic_bounds_dn(chain, exponent)

    have_family = chain.N >= 1 or not nd_case
    if nd_case:
        d1, d1p, dbar1 = _nd.improved_estimates_nd(chain, exponent)
        if iters > 1:
            delta, _ = _nd.delta_seq_nd(chain, exponent, iters)
            if have_family:
                res = _nd.delta_prime_bar_seq_nd(chain, exponent, iters)
                delta_prime, delta_bar = res.delta_prime, res.delta_bar
            else:
                delta_prime, delta_bar = [], []
        else:
            delta = [d1]
            delta_prime = [d1p] if have_family else []
            delta_bar = [dbar1] if have_family else []
    else:
        d1, d1p, dbar1 = _dn.improved_estimates_dn(chain, exponent)
        if iters > 1:
            delta, _ = _dn.delta_seq_dn(chain, exponent, iters)
            delta_prime, delta_bar, _, _ = _dn.delta_prime_bar_seq_dn(chain, exponent, iters)
        else:
            delta, delta_prime, delta_bar = [d1], [d1p], [dbar1]

    certificates = {
        "basic": {"lower": lower, "upper": upper, "source": "sup-of-products"},
        "iterated": {
            "lower": 1.0 / delta[-1],
            "upper": (1.0 / delta_prime[-1]) if delta_prime else None,
            "n": len(delta),
        },
    }
    return BoundsReport(
        sigma_p=sigma,
        argmax_n=argmax_n,
        lower=lower,
        upper=upper,
        delta=delta,
        delta_prime=delta_prime,
        delta_bar=delta_bar,
        certificates=certificates,
    )


def solution_to_dict(sol: EigenSolution, report: VerificationReport | None = None) -> dict:
    out = {
        "lambda": sol.lam,
        "g": np.asarray(sol.g, dtype=float).tolist(),
        "residual": sol.residual,
        "iterations": sol.iterations,
        "bracket": list(sol.bracket),
        "case": sol.case.value,
        "p": sol.p,
    }
    if report is not None:
        out["checks"] = {
            "ok": report.ok,
            "tol": report.tol,
            "detail": {k: dict(v) for k, v in report.checks.items()},
        }
    return out
