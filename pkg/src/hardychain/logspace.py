"""Log-scale helpers for numerically stable weighted prefix/suffix sums.

All positive quantities that can leave the double range (weight products,
powers nu**(1-pstar) at extreme exponents) are carried as natural logs.
Sums of such quantities use logaddexp accumulations; differences of
nearly-equal terms use log1p-based subtraction.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -np.inf


def log_cumsum(log_terms: np.ndarray, axis: int = -1) -> np.ndarray:
    """Prefix sums of exp(log_terms) along ``axis``, returned in log scale."""
    return np.logaddexp.accumulate(log_terms, axis=axis)


def log_cumsum_rev(log_terms: np.ndarray, axis: int = -1) -> np.ndarray:
    """Suffix sums of exp(log_terms) along ``axis``, returned in log scale."""
    flipped = np.flip(log_terms, axis=axis)
    acc = np.logaddexp.accumulate(flipped, axis=axis)
    return np.flip(acc, axis=axis)


def log_sum(log_terms: np.ndarray, axis: int = -1) -> np.ndarray:
    """log(sum(exp(log_terms))) along ``axis``."""
    return np.logaddexp.reduce(log_terms, axis=axis)


def log_sub(log_a, log_b):
    """log(exp(log_a) - exp(log_b)) elementwise, requiring log_a >= log_b.

    Equal inputs (or a tiny negative difference from rounding) map to -inf,
    representing an exact zero difference.
    """
    log_a = np.asarray(log_a, dtype=float)
    log_b = np.asarray(log_b, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        diff = log_b - log_a
        # exp(diff) may round to 1 when the arguments agree to machine precision
        out = log_a + np.log1p(-np.exp(np.minimum(diff, 0.0)))
        out = np.where(np.isneginf(log_b), log_a, out)
        out = np.where(diff >= 0.0, NEG_INF, out)
        out = np.where(np.isneginf(log_a) & np.isneginf(log_b), NEG_INF, out)
    if out.ndim == 0:
        return float(out)
    return out
