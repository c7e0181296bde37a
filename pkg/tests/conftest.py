"""Shared fixtures: the random chain corpus used across the suite.

The corpus is fixed by seed so every test run sees the same 400 chains
(200 draws, both boundary cases each).  Solutions are cached per session
because several invariants are checked against the same eigenpairs.
"""

from __future__ import annotations

import numpy as np
import pytest

import hardychain as hc

CORPUS_SEED = 12345
CORPUS_TRIALS = 200
P_SET = (1.2, 1.5, 2.0, 3.0, 5.0, 10.0)

EXPONENTS = {p: hc.Exponent.from_p(p) for p in P_SET}


def make_corpus(seed: int = CORPUS_SEED, trials: int = CORPUS_TRIALS):
    """200 random sizes N in [1, 60]; for each, one ND and one DN chain with
    log-uniform weights in [1e-3, 1e3]."""
    rng = np.random.default_rng(seed)
    chains = []
    for _ in range(trials):
        N = int(rng.integers(1, 61))
        for case in ("nd", "dn"):
            size = N + 1 if case == "nd" else N
            mu = 10.0 ** rng.uniform(-3.0, 3.0, size)
            nu = 10.0 ** rng.uniform(-3.0, 3.0, size)
            chains.append(hc.make_chain(case, mu, nu))
    return chains


@pytest.fixture(scope="session")
def corpus():
    return make_corpus()


@pytest.fixture(scope="session")
def corpus_solutions(corpus):
    """Eigenpairs for every corpus chain at every exponent in P_SET."""
    out = {}
    for i, chain in enumerate(corpus):
        for p in P_SET:
            out[i, p] = hc.solve(chain, EXPONENTS[p])
    return out
