"""Shared oracles. These rebuild every object from scalar definitions so they
share no code path with the vectorized library routines they check."""
import itertools

import numpy as np
import pytest

from bitmasked.expander import ExpanderParams, LayeredExpander, sample_expander
from bitmasked.field import GF2, PrimeField

# acceptance lines, keyed by criterion
ACCEPTANCE_KEY = pytest.StashKey[dict]()


def dense_parity_check(g, lam):
    """Explicit (D*M + D*M*lam) x N parity-check matrix in the normative row order."""
    N, D, M = g.N, g.D, g.M
    H = np.zeros((D * M * (1 + lam), N), dtype=np.int64)
    for j in range(N):
        for s in range(D):
            q = g.neighbor(j, s)
            H[s * M + q, j] = 1
            for t in range(lam):
                H[D * M + s * M * lam + q * lam + t, j] = (j >> t) & 1
    return H


def oracle_syndrome(H, x, p, D, M, lam):
    """Python-int product H.x mod p split into (plain, masked) blocks."""
    x = [int(v) for v in x]
    rows = [sum(h * v for h, v in zip(row.tolist(), x) if h) % p for row in H]
    plain = np.array(rows[: D * M], dtype=np.int64).reshape(D, M)
    masked = np.array(rows[D * M:], dtype=np.int64).reshape(D, M, lam)
    return plain, masked


def neighborhood_recount(g, S):
    """|Gamma(S)| counted as a set of (layer, row) pairs."""
    return len({(s, g.neighbor(j, s)) for j in S for s in range(g.D)})


def expansion_recount(g, K, eps):
    """Second enumeration, largest subsets first, using exact rational comparison."""
    from fractions import Fraction

    eps = Fraction(eps)
    for k in range(K, 0, -1):
        for S in itertools.combinations(range(g.N - 1, -1, -1), k):
            if neighborhood_recount(g, S) < (1 - eps) * g.D * k:
                return False
    return True


def find_verified_graph(N, D, M, K, eps, start=0, limit=500):
    from bitmasked.expander import verify_expansion_bruteforce

    params = ExpanderParams(N, D, M, K, eps)
    for seed in range(start, start + limit):
        g = sample_expander(params, seed)
        if verify_expansion_bruteforce(g, K, eps):
            return g
    raise RuntimeError("no expanding graph found")


def table_graph(rows, M, K=1, eps=0.25):
    table = np.asarray(rows, dtype=np.int32)
    N, D = table.shape
    return LayeredExpander(ExpanderParams(N, D, M, K, eps), table)


@pytest.fixture(params=[GF2(), PrimeField(7), PrimeField(257)], ids=lambda f: f.tag)
def any_field(request):
    return request.param


@pytest.fixture(scope="session")
def small_graph():
    """N=32, D=16, M=16 graph verified for K=2, eps=1/4."""
    return find_verified_graph(32, 16, 16, 2, 0.25)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for name in sorted(lines, key=lambda n: int(n[1:])):
            terminalreporter.write_line(lines[name])
