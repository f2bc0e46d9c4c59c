"""Shared helpers for the test suite: deterministic random Fuchsian systems."""

import random

import sympy as sp

from pdgal3.ratfunc import RatFunc, t, x
from pdgal3.systems import DiffSystem

#: denominators used by the randomized Fuchsian generators
FUCHSIAN_DENS = [x, x + 1, x - 1, x - t]


def random_fuchsian(rng: random.Random, n: int) -> DiffSystem:
    """An n x n system whose entries are sums c*p/q with q in FUCHSIAN_DENS.

    Every finite singularity is a simple pole and infinity is regular or
    regular-singular (entries are proper).
    """
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            val = sp.S.Zero
            for _ in range(rng.randint(0, 2)):
                num = rng.randint(-3, 3) + rng.randint(-1, 1) * t
                den = rng.choice(FUCHSIAN_DENS)
                val += num / den
            row.append(RatFunc(val))
        rows.append(row)
    return DiffSystem(rows)


def random_invertible(rng: random.Random, n: int):
    """A random invertible n x n matrix over Q(t)(x) (unit determinant by
    construction: product of elementary matrices)."""
    from pdgal3.systems import mat, mat_identity, mat_mul

    P = mat_identity(n)
    entries = [sp.S.One, x, t, x - t, x + 1, sp.S.One + t * x]
    for _ in range(2 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        E = [[sp.S.One if a == b else sp.S.Zero for b in range(n)] for a in range(n)]
        E[i][j] = rng.choice(entries) * rng.randint(-2, 2)
        P = mat_mul(mat(E), P)
    return P
