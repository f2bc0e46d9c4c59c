"""Small exact linear algebra over Q(t), via sympy DomainMatrix rref."""

from __future__ import annotations

import sympy as sp
from sympy.polys.matrices import DomainMatrix

from .ratfunc import COEFF_FIELD


def _dom(v):
    return COEFF_FIELD.from_sympy(sp.cancel(sp.sympify(v)))


def _sym(v):
    return COEFF_FIELD.to_sympy(v)


def _identity(n):
    return [[sp.S.One if i == j else sp.S.Zero for j in range(n)]
            for i in range(n)]


def _kernel_from_rref(R, pivots, n):
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [sp.S.Zero] * n
        v[f] = sp.S.One
        for r, p in enumerate(pivots):
            if p < n:
                v[p] = sp.cancel(-_sym(R[r, f].element))
        basis.append(v)
    return basis


def solve_affine(A, b):
    """All solutions of A v = b over Q(t).

    A: list of rows of sympy exprs in t, b: list.  Returns (particular,
    kernel_basis); particular is None when the system is inconsistent.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return [sp.S.Zero] * n, _identity(n)
    aug = [[_dom(v) for v in row] + [_dom(b[i])] for i, row in enumerate(A)]
    M = DomainMatrix(aug, (m, n + 1), COEFF_FIELD)
    R, pivots = M.rref()
    pivots = list(pivots)
    if n in pivots:
        return None, _kernel_from_rref(R, [p for p in pivots if p < n], n)
    part = [sp.S.Zero] * n
    for r, p in enumerate(pivots):
        part[p] = sp.cancel(_sym(R[r, n].element))
    return part, _kernel_from_rref(R, pivots, n)


def nullspace(A):
    """Kernel basis of A over Q(t); entries are sympy exprs."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0 or n == 0:
        return _identity(n)
    M = DomainMatrix([[_dom(v) for v in row] for row in A], (m, n), COEFF_FIELD)
    R, pivots = M.rref()
    return _kernel_from_rref(R, list(pivots), n)


def rank(A) -> int:
    m = len(A)
    if m == 0 or not A[0]:
        return 0
    n = len(A[0])
    M = DomainMatrix([[_dom(v) for v in row] for row in A], (m, n), COEFF_FIELD)
    return len(M.rref()[1])
