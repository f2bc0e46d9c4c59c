"""Differential systems dY/dx = A*Y over Q(t)(x) and the category
constructions on them: direct sum, tensor, dual, Hom, exterior powers,
prolongation, and gauge transformations."""

from __future__ import annotations

from itertools import combinations

from .ratfunc import ONE, RatFunc, ZERO, ratfunc


# -- plain matrix helpers over RatFunc -----------------------------------------


def mat(rows):
    """Coerce a nested list (strings/ints/sympy/RatFunc) into a RatFunc grid."""
    return tuple(tuple(ratfunc(v) for v in row) for row in rows)


def mat_identity(n):
    return tuple(
        tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)
    )


def mat_zero(m, n):
    return tuple(tuple(ZERO for _ in range(n)) for _ in range(m))


def mat_add(A, B):
    return tuple(
        tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B)
    )


def mat_sub(A, B):
    return tuple(
        tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B)
    )


def mat_neg(A):
    return tuple(tuple(-a for a in row) for row in A)


def mat_scale(c, A):
    c = ratfunc(c)
    return tuple(tuple(c * a for a in row) for row in A)


def mat_mul(A, B):
    n = len(B)
    return tuple(
        tuple(
            sum((ra[k] * B[k][j] for k in range(n)), ZERO)
            for j in range(len(B[0]))
        )
        for ra in A
    )


def mat_transpose(A):
    return tuple(tuple(A[i][j] for i in range(len(A))) for j in range(len(A[0])))


def mat_d_x(A):
    return tuple(tuple(a.d_x() for a in row) for row in A)


def mat_d_t(A):
    return tuple(tuple(a.d_t() for a in row) for row in A)


def mat_kron(A, B):
    """Kronecker product; row/column index (i1*rows(B)+i2)."""
    p = len(B)
    q = len(B[0])
    return tuple(
        tuple(A[i1][j1] * B[i2][j2] for j1 in range(len(A[0])) for j2 in range(q))
        for i1 in range(len(A))
        for i2 in range(p)
    )


def mat_is_zero(A):
    return all(v.is_zero for row in A for v in row)


def mat_eq(A, B):
    return len(A) == len(B) and all(
        ra == rb for ra, rb in zip(A, B)
    )


def mat_inv(A):
    """Inverse over Q(t)(x) by Gauss-Jordan; raises on a singular matrix."""
    n = len(A)
    work = [list(row) for row in A]
    inv = [list(row) for row in mat_identity(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not work[r][col].is_zero), None)
        if piv is None:
            raise ValueError("singular matrix")
        work[col], work[piv] = work[piv], work[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        d = work[col][col]
        work[col] = [v / d for v in work[col]]
        inv[col] = [v / d for v in inv[col]]
        for r in range(n):
            if r != col and not work[r][col].is_zero:
                f = work[r][col]
                work[r] = [v - f * w for v, w in zip(work[r], work[col])]
                inv[r] = [v - f * w for v, w in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


def mat_det(A):
    n = len(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    out = ZERO
    for j in range(n):
        minor = tuple(row[:j] + row[j + 1:] for row in A[1:])
        term = A[0][j] * mat_det(minor)
        out = out + term if j % 2 == 0 else out - term
    return out


def vec(U):
    """Column-stacked vector of a matrix (column-major)."""
    m, n = len(U), len(U[0])
    return tuple(U[i][j] for j in range(n) for i in range(m))


def unvec(v, m, n):
    return tuple(tuple(v[j * m + i] for j in range(n)) for i in range(m))


# -- differential systems ------------------------------------------------------


class DiffSystem:
    """An n x n matrix A over Q(t)(x), read as the system dY/dx = A*Y."""

    __slots__ = ("A",)

    def __init__(self, rows):
        A = mat(rows)
        if any(len(row) != len(A) for row in A):
            raise ValueError("system matrix must be square")
        self.A = A

    @property
    def dim(self) -> int:
        return len(self.A)

    def entry(self, i, j) -> RatFunc:
        return self.A[i][j]

    def __eq__(self, other):
        return isinstance(other, DiffSystem) and mat_eq(self.A, other.A)

    def __hash__(self):
        return hash(self.A)

    def __repr__(self):
        rows = "; ".join(
            ", ".join(v.to_string() for v in row) for row in self.A
        )
        return f"DiffSystem[{rows}]"

    def to_strings(self):
        return [[v.to_string() for v in row] for row in self.A]


def direct_sum(M1: DiffSystem, M2: DiffSystem) -> DiffSystem:
    n1, n2 = M1.dim, M2.dim
    rows = [
        list(M1.A[i]) + [ZERO] * n2 for i in range(n1)
    ] + [
        [ZERO] * n1 + list(M2.A[i]) for i in range(n2)
    ]
    return DiffSystem(rows)


def tensor(M1: DiffSystem, M2: DiffSystem) -> DiffSystem:
    I1 = mat_identity(M1.dim)
    I2 = mat_identity(M2.dim)
    return DiffSystem(mat_add(mat_kron(M1.A, I2), mat_kron(I1, M2.A)))


def dual(M: DiffSystem) -> DiffSystem:
    return DiffSystem(mat_neg(mat_transpose(M.A)))


def hom(M1: DiffSystem, M2: DiffSystem) -> DiffSystem:
    """Hom(M1, M2) = dual(M1) (x) M2; solutions are the morphisms M1 -> M2."""
    return tensor(dual(M1), M2)


def wedge(M: DiffSystem, k: int) -> DiffSystem:
    """k-th exterior power: the k-th additive compound matrix."""
    n = M.dim
    if not 1 <= k <= n:
        raise ValueError(f"wedge power {k} out of range for dim {n}")
    idx = list(combinations(range(n), k))
    A = M.A
    rows = []
    for I in idx:
        row = []
        for J in idx:
            if I == J:
                row.append(sum((A[i][i] for i in I), ZERO))
                continue
            dI = [i for i in I if i not in J]
            dJ = [j for j in J if j not in I]
            if len(dI) != 1:
                row.append(ZERO)
                continue
            i, j = dI[0], dJ[0]
            sign = (-1) ** (I.index(i) + J.index(j))
            row.append(A[i][j] if sign == 1 else -A[i][j])
        rows.append(row)
    return DiffSystem(rows)


def prolong(M: DiffSystem) -> DiffSystem:
    """First prolongation: the block system [[A, dA/dt], [0, A]]."""
    n = M.dim
    dA = mat_d_t(M.A)
    rows = [
        list(M.A[i]) + list(dA[i]) for i in range(n)
    ] + [
        [ZERO] * n + list(M.A[i]) for i in range(n)
    ]
    return DiffSystem(rows)


def gauge(M: DiffSystem, P) -> DiffSystem:
    """Basis change Z = P*Y: returns P A P^{-1} + (dP/dx) P^{-1}."""
    P = mat(P)
    Pinv = mat_inv(P)
    return DiffSystem(
        mat_add(mat_mul(mat_mul(P, M.A), Pinv), mat_mul(mat_d_x(P), Pinv))
    )
