"""Submodules, quotients, morphisms and composition factors of differential
systems.

A subspace given by a basis matrix S (independent columns over K) is invariant
for dY/dx = A Y exactly when A*S - dS/dx = S*B for some matrix B over K; B is
then the system induced on the subspace, and gauging by the inverse of any
completion [S | E] puts A in block upper-triangular form with upper-left
block B.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NonFuchsianError
from .ratfunc import ONE, RatFunc, ZERO, is_log_derivative, ratfunc
from .solvers import (
    SolutionSpace,
    hyperexponential_classes,
    is_fuchsian,
    rational_solutions,
)
from .systems import (
    DiffSystem,
    dual,
    gauge,
    hom,
    mat,
    mat_d_x,
    mat_det,
    mat_identity,
    mat_inv,
    mat_mul,
    mat_sub,
    unvec,
    vec,
)


# -- exact linear algebra over K -------------------------------------------------


def k_solve_right(S, C):
    """B with S*B = C for S with independent columns; None when C is not in
    the column span.  Raises on rank-deficient S."""
    S = mat(S)
    C = mat(C)
    n, k = len(S), len(S[0])
    m = len(C[0])
    rows = [list(rs) + list(rc) for rs, rc in zip(S, C)]
    pivots = []
    for col in range(k):
        piv = next(
            (r for r in range(n) if r not in pivots and not rows[r][col].is_zero),
            None,
        )
        if piv is None:
            raise ValueError("rank-deficient subspace basis")
        pivots.append(piv)
        d = rows[piv][col]
        rows[piv] = [v / d for v in rows[piv]]
        for r in range(n):
            if r != piv and not rows[r][col].is_zero:
                f = rows[r][col]
                rows[r] = [v - f * w for v, w in zip(rows[r], rows[piv])]
    for r in range(n):
        if r in pivots:
            continue
        if any(not v.is_zero for v in rows[r][k:]):
            return None
    return tuple(tuple(rows[p][k + j] for j in range(m)) for p in pivots)


def k_nullspace(rows):
    """Basis of the right kernel of a matrix over K (columns as vectors)."""
    rows = [list(r) for r in mat(rows)] if rows else []
    if not rows:
        return []
    m, n = len(rows), len(rows[0])
    pivots = {}
    r = 0
    for col in range(n):
        piv = next(
            (i for i in range(r, m) if not rows[i][col].is_zero), None
        )
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        d = rows[r][col]
        rows[r] = [v / d for v in rows[r]]
        for i in range(m):
            if i != r and not rows[i][col].is_zero:
                f = rows[i][col]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        pivots[col] = r
        r += 1
    basis = []
    for col in range(n):
        if col in pivots:
            continue
        v = [ZERO] * n
        v[col] = ONE
        for pc, pr in pivots.items():
            v[pc] = -rows[pr][col]
        basis.append(v)
    return basis


def column_rank(S):
    S = mat(S)
    return len(S[0]) - len(k_nullspace(S))


def complete_basis(S):
    """An invertible P = [S | standard vectors] extending the columns of S."""
    S = mat(S)
    n, k = len(S), len(S[0])
    cols = [[S[i][j] for i in range(n)] for j in range(k)]
    for e in range(n):
        if len(cols) == n:
            break
        cand = [ONE if i == e else ZERO for i in range(n)]
        trial = cols + [cand]
        Pt = tuple(tuple(c[i] for c in trial) for i in range(n))
        if column_rank(Pt) == len(trial):
            cols.append(cand)
    if len(cols) != n:
        raise ValueError("could not complete basis")
    return tuple(tuple(c[i] for c in cols) for i in range(n))


# -- invariance and sub/quotient --------------------------------------------------


def is_invariant(M: DiffSystem, S):
    """B with A*S - dS/dx = S*B when span(S) is invariant, else None."""
    S = mat(S)
    C = mat_sub(mat_mul(M.A, S), mat_d_x(S))
    return k_solve_right(S, C)


def sub_quotient(M: DiffSystem, S):
    """(B, N, D, P): gauge(M, P^{-1}) = [[B, N], [0, D]] for completion P of S.

    Returns None when span(S) is not invariant."""
    S = mat(S)
    if is_invariant(M, S) is None:
        return None
    P = complete_basis(S)
    k = len(S[0])
    Mt = gauge(M, mat_inv(P))
    n = M.dim
    B = tuple(tuple(Mt.A[i][j] for j in range(k)) for i in range(k))
    N = tuple(tuple(Mt.A[i][j] for j in range(k, n)) for i in range(k))
    D = tuple(tuple(Mt.A[i][j] for j in range(k, n)) for i in range(k, n))
    for i in range(k, n):
        for j in range(k):
            assert Mt.A[i][j].is_zero
    return DiffSystem(B), N, DiffSystem(D), P


def split_extension(M: DiffSystem, S):
    """(complement basis | None, complete flag) for an invariant S.

    The complement exists iff dF/dx = B F - F D - N has a rational solution;
    the returned n x (n-k) basis spans an invariant complement of span(S)."""
    sq = sub_quotient(M, S)
    if sq is None:
        raise ValueError("split_extension requires an invariant subspace")
    B, N, D, P = sq
    k, q = B.dim, D.dim
    # vec(F) column-major: d vecF = (I (x) B - D^T (x) I) vecF - vecN
    from .systems import mat_add, mat_kron, mat_neg, mat_transpose

    coeff = mat_add(
        mat_kron(mat_identity(q), B.A),
        mat_neg(mat_kron(mat_transpose(D.A), mat_identity(k))),
    )
    rhs = [-v for v in vec(N)]
    space = rational_solutions(coeff, rhs)
    if space.particular is None:
        return None, space.complete
    F = unvec(space.particular, k, q)
    # complement columns: P * [[-F], [I]]
    block = tuple(
        tuple(-F[i][j] for j in range(q)) for i in range(k)
    ) + mat_identity(q)
    comp = mat_mul(P, block)
    assert is_invariant(M, comp) is not None
    return comp, space.complete


# -- morphisms ---------------------------------------------------------------------


def morphisms(M1: DiffSystem, M2: DiffSystem) -> SolutionSpace:
    """Basis of matrices U over K with dU/dx = A2 U - U A1."""
    H = hom(M1, M2)
    space = rational_solutions(H)
    reshape = lambda v: unvec(v, M2.dim, M1.dim)
    return SolutionSpace(
        particular=None,
        basis=[reshape(v) for v in space.basis],
        complete=space.complete,
        notes=space.notes,
    )


def isomorphism(M1: DiffSystem, M2: DiffSystem):
    """An invertible morphism M1 -> M2, or None."""
    if M1.dim != M2.dim:
        return None
    space = morphisms(M1, M2)
    if not space.basis:
        return None
    import sympy as sp

    cs = sp.symbols(f"c0:{len(space.basis)}")
    n = M1.dim
    comb = sp.Matrix(
        [
            [
                sum(c * space.basis[b][i][j].expr for b, c in enumerate(cs))
                for j in range(n)
            ]
            for i in range(n)
        ]
    )
    if sp.cancel(comb.det(method="berkowitz")) == 0:
        return None
    # a nonzero det polynomial: search small rational constant combinations
    from itertools import product

    for coeffs in product([1, 0, -1, 2, -2, 3], repeat=len(space.basis)):
        if all(c == 0 for c in coeffs):
            continue
        U = space.basis[0]
        U = tuple(
            tuple(
                sum(
                    (RatFunc(c) * space.basis[b][i][j] for b, c in enumerate(coeffs)),
                    ZERO,
                )
                for j in range(n)
            )
            for i in range(n)
        )
        if not mat_det(U).is_zero:
            return U
    return None


def rank1_isomorphism(a, b):
    """u in K* with du/dx = (b - a) u, i.e. [[a]] isomorphic to [[b]]."""
    out = is_log_derivative(ratfunc(b) - ratfunc(a), 1)
    return out[1] if out else None


# -- composition factors ------------------------------------------------------------


@dataclass(frozen=True)
class FlagCertificate:
    """An increasing chain of invariant subspaces, each a basis matrix."""

    subspaces: tuple
    verified: bool = False

    def verify(self, M: DiffSystem) -> "FlagCertificate":
        prev_dim = 0
        prev = None
        for S in self.subspaces:
            S = mat(S)
            k = len(S[0])
            if not (prev_dim < k <= M.dim):
                raise ValueError("flag dimensions must strictly increase")
            if is_invariant(M, S) is None:
                raise ValueError("flag subspace is not invariant")
            if prev is not None and k_solve_right(S, prev) is None:
                raise ValueError("flag subspaces are not nested")
            prev, prev_dim = S, k
        return FlagCertificate(
            subspaces=tuple(mat(S) for S in self.subspaces), verified=True
        )


@dataclass(frozen=True)
class ModuleDiag:
    """Composition-factor data: gauge(M, P) is block upper triangular with
    the listed diagonal blocks (in triangular order)."""

    blocks: tuple  # of DiffSystem, triangular order (sub first)
    P: tuple       # gauge(M, P) block upper triangular

    @property
    def factors(self):
        """Blocks sorted for deterministic reports: dim, then matrix text."""
        return tuple(
            sorted(self.blocks, key=lambda b: (b.dim, str(b.to_strings())))
        )


def _line_from_classes(M: DiffSystem):
    classes, _ = hyperexponential_classes(M)
    if not classes:
        return None
    classes.sort(key=lambda c: c[0].to_string())
    return classes[0][1].basis[0]


def _decompose_blocks(M: DiffSystem):
    """(blocks, P) with gauge(M, P) block upper triangular, blocks of dim
    <= 2 whenever lines/colines exist."""
    n = M.dim
    if n == 1:
        return [M], mat_identity(1)
    v = _line_from_classes(M)
    if v is not None:
        S = tuple((val,) for val in v)
        B, _, D, P1 = sub_quotient(M, S)
        blocks_d, Pd = _decompose_blocks(D)
        # combined: gauge by diag(1, Pd) after gauge by P1^{-1}
        Q = _block_diag(mat_identity(1), Pd)
        return [B] + blocks_d, mat_mul(Q, mat_inv(P1))
    if n == 2:
        return [M], mat_identity(2)
    # no invariant line: look for a coline (an invariant plane) via the dual
    w = _line_from_classes(dual(M))
    if w is None:
        return [M], mat_identity(n)
    S_cols = k_nullspace([tuple(w)])
    S = tuple(tuple(c[i] for c in S_cols) for i in range(n))
    B, _, D, P1 = sub_quotient(M, S)
    blocks_b, Pb = _decompose_blocks(B)
    Q = _block_diag(Pb, mat_identity(D.dim))
    return blocks_b + [D], mat_mul(Q, mat_inv(P1))


def _block_diag(A, B):
    na, nb = len(A), len(B)
    rows = [list(A[i]) + [ZERO] * nb for i in range(na)]
    rows += [[ZERO] * na + list(B[i]) for i in range(nb)]
    return mat(rows)


def _triangularize_with_cert(M: DiffSystem, cert: FlagCertificate):
    cert = cert.verify(M)
    n = M.dim
    cols = []
    for S in cert.subspaces:
        for j in range(len(S[0])):
            cand = [S[i][j] for i in range(n)]
            trial = cols + [cand]
            Pt = tuple(tuple(c[i] for c in trial) for i in range(n))
            if column_rank(Pt) == len(trial):
                cols.append(cand)
    P = complete_basis(tuple(tuple(c[i] for c in cols) for i in range(n))) \
        if len(cols) < n else tuple(tuple(c[i] for c in cols) for i in range(n))
    dims = [len(S[0]) for S in cert.subspaces]
    if dims[-1] < n:
        dims.append(n)
    Pinv = mat_inv(P)
    Mt = gauge(M, Pinv)
    blocks = []
    start = 0
    for d in dims:
        blocks.append(
            DiffSystem(
                tuple(tuple(Mt.A[i][j] for j in range(start, d))
                      for i in range(start, d))
            )
        )
        start = d
    return blocks, Pinv


def diag_decompose(M: DiffSystem, cert: FlagCertificate = None) -> ModuleDiag:
    """Composition factors of M (dim <= 3), via hyperexponential lines, or a
    supplied invariant flag for non-Fuchsian systems."""
    if M.dim > 3:
        raise ValueError("diag_decompose implemented for dim <= 3")
    if cert is not None:
        blocks, P = _triangularize_with_cert(M, cert)
        # refine any 2-dim block that still has an invariant line
        return _refine(ModuleDiag(blocks=tuple(blocks), P=P))
    try:
        blocks, P = _decompose_blocks(M)
    except NonFuchsianError:
        raise NonFuchsianError(
            "composition-factor search needs simple finite poles; supply a "
            "flag certificate"
        )
    return ModuleDiag(blocks=tuple(blocks), P=P)


def _refine(D: ModuleDiag) -> ModuleDiag:
    """Split 2-dim certificate blocks that do admit invariant lines."""
    out_blocks = []
    trans = []
    changed = False
    for b in D.blocks:
        if b.dim == 2 and is_fuchsian(b):
            sub, Pb = _decompose_blocks(b)
            if len(sub) > 1:
                out_blocks.extend(sub)
                trans.append(Pb)
                changed = True
                continue
        out_blocks.append(b)
        trans.append(mat_identity(b.dim))
    if not changed:
        return D
    Q = trans[0]
    for Tb in trans[1:]:
        Q = _block_diag(Q, Tb)
    return ModuleDiag(blocks=tuple(out_blocks), P=mat_mul(Q, D.P))


def is_simple_2dim(M: DiffSystem) -> bool:
    """A 2-dim system is simple iff it has no hyperexponential line."""
    if M.dim != 2:
        raise ValueError("dimension must be 2")
    return _line_from_classes(M) is None


def semisimplify(M: DiffSystem, diag: ModuleDiag = None):
    """(is_semisimple, P, blocks): when semisimple, gauge(M, P) is the direct
    sum of the irreducible blocks.  Second return is None when undecided
    (incomplete solver)."""
    D = diag if diag is not None else diag_decompose(M)
    if len(D.blocks) == 1:
        return True, mat(D.P), list(D.blocks)
    Mt = gauge(M, D.P)
    k = D.blocks[0].dim
    S = tuple(tuple(ONE if i == j else ZERO for j in range(k))
              for i in range(Mt.dim))
    comp, complete = split_extension(Mt, S)
    if comp is None:
        if not complete:
            return None, None, None
        return False, None, None
    B2 = is_invariant(Mt, comp)
    rest = DiffSystem(B2)
    sub_ok, P2, blocks2 = semisimplify(
        rest, ModuleDiag(blocks=D.blocks[1:], P=mat_identity(rest.dim))
    )
    if sub_ok is not True:
        return sub_ok, None, None
    # assemble: new basis columns [e_1..e_k | comp * P2-transport]
    comp_t = mat_mul(comp, mat_inv(mat(P2)))
    P_cols = tuple(
        tuple(
            (ONE if i == j else ZERO) if j < k else comp_t[i][j - k]
            for j in range(Mt.dim)
        )
        for i in range(Mt.dim)
    )
    P_total = mat_mul(mat_inv(P_cols), mat(D.P))
    return True, P_total, [D.blocks[0]] + blocks2
