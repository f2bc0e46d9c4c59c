"""Constancy testing, residue telescoping, rank-1 groups, character lattices.

The telescoper of f ∈ K = Q(t)(x) is the minimal monic L ∈ Q(t)[δ] with
L(f) ∈ ∂K.  Since an element of K is a ∂-derivative iff all its x-residues
vanish, and taking residues commutes with δ (with the induced action on the
residue elements of each squarefree pole block), L is the joint minimal
annihilator of the residue elements of f.
"""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp
from sympy import Poly

from .errors import IncompleteSearchError
from .groups import Named
from .linalg import solve_affine
from .oreops import IDENTITY_OP, OreOp, minimal_annihilator
from .ratfunc import (
    RatFunc,
    ZERO,
    _poly,
    d_t,
    horowitz_reduce,
    is_log_derivative,
    irreducible_factors,
    ratfunc,
    residues,
    t,
    x,
)
from .systems import (
    DiffSystem,
    mat_d_t,
    mat_identity,
    mat_kron,
    mat_sub,
    mat_transpose,
    unvec,
    vec,
)


# -- constancy -------------------------------------------------------------------


@dataclass(frozen=True)
class ConstancyWitness:
    """B with ∂B − δA = AB − BA for the source system A."""

    B: tuple

    def verify(self, M: DiffSystem) -> bool:
        A = M.A
        n = M.dim
        for i in range(n):
            for j in range(n):
                lhs = self.B[i][j].d_x() - A[i][j].d_t()
                rhs = sum(
                    (A[i][k] * self.B[k][j] - self.B[i][k] * A[k][j] for k in range(n)),
                    ZERO,
                )
                if lhs != rhs:
                    return False
        return True


def is_constant(M: DiffSystem, bound: int = 10):
    """Witness B solving ∂B = AB − BA + δA, or None when provably absent.

    Raises IncompleteSearchError when the bounded search finds nothing but is
    not provably complete.
    """
    from .solvers import rational_solutions

    n = M.dim
    eye = mat_identity(n)
    coeff = mat_sub(mat_kron(eye, M.A), mat_kron(mat_transpose(M.A), eye))
    rhs = vec(mat_d_t(M.A))
    space = rational_solutions(coeff, rhs, bound=bound)
    if space.particular is None:
        if space.complete:
            return None
        raise IncompleteSearchError(
            "constancy search not provably complete: " + "; ".join(space.notes)
        )
    w = ConstancyWitness(B=tuple(tuple(r) for r in unvec(space.particular, n, n)))
    if not w.verify(M):
        raise RuntimeError("constancy witness failed verification")
    return w


# -- telescoper -------------------------------------------------------------------


class _ResidueBlock:
    """Residue element of one squarefree pole block, with the induced
    δ-action δρ = ρ_t − ρ_x · p_t · p_x⁻¹ (mod p)."""

    def __init__(self, pole: Poly, residue: Poly):
        self.pole = pole
        self.deg = pole.degree()
        px = pole.diff()
        self._pt = _poly(pole.as_expr().diff(t), x)
        self._inv_px = px.invert(pole)
        self.residue = residue

    def coords(self, rho: Poly):
        return [rho.nth(k) for k in range(self.deg)]

    def delta(self, rho: Poly) -> Poly:
        rho_t = _poly(rho.as_expr().diff(t), x)
        rho_x = rho.diff()
        return (rho_t - rho_x * self._pt * self._inv_px).rem(self.pole)


def _residue_blocks(f) -> list[_ResidueBlock]:
    return [_ResidueBlock(r.pole, r.residue) for r in residues(f)]


def telescoper(f, max_order: int = 4):
    """Minimal monic L ∈ Q(t)[δ] of order ≤ max_order with L(f) ∈ ∂K, else None."""
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    f = ratfunc(f)
    blocks = _residue_blocks(f)
    if not blocks:
        return IDENTITY_OP
    state = [b.residue for b in blocks]

    def joint_coords(st):
        out = []
        for b, rho in zip(blocks, st):
            out.extend(b.coords(rho))  # Poly.nth returns sympy exprs in t
        return out

    def joint_delta(st):
        return [b.delta(rho) for b, rho in zip(blocks, st)]

    # iterate δ on the joint residue vector and look for the first linear
    # dependence over Q(t)
    iters = [state]
    for _ in range(max_order):
        iters.append(joint_delta(iters[-1]))
    rows = [joint_coords(st) for st in iters]
    ncoord = len(rows[0])
    for h in range(0, max_order + 1):
        # c_0 row_0 + ... + c_{h-1} row_{h-1} + row_h = 0
        A = [[rows[j][k] for j in range(h)] for k in range(ncoord)]
        bvec = [sp.expand(-rows[h][k]) for k in range(ncoord)]
        if h == 0:
            if all(v == 0 for v in bvec):
                return IDENTITY_OP
            continue
        part, _ = solve_affine(A, bvec)
        if part is not None:
            return OreOp(tuple(part) + (sp.S.One,))
    return None


# -- rank-1 groups ----------------------------------------------------------------


def rank1_group(a, max_order: int = 4) -> Named:
    """The parameterized Galois group of ∂y = a·y as a subgroup of GL₁."""
    a = ratfunc(a)
    hit = is_log_derivative(a, 64)
    if hit is not None:
        m, r = hit
        return Named(
            dim=1,
            family="finite-cyclic",
            data={"order": m, "witness": r},
        )
    L = telescoper(d_t(a), max_order)
    if L is not None:
        return Named(dim=1, family="rank1-delta", data={"op": L})
    return Named(dim=1, family="GL", flags=("bound-limited",))


# -- character lattices ------------------------------------------------------------


@dataclass(frozen=True)
class CharacterLattice:
    """Lattice of m ∈ Zⁿ with Σ mᵢaᵢ = ∂r/r for some r ∈ K, with witnesses."""

    n: int
    generators: tuple  # tuple of integer tuples, Hermite normal form
    witnesses: tuple  # RatFunc r per generator
    m_bound: int
    flags: tuple = ()

    def contains(self, m) -> bool:
        """Exact membership via the generator matrix (solve over Q, check Z)."""
        if not self.generators:
            return all(v == 0 for v in m)
        G = sp.Matrix(self.generators).T
        try:
            sol, params = G.gauss_jordan_solve(sp.Matrix([int(v) for v in m]))
        except ValueError:
            return False
        sol = sol.subs({p: 0 for p in params})
        return all(v.is_integer for v in sol) and list(G * sol) == [
            sp.Integer(v) for v in m
        ]


def integer_kernel(rows):
    """Basis of the saturated integer kernel {z ∈ Zⁿ : Mz = 0} via unimodular
    column reduction."""
    M = sp.Matrix([[sp.Integer(v) for v in row] for row in rows])
    n = M.cols
    V = sp.eye(n)
    col = 0
    for row in range(M.rows):
        if col >= n:
            break
        while True:
            nz = [j for j in range(col, n) if M[row, j] != 0]
            if not nz:
                break
            j0 = min(nz, key=lambda j: abs(M[row, j]))
            if j0 != col:
                M.col_swap(col, j0)
                V.col_swap(col, j0)
            a = M[row, col]
            others = [j for j in range(col + 1, n) if M[row, j] != 0]
            if not others:
                col += 1
                break
            for j in others:
                q = M[row, j] // a
                M[:, j] -= q * M[:, col]
                V[:, j] -= q * V[:, col]
    return [tuple(V[:, j]) for j in range(col, n)]


def _hnf_rows(gens):
    """Row-style Hermite normal form of a generator list (deterministic basis)."""
    if not gens:
        return ()
    from sympy.matrices.normalforms import hermite_normal_form

    G = sp.Matrix([list(g) for g in gens])
    # hermite_normal_form works on columns; transpose to normalize rows
    H = hermite_normal_form(G.T).T
    rows = [tuple(int(v) for v in H.row(i)) for i in range(H.rows)]
    rows = [r for r in rows if any(r)]
    # sign-normalize each row: first nonzero entry positive
    out = []
    for r in rows:
        lead = next(v for v in r if v)
        out.append(tuple(-v for v in r) if lead < 0 else r)
    return tuple(sorted(out))


def _qt_linear_rows(values):
    """Q-linear conditions Σ mᵢ·vᵢ = 0 for vᵢ ∈ Q(t)[x]: clear denominators
    and read off coefficient rows indexed by monomials x^a t^b."""
    exprs = [sp.together(sp.sympify(v)) for v in values]
    dens = [sp.fraction(e)[1] for e in exprs]
    den = sp.lcm(dens) if dens else sp.S.One
    cleared = [sp.expand(sp.cancel(e * den)) for e in exprs]
    monomap = {}
    cols = []
    for e in cleared:
        if e == 0:
            cols.append({})
            continue
        p = sp.Poly(e, x, t)
        cols.append({mon: c for mon, c in zip(p.monoms(), p.coeffs())})
        for mon in p.monoms():
            monomap.setdefault(mon, len(monomap))
    rows = []
    for mon in monomap:
        rows.append([sp.Rational(c.get(mon, 0)) for c in cols])
    return rows


def _t_const_part(e):
    """Q-linear projection Q(t) → Q: constant term of the polynomial part."""
    e = sp.cancel(sp.sympify(e))
    num, den = sp.fraction(sp.together(e))
    pnum = sp.Poly(num, t)
    pden = sp.Poly(den, t)
    quo = pnum.div(pden)[0]
    return sp.Rational(quo.nth(0)) if quo.degree() >= 0 else sp.S.Zero


def character_lattice(diag, m_bound: int = 12) -> CharacterLattice:
    """All m ∈ Zⁿ with Σ mᵢaᵢ a logarithmic ∂-derivative, with witnesses.

    The computation is exact: Q-linear residue conditions plus integrality
    congruences are solved by a saturated integer-kernel computation.  m_bound
    is echoed for reporting; it never truncates the lattice.
    """
    entries = [ratfunc(a) for a in diag]
    n = len(entries)
    flags = ()

    reduced = [horowitz_reduce(a) for a in entries]
    # Q-linear conditions: the ∂-exact part g and the polynomial part must
    # cancel Q-linearly (both lie in complements of the log-derivative image).
    qrows = []
    qrows.extend(_qt_linear_rows([g.expr for g, _, _ in reduced]))
    qrows.extend(_qt_linear_rows([p.as_expr() for _, p, _ in reduced]))

    # residue conditions per irreducible pole factor
    hs = [h for _, _, h in reduced]
    all_factors = {}
    for h in hs:
        if h.is_zero:
            continue
        for f in irreducible_factors(h.denominator):
            all_factors[f.as_expr()] = f
    cong_rows = []  # rational rows whose pairing with m must be an integer
    factor_list = sorted(all_factors, key=sp.default_sort_key)
    for fe in factor_list:
        f = all_factors[fe]
        consts = []
        rests = []
        for h in hs:
            rho = _entry_block_residue(h, f)
            c = _t_const_part(rho.nth(0)) if rho.degree() >= 0 else sp.S.Zero
            consts.append(c)
            rests.append(sp.expand(rho.as_expr() - c))
        qrows.extend(_qt_linear_rows(rests))
        cong_rows.append(consts)

    # assemble integer system: R m = 0 and C m ∈ Z^s  ⇔  [R 0; D·C  -D·I](m,w)=0
    def _int_rows(rows):
        out = []
        for r in rows:
            den = sp.ilcm(*[sp.Rational(v).q for v in r]) if r else 1
            row = [int(sp.Rational(v) * den) for v in r]
            if any(row):
                out.append(row)
        return out

    R = _int_rows(qrows)
    s = len(cong_rows)
    big = []
    for r in R:
        big.append(r + [0] * s)
    for i, c in enumerate(cong_rows):
        den = sp.ilcm(*[sp.Rational(v).q for v in c]) if c else 1
        row = [int(sp.Rational(v) * den) for v in c]
        tail = [0] * s
        tail[i] = -int(den)
        big.append(row + tail)
    if not big:
        big = [[0] * (n + s)]
    kernel = integer_kernel(big)
    gens = _hnf_rows([k[:n] for k in kernel])

    witnesses = []
    for m in gens:
        r = _lattice_witness(entries, reduced, m)
        if r is None or not _witness_ok(entries, m, r):
            raise RuntimeError(f"lattice generator {m} failed witness verification")
        witnesses.append(r)
    return CharacterLattice(
        n=n,
        generators=gens,
        witnesses=tuple(witnesses),
        m_bound=m_bound,
        flags=flags,
    )


def _entry_block_residue(h: RatFunc, f: Poly) -> Poly:
    """Residue element of the proper squarefree-denominator part h at the
    irreducible factor f (zero when f does not divide the denominator)."""
    if h.is_zero:
        return _poly(0, x)
    num, den = h.monic_pair()
    _, r = den.div(f)
    if not r.is_zero:
        return _poly(0, x)
    dden = den.diff()
    return (num * dden.invert(f)).rem(f)


def _lattice_witness(entries, reduced, m):
    """r with Σ mᵢaᵢ = ∂r/r: product of pole factors to their residue powers."""
    total = sum((int(mi) * a for mi, a in zip(m, entries)), ZERO)
    if total.is_zero:
        return RatFunc(1)
    _, _, h = horowitz_reduce(total)
    if h.is_zero:
        return None
    r = RatFunc(1)
    for f in irreducible_factors(h.denominator):
        rho = _entry_block_residue(h, f)
        if rho.degree() > 0:
            return None
        nu = sp.cancel(rho.nth(0)) if rho.degree() == 0 else sp.S.Zero
        if nu.free_symbols or not sp.Rational(nu).is_integer:
            return None
        r = r * RatFunc(f.as_expr()) ** int(sp.Rational(nu))
    return r


def _witness_ok(entries, m, r) -> bool:
    total = sum((int(mi) * a for mi, a in zip(m, entries)), ZERO)
    return (total * r - r.d_x()).is_zero
