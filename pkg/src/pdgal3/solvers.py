"""Rational and hyperexponential solutions of dY/dx = A Y + b over Q(t)(x).

Complete answers are produced for systems with simple finite poles and a
regular or regular-singular point at infinity (universal denominator from
integer local exponents, polynomial degree from exponents at infinity);
anything else falls back to a configured bound with complete=False.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp
from sympy import Poly

from .errors import NonFuchsianError
from .linalg import solve_affine
from .ratfunc import (
    COEFF_FIELD,
    RatFunc,
    ZERO,
    _poly,
    factor_list_xt,
    is_log_derivative,
    ratfunc,
    t,
    x,
)
from .systems import DiffSystem, mat_identity


@dataclass
class SolutionSpace:
    """Rational solutions of one linear system: a particular solution (None
    when the system is inconsistent) plus a basis of the homogeneous space."""

    particular: object  # list[RatFunc] | None
    basis: list
    complete: bool
    notes: tuple = ()

    @property
    def dim(self) -> int:
        return len(self.basis)


# -- local data at the singularities -------------------------------------------


def _den_factor_dict(values):
    """Irreducible monic factors of all denominators, with max multiplicity."""
    out = {}
    for v in values:
        den = ratfunc(v).denominator
        if den.degree() == 0:
            continue
        for fac, e in factor_list_xt(den.as_expr())[1]:
            fp = _poly(fac, x)
            if fp.degree() == 0:
                continue
            fp = fp.monic()
            out[fp] = max(out.get(fp, 0), e)
    return out


def _entry_residue(v: RatFunc, f: Poly):
    """Residue element of v at the simple factor f, in Q(t)[x]/(f)."""
    num, den = v.monic_pair()
    g, r = den.div(f)
    if not r.is_zero:
        return Poly(0, x, domain=COEFF_FIELD)
    return (num.rem(f) * g.invert(f)).rem(f)


def _qt_roots_in_lambda(expr, lam):
    """Roots in Q(t) of a polynomial in lam with Q(t) coefficients."""
    num = sp.together(sp.cancel(expr))
    num = sp.fraction(num)[0]
    num = sp.expand(num)
    if num == 0:
        return []
    roots = []
    for fac, _ in sp.factor_list(num, lam, t)[1]:
        p = Poly(fac, lam)
        if p.degree() == 1:
            c1, c0 = p.all_coeffs()
            roots.append(sp.cancel(-sp.sympify(c0) / sp.sympify(c1)))
    return roots


def _residue_eigen_candidates(A, f: Poly):
    """(Q(t) candidates, integer candidates) for local exponents at f."""
    n = len(A)
    lam = sp.Dummy("lam")
    R = sp.Matrix(
        [[_entry_residue(A[i][j], f).as_expr() for j in range(n)] for i in range(n)]
    )
    cp = (lam * sp.eye(n) - R).det(method="berkowitz")
    res = sp.resultant(f.as_expr(), sp.together(cp), x) if f.degree() > 0 else cp
    qt = _qt_roots_in_lambda(res, lam)
    ints = sorted({int(r) for r in qt if r.is_Integer})
    return qt, ints


def _infinity_data(A):
    """(omega, leading matrix at infinity as sympy Matrix over Q(t)).

    omega is the growth order of A at infinity (entry degrees); the matrix is
    the coefficient of x^omega.
    """
    n = len(A)
    degs = []
    for row in A:
        for v in row:
            if v.is_zero:
                continue
            num, den = v.monic_pair()
            degs.append(num.degree() - den.degree())
    if not degs:
        return -1, sp.zeros(n, n)
    omega = max(degs)
    M = sp.zeros(n, n)
    for i in range(n):
        for j in range(n):
            v = A[i][j]
            if v.is_zero:
                continue
            num, den = v.monic_pair()
            if num.degree() - den.degree() == omega:
                M[i, j] = sp.cancel(sp.sympify(num.LC()))
    return omega, M


def _int_eigenvalues(M):
    lam = sp.Dummy("lam")
    cp = (lam * sp.eye(M.rows) - M).det(method="berkowitz")
    return sorted({int(r) for r in _qt_roots_in_lambda(cp, lam) if r.is_Integer})


def _degree_at_infinity(v: RatFunc):
    if v.is_zero:
        return None
    num, den = v.monic_pair()
    return num.degree() - den.degree()


# -- the solver ----------------------------------------------------------------


def rational_solutions(A, b=None, bound=10) -> SolutionSpace:
    """All rational solutions of dY/dx = A Y + b.

    A: DiffSystem or nested list; b: vector (list) or None for homogeneous.
    Complete for simple finite poles and regular(-singular) infinity, else a
    bounded search flagged complete=False.
    """
    if isinstance(A, DiffSystem):
        A = A.A
    A = tuple(tuple(ratfunc(v) for v in row) for row in A)
    n = len(A)
    bvec = (
        [ZERO] * n if b is None else [ratfunc(v) for v in b]
    )
    b_zero = all(v.is_zero for v in bvec)

    flat_A = [v for row in A for v in row]
    factors_A = _den_factor_dict(flat_A)
    factors_b = _den_factor_dict(bvec)
    all_factors = sorted(
        set(factors_A) | set(factors_b), key=lambda f: sp.default_sort_key(f.as_expr())
    )

    fuchsian_finite = all(e <= 1 for e in factors_A.values())
    omega, lead = _infinity_data(A)
    notes = []

    complete = True
    if fuchsian_finite and omega <= -1:
        # universal denominator from integer local exponents
        den_exp = {}
        for f in all_factors:
            ints = (
                _residue_eigen_candidates(A, f)[1] if f in factors_A else []
            )
            ob = factors_b.get(f, 0)
            e = max(0, (-min(ints)) if ints else 0, ob - 1)
            den_exp[f] = e
        # degree bound from exponents at infinity
        cands = list(_int_eigenvalues(_residue_at_infinity(A)))
        bdegs = [_degree_at_infinity(v) for v in bvec]
        bdegs = [d for d in bdegs if d is not None]
        if bdegs:
            cands.append(max(bdegs) + 1)
        d_max = max(cands) if cands else None
    elif fuchsian_finite and omega >= 0 and lead.det(method="berkowitz") != 0:
        # irregular infinity with invertible leading matrix: degrees are
        # capped by the inhomogeneous term alone
        den_exp = {}
        for f in all_factors:
            ints = (
                _residue_eigen_candidates(A, f)[1] if f in factors_A else []
            )
            ob = factors_b.get(f, 0)
            den_exp[f] = max(0, (-min(ints)) if ints else 0, ob - 1)
        bdegs = [_degree_at_infinity(v) for v in bvec]
        bdegs = [d for d in bdegs if d is not None]
        d_max = (max(bdegs) - omega) if bdegs else None
        notes.append("irregular-infinity-invertible-leading-matrix")
    else:
        complete = False
        notes.append("bound-limited")
        den_exp = {f: bound for f in all_factors}
        d_max = bound

    d_u = _poly(1, x)
    for f, e in den_exp.items():
        if e > 0:
            d_u = d_u * f**e
    du_rf = RatFunc(d_u.as_expr())
    if d_max is None:
        ndeg = -1
    else:
        ndeg = d_u.degree() + d_max

    if ndeg < 0:
        if b_zero:
            return SolutionSpace(
                particular=[ZERO] * n, basis=[], complete=complete,
                notes=tuple(notes),
            )
        return SolutionSpace(
            particular=None, basis=[], complete=complete, notes=tuple(notes)
        )

    # ansatz Y = (sum_k c_k x^k) / d_u; columns of the linear map c -> dY - AY
    cols = []
    col_vals = []
    for i in range(n):
        for k in range(ndeg + 1):
            y = RatFunc(x**k) / du_rf
            resid = [None] * n
            dy = y.d_x()
            for r in range(n):
                resid[r] = (dy if r == i else ZERO) - A[r][i] * y
            cols.append((i, k))
            col_vals.append(resid)

    # clear denominators globally
    cden = _poly(1, x)
    for vecvals in col_vals:
        for v in vecvals:
            cden = cden.lcm(v.denominator)
    for v in bvec:
        cden = cden.lcm(v.denominator)
    cden_rf = RatFunc(cden.as_expr())

    cleared_cols = []
    maxdeg = 0
    for vecvals in col_vals:
        cleared = []
        for v in vecvals:
            p = (v * cden_rf).numerator
            cleared.append(p)
            maxdeg = max(maxdeg, p.degree())
        cleared_cols.append(cleared)
    cleared_b = []
    for v in bvec:
        p = (v * cden_rf).numerator
        cleared_b.append(p)
        maxdeg = max(maxdeg, p.degree())

    rows = []
    rhs = []
    for r in range(n):
        for d in range(maxdeg + 1):
            rows.append([col[r].nth(d) for col in cleared_cols])
            rhs.append(cleared_b[r].nth(d))
    part, kern = solve_affine(rows, rhs)

    def to_vec(coeffs):
        out = []
        for i in range(n):
            num = sum(
                sp.sympify(coeffs[i * (ndeg + 1) + k]) * x**k
                for k in range(ndeg + 1)
            )
            out.append(RatFunc(num) / du_rf)
        return out

    basis = [to_vec(v) for v in kern]
    particular = None
    if part is not None:
        particular = to_vec(part) if not b_zero else [ZERO] * n
    elif b_zero:
        particular = [ZERO] * n
    return SolutionSpace(
        particular=particular, basis=basis, complete=complete, notes=tuple(notes)
    )


def _residue_at_infinity(A):
    """Coefficient of 1/x at infinity (requires proper entries)."""
    n = len(A)
    M = sp.zeros(n, n)
    for i in range(n):
        for j in range(n):
            v = A[i][j]
            if v.is_zero:
                continue
            num, den = v.monic_pair()
            if num.degree() - den.degree() == -1:
                M[i, j] = sp.cancel(sp.sympify(num.LC()))
    return M


# -- hyperexponential solutions --------------------------------------------------


def is_fuchsian(M: DiffSystem) -> bool:
    """Simple finite poles and proper entries (regular-singular infinity)."""
    flat = [v for row in M.A for v in row]
    if any(e > 1 for e in _den_factor_dict(flat).values()):
        return False
    omega, _ = _infinity_data(M.A)
    return omega <= -1


def hyperexponential_classes(M: DiffSystem):
    """All classes exp(int r) * (rational solution space), r with simple poles.

    Returns (list of (RatFunc, SolutionSpace), notes).  Requires a Fuchsian
    system; candidates come from Q(t)-rational local exponents.
    """
    flat = [v for row in M.A for v in row]
    if any(e > 1 for e in _den_factor_dict(flat).values()):
        raise NonFuchsianError(
            "hyperexponential search requires simple finite poles; supply an "
            "invariant-flag certificate instead"
        )
    A = M.A
    n = M.dim
    notes = []
    factors = sorted(
        _den_factor_dict([v for row in A for v in row]),
        key=lambda f: sp.default_sort_key(f.as_expr()),
    )
    per_factor = []
    for f in factors:
        qt, _ = _residue_eigen_candidates(A, f)
        cp_deg = n * f.degree()
        if len(qt) < cp_deg:
            notes.append(
                f"non-Q(t) local exponents at {sp.sstr(f.as_expr())} skipped"
            )
        uniq = []
        for r in qt:
            if r not in uniq:
                uniq.append(r)
        per_factor.append(uniq if uniq else [sp.S.Zero])

    # all candidate characters r = sum e_f * f'/f
    candidates = [ZERO]
    for f, eigs in zip(factors, per_factor):
        dlog = RatFunc(f.diff().as_expr() / f.as_expr())
        candidates = [
            c + RatFunc(e) * dlog for c in candidates for e in eigs
        ]
    # dedupe modulo logarithmic derivatives
    reps = []
    for c in candidates:
        if not any(is_log_derivative(c - r, 1) for r in reps):
            reps.append(c)

    out = []
    for r in reps:
        shifted = [
            [A[i][j] - (r if i == j else ZERO) for j in range(n)]
            for i in range(n)
        ]
        space = rational_solutions(shifted)
        if space.basis:
            out.append((r, space))
        if not space.complete:
            notes.append("bound-limited")
    return out, tuple(notes)


def hyperexponential_solutions(M: DiffSystem):
    """One representative (r, v) per hyperexponential class."""
    classes, _ = hyperexponential_classes(M)
    return [(r, space.basis[0]) for r, space in classes]
