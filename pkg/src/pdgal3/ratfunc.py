"""Exact arithmetic in K = Q(t)(x) with the two commuting derivations d_x, d_t.

Elements are kept in a canonical form (reduced fraction with sign-normalized
denominator), so equality of values is equality of representations.  The
x-structure (numerator/denominator as polynomials in x over Q(t), monic
denominator) is exposed for the integration and residue machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy as sp
from sympy import Poly, QQ
from sympy.parsing.sympy_parser import (
    parse_expr,
    standard_transformations,
    convert_xor,
)

from .errors import ExpressionParseError

t, x = sp.symbols("t x")

#: the flat field Q(t, x); used as canonical storage
FIELD = QQ.frac_field(t, x)
#: the coefficient field Q(t)
COEFF_FIELD = QQ.frac_field(t)

_PARSE_TRANSFORMS = standard_transformations + (convert_xor,)


def _poly(expr, *gens, **kw):
    return Poly(expr, *gens, domain=COEFF_FIELD, **kw)


class RatFunc:
    """An element of Q(t)(x), immutable and canonical."""

    __slots__ = ("_elem",)

    def __init__(self, value):
        if isinstance(value, RatFunc):
            self._elem = value._elem
            return
        if isinstance(value, Fraction):
            value = sp.Rational(value.numerator, value.denominator)
        if isinstance(value, (int, sp.Rational)):
            elem = FIELD.from_sympy(sp.Rational(value))
        elif isinstance(value, sp.Expr):
            elem = FIELD.from_sympy(sp.cancel(sp.together(value)))
        else:
            elem = value  # assumed FracElement of FIELD
        self._elem = _normalize(elem)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "RatFunc":
        """Parse the expression grammar: integers, t, x, + - * / ^, parens."""
        try:
            expr = parse_expr(
                text,
                local_dict={"t": t, "x": x},
                global_dict={
                    "Integer": sp.Integer,
                    "Rational": sp.Rational,
                    "Float": sp.Float,
                    "Symbol": sp.Symbol,
                },
                transformations=_PARSE_TRANSFORMS,
                evaluate=True,
            )
        except Exception as exc:  # sympy raises a zoo of parse errors
            raise ExpressionParseError(f"cannot parse {text!r}: {exc}") from exc
        if not isinstance(expr, sp.Expr):
            raise ExpressionParseError(f"not an expression: {text!r}")
        bad = expr.free_symbols - {t, x}
        if bad:
            raise ExpressionParseError(f"unknown symbols {bad} in {text!r}")
        if expr.atoms(sp.Function):
            raise ExpressionParseError(f"function calls not allowed in {text!r}")
        if not expr.is_rational_function(t, x):
            raise ExpressionParseError(f"not a rational function: {text!r}")
        return cls(expr)

    # -- canonical accessors -------------------------------------------------

    @property
    def expr(self) -> sp.Expr:
        num, den = self.monic_pair()
        d = den.as_expr()
        return num.as_expr() if d == 1 else num.as_expr() / d

    def monic_pair(self):
        """(numerator, denominator) as Polys in x over Q(t), denominator monic."""
        num = _poly(FIELD.to_sympy(self._elem.numer), x)
        den = _poly(FIELD.to_sympy(self._elem.denom), x)
        lc = den.LC()
        if lc != 1:
            num = num.quo_ground(lc)
            den = den.monic()
        return num, den

    @property
    def numerator(self) -> Poly:
        return self.monic_pair()[0]

    @property
    def denominator(self) -> Poly:
        return self.monic_pair()[1]

    def to_string(self) -> str:
        return sp.sstr(self.expr).replace("**", "^")

    # -- predicates ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._elem

    def is_polynomial(self) -> bool:
        return self.denominator.degree() == 0

    def is_coeff(self) -> bool:
        """True when the value is free of x (an element of Q(t))."""
        return self.d_x().is_zero

    def coeff_value(self) -> sp.Expr:
        """The value as an element of Q(t); requires x-freeness."""
        e = self.expr
        if x in e.free_symbols:
            raise ValueError(f"{self} is not x-free")
        return e

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        return RatFunc(self._elem + _coerce(other)._elem)

    __radd__ = __add__

    def __sub__(self, other):
        return RatFunc(self._elem - _coerce(other)._elem)

    def __rsub__(self, other):
        return RatFunc(_coerce(other)._elem - self._elem)

    def __mul__(self, other):
        return RatFunc(self._elem * _coerce(other)._elem)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o.is_zero:
            raise ZeroDivisionError("division by zero in Q(t)(x)")
        return RatFunc(self._elem / o._elem)

    def __rtruediv__(self, other):
        if self.is_zero:
            raise ZeroDivisionError("division by zero in Q(t)(x)")
        return RatFunc(_coerce(other)._elem / self._elem)

    def __pow__(self, n: int):
        if n < 0:
            if self.is_zero:
                raise ZeroDivisionError("zero to a negative power")
            return RatFunc(self._elem ** n)
        return RatFunc(self._elem ** n)

    def __neg__(self):
        return RatFunc(-self._elem)

    def __eq__(self, other):
        try:
            return self._elem == _coerce(other)._elem
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self._elem)

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        return f"RatFunc({self.to_string()})"

    # -- derivations ---------------------------------------------------------

    def d_x(self) -> "RatFunc":
        return RatFunc(self._elem.diff(_GEN_X))

    def d_t(self) -> "RatFunc":
        return RatFunc(self._elem.diff(_GEN_T))


_GEN_T, _GEN_X = FIELD.field.gens


def _normalize(elem):
    """Sign-normalize: sympy's from_sympy can leave a unit in the denominator."""
    if not elem:
        return FIELD.zero
    lc = elem.denom.LC
    if lc != 1:
        elem = elem.field.raw_new(
            elem.numer.quo_ground(lc), elem.denom.quo_ground(lc)
        )
    return elem


def _coerce(value) -> RatFunc:
    return value if isinstance(value, RatFunc) else RatFunc(value)


ZERO = RatFunc(0)
ONE = RatFunc(1)
X = RatFunc(x)
T = RatFunc(t)


def ratfunc(value) -> RatFunc:
    """Coerce ints, Fractions, sympy expressions or strings into RatFunc."""
    if isinstance(value, str):
        return RatFunc.parse(value)
    return _coerce(value)


def arith(op: str, a, b) -> RatFunc:
    """Named-dispatch arithmetic, mirroring the CLI surface."""
    a, b = _coerce(a), _coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def d_x(a) -> RatFunc:
    return _coerce(a).d_x()


def d_t(a) -> RatFunc:
    return _coerce(a).d_t()


# -- partial fractions and integration ---------------------------------------


@dataclass(frozen=True)
class ResidueData:
    """Rothstein-Trager residue block: the residue of the input at every root
    of the squarefree monic `pole`, encoded as one element of Q(t)[x]/(pole)."""

    pole: Poly
    residue: Poly
    order: int

    def __post_init__(self):
        assert self.pole.LC() == 1


@dataclass(frozen=True)
class PFTerm:
    """One term numer/pole**power of a squarefree partial fraction expansion,
    deg numer < deg pole."""

    pole: Poly
    power: int
    numer: Poly

    def value(self) -> RatFunc:
        return RatFunc(self.numer.as_expr() / self.pole.as_expr() ** self.power)


def _sqf_split(num: Poly, den: Poly):
    """Split num/den (proper) into components n_i / p_i**e_i over the
    squarefree factors p_i of den."""
    _, factors = den.sqf_list()
    parts = []
    for p, e in factors:
        q = p ** e
        cof = den.quo(q)
        inv = cof.invert(q)
        ni = (num * inv).rem(q)
        parts.append((p, e, ni))
    return parts


def partial_fractions(a) -> tuple[RatFunc, list[PFTerm]]:
    """Full squarefree partial fraction expansion; reconstruction is exact."""
    a = _coerce(a)
    num, den = a.monic_pair()
    polypart, rem = num.div(den)
    terms = []
    for p, e, ni in _sqf_split(rem, den):
        # p-adic digits of ni: ni = sum d_j p^j, deg d_j < deg p
        digits = []
        cur = ni
        while not cur.is_zero:
            cur, d = cur.div(p)
            digits.append(d)
        for j, d in enumerate(digits):
            if not d.is_zero:
                terms.append(PFTerm(pole=p, power=e - j, numer=d))
    return RatFunc(polypart.as_expr()), terms


def horowitz_reduce(a):
    """Hermite-Ostrogradsky: a = d_x(g) + polypart + h with h proper and
    squarefree-denominator.  Returns (g, polypart as Poly, h)."""
    a = _coerce(a)
    num, den = a.monic_pair()
    polypart, rem = num.div(den)
    if den.degree() == 0:
        return ZERO, polypart, ZERO
    dden = den.diff()
    q1 = den.gcd(dden)
    q2 = den.quo(q1)
    if q1.degree() == 0:
        return ZERO, polypart, RatFunc(rem.as_expr() / den.as_expr())
    # rem/den = (A/q1)' + B/q2, deg A < deg q1, deg B < deg q2.
    # Multiplied by den:  rem = A'*q2 - A*s + B*q1,  s := q1'*q2/q1 (a poly).
    s = (q1.diff() * q2).quo(q1)
    m, n = q1.degree(), q2.degree()
    # columns: coefficients of A (x^0..x^{m-1}) then of B (x^0..x^{n-1});
    # rows: coefficients of x^0..x^{m+n-1} in the identity above.
    cols = []
    for i in range(m):
        xi = _poly(x ** i, x)
        cols.append(xi.diff() * q2 - xi * s)
    for i in range(n):
        cols.append(_poly(x ** i, x) * q1)
    nrows = m + n
    mat = [[c.nth(r) for c in cols] for r in range(nrows)]
    rhs = [rem.nth(r) for r in range(nrows)]
    from .linalg import solve_affine

    vals, _ = solve_affine(mat, rhs)
    if vals is None:
        raise RuntimeError("Hermite reduction system must be solvable")
    g_expr = sum(v * x ** i for i, v in enumerate(vals[:m])) / q1.as_expr()
    h_expr = sum(v * x ** i for i, v in enumerate(vals[m:])) / q2.as_expr()
    return RatFunc(g_expr), polypart, RatFunc(h_expr)


def residues(a) -> list[ResidueData]:
    """Residues of a, one block per squarefree factor of the reduced
    denominator (Rothstein-Trager style, no root isolation)."""
    a = _coerce(a)
    _, _, h = horowitz_reduce(a)
    if h.is_zero:
        return []
    bnum, q2 = h.monic_pair()
    dq2 = q2.diff()
    out = []
    orig_den = a.denominator
    for p, _ in q2.sqf_list()[1]:
        if p.degree() == 0:
            continue
        res = (bnum * dq2.invert(p)).rem(p)
        out.append(ResidueData(pole=p, residue=res, order=_mult_in(orig_den, p)))
    return out


def _mult_in(den: Poly, p: Poly) -> int:
    k = 0
    cur = den
    while True:
        q, r = cur.div(p)
        if not r.is_zero:
            return k
        k += 1
        cur = q


def rational_antiderivative(a):
    """F with d_x(F) = a, or None when no rational antiderivative exists."""
    a = _coerce(a)
    g, polypart, h = horowitz_reduce(a)
    if not h.is_zero:
        return None
    return g + RatFunc(polypart.integrate().as_expr())


def factor_list_xt(expr):
    """factor_list over Q[x, t] after clearing denominators in t."""
    num = sp.fraction(sp.together(sp.sympify(expr)))[0]
    return sp.factor_list(num, x, t)


def irreducible_factors(p: Poly) -> list[Poly]:
    """Monic irreducible factors over Q(t) of a squarefree Poly in x."""
    _, factors = factor_list_xt(p.as_expr())
    out = []
    for f, e in factors:
        fp = _poly(f, x)
        if fp.degree(x) > 0:
            out.append(fp.monic())
    return out


def is_log_derivative(a, m_max: int):
    """Smallest m <= m_max with m*a = d_x(r)/r for some r in K, else None.

    Needs: zero polynomial part, simple poles only, and on every irreducible
    pole factor a residue that is a t-free rational number.
    """
    a = _coerce(a)
    if a.is_zero:
        return 1, ONE
    g, polypart, h = horowitz_reduce(a)
    if not polypart.is_zero or not g.is_zero:
        return None
    if a != h:
        return None
    bnum, q2 = h.monic_pair()
    dq2 = q2.diff()
    factor_res = []
    for f in irreducible_factors(q2):
        res = (bnum * dq2.invert(f)).rem(f)
        if res.degree() > 0:
            return None
        val = sp.cancel(res.as_expr())
        if val.free_symbols:
            return None  # t-dependent residue: no finite m exists
        factor_res.append((f, sp.Rational(val)))
    for m in range(1, m_max + 1):
        if all((m * q).is_integer for _, q in factor_res):
            r = ONE
            for f, q in factor_res:
                r = r * RatFunc(f.as_expr()) ** int(m * q)
            return m, r
    return None
