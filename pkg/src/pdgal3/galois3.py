"""Parameterized differential Galois groups of third-order systems.

The dispatcher triangularizes the input, types the 2-dimensional pieces by the
CQ/CR/NC trichotomy (constant quotient / completely reducible / non-constant
with full unipotent radical), and assembles the group as equations, pullbacks
along representations, or honest Deferred reductions, together with a
machine-checkable CaseReport.
"""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from .errors import IncompleteSearchError, UnsupportedError
from .groups import (
    CaseReport,
    Deferred,
    Explicit,
    GroupDescription,
    Named,
    Pullback,
    RepMap,
    block_rep,
    jet,
    jet_matrix,
)
from .integrability import character_lattice, is_constant, rank1_group
from .modules import (
    FlagCertificate,
    ModuleDiag,
    diag_decompose,
    is_invariant,
    rank1_isomorphism,
    semisimplify,
    split_extension,
    sub_quotient,
    morphisms,
    column_rank,
)
from .ratfunc import (
    ONE,
    RatFunc,
    ZERO,
    d_t,
    is_log_derivative,
    ratfunc,
    rational_antiderivative,
)
from .solvers import hyperexponential_solutions, rational_solutions
from .systems import (
    DiffSystem,
    dual,
    gauge,
    mat,
    mat_inv,
    prolong,
    tensor,
)


@dataclass(frozen=True)
class DispatchConfig:
    max_order: int = 4
    m_bound: int = 12
    series_order: int = 8
    bound: int = 10


DEFAULT_CONFIG = DispatchConfig()

_E1_CERT = FlagCertificate(subspaces=((("1",), ("0",)),))


# -- 2-dimensional trichotomy ---------------------------------------------------------


def classify2(W: DiffSystem, cert: FlagCertificate = None) -> str:
    """Type of a 2-dim system: CQ (constant character quotient), CR
    (completely reducible, non-constant), NC (non-constant, G_a radical)."""
    if W.dim != 2:
        raise ValueError("classify2 needs a 2-dimensional system")
    D = diag_decompose(W, cert)
    if len(D.blocks) == 1:
        return "CR"  # simple, hence semisimple
    u1 = D.blocks[0].A[0][0]
    u2 = D.blocks[1].A[0][0]
    if rational_antiderivative(d_t(u1 - u2)) is not None:
        return "CQ"
    ss, _, _ = semisimplify(W, D)
    if ss is None:
        raise IncompleteSearchError(
            "classify2: semisimplicity test not provably complete"
        )
    return "CR" if ss else "NC"


# -- building blocks for equation sets --------------------------------------------------


def _rank1_entry(a: RatFunc, cfg: DispatchConfig):
    """Per-entry condition for the torus family, from rank1_group."""
    g = rank1_group(a, cfg.max_order)
    if g.family == "finite-cyclic":
        return ("finite", g.data["order"])
    if g.family == "rank1-delta":
        return ("delta", g.data["op"])
    return ("full",)


def _torus(entries, cfg: DispatchConfig):
    """Diagonal-group description for 1-dim factors a_1..a_n, and the lattice."""
    lat = character_lattice([ratfunc(a) for a in entries], cfg.m_bound)
    per_entry = [_rank1_entry(ratfunc(a), cfg) for a in entries]
    g = Named(
        dim=len(entries),
        family="torus",
        data={"lattice": lat.generators, "entries": per_entry},
    )
    return g, lat


def _cq_equation(i: int, j: int):
    """delta(y_ii / y_jj) = 0, cleared: y_jj*delta(y_ii) - y_ii*delta(y_jj)."""
    return jet(j, j, 0) * jet(i, i, 1) - jet(i, i, 0) * jet(j, j, 1)


def _zeros(positions):
    return [jet(i, j) for (i, j) in positions]


def _flag_group(entries, zero_positions, cq_pairs, cfg, flags=()):
    """Triangular-case equations: zero entries, diagonal torus conditions,
    and constant-ratio conditions; all other entries unconditioned."""
    torus, _ = _torus(entries, cfg)
    diag_eqs = [e for e in torus.to_explicit().equations
                if not any(jet(i, j) in e.free_symbols
                           for i in range(1, len(entries) + 1)
                           for j in range(1, len(entries) + 1) if i != j)]
    eqs = _zeros(zero_positions) + diag_eqs
    eqs += [_cq_equation(i, j) for (i, j) in cq_pairs]
    return Explicit(dim=len(entries), equations=tuple(eqs), flags=tuple(flags))


def group2(a1, a2, kind: str, cfg: DispatchConfig) -> GroupDescription:
    """Group of a 2-dim triangular system [[a1, b], [0, a2]] of the given
    type.  NC: full unipotent coordinate; CQ: Deferred with partial
    equations (the tau=0 unipotent structure needs an external algorithm)."""
    if kind == "NC":
        return _flag_group((a1, a2), [(2, 1)], [], cfg)
    if kind == "CQ":
        partial = _flag_group(
            (a1, a2), [(2, 1)], [(1, 2)], cfg, flags=("tau0-partial",)
        )
        return Deferred(
            dim=2,
            reduction="tau(G)=0; complete the unipotent coordinate via a "
            "constant-system algorithm",
            partial=partial,
        )
    raise ValueError(f"group2 undefined for kind {kind!r}")


def _invtranspose_rep(n: int) -> RepMap:
    Y = jet_matrix(n)
    inv_t = Y.adjugate().T / Y.det()
    return RepMap(
        source_dim=n,
        target_dim=n,
        entries=tuple(tuple(sp.cancel(inv_t[i, j]) for j in range(n))
                      for i in range(n)),
        name="inverse-transpose",
    )


def _perm_rep(n: int, sigma) -> RepMap:
    """Conjugation by the permutation matrix of sigma (0-based)."""
    return RepMap(
        source_dim=n,
        target_dim=n,
        entries=tuple(
            tuple(jet(sigma[i] + 1, sigma[j] + 1) for j in range(n))
            for i in range(n)
        ),
        name="permute",
    )


def _rep_is_renaming(rep: RepMap) -> bool:
    return all(
        v == 0 or (v.is_Symbol and str(v).startswith("y"))
        for row in rep.entries for v in row
    )


def _transport(g: GroupDescription, rep: RepMap) -> GroupDescription:
    """Express a group computed in transformed coordinates in the original
    ones, by pulling it back along the coordinate representation.  Rational
    reps (inverse-transpose) stay structural: flattening their pulled-back
    delta-equations is infeasible, while membership stays cheap."""
    from .groups import pullback

    if isinstance(g, Deferred):
        partial = _transport(g.partial, rep) if g.partial is not None else None
        return Deferred(
            dim=rep.source_dim,
            reduction=g.reduction,
            data=g.data,
            partial=partial,
            flags=g.flags,
        )
    if _rep_is_renaming(rep):
        return pullback(rep, g.to_explicit())
    return Pullback(dim=rep.source_dim, components=((rep, g),), flags=g.flags)


# -- the semisimple case -----------------------------------------------------------------


def _sl_part(W: DiffSystem, cfg: DispatchConfig):
    """Trace-zero subsystem of hom(W, W) for a 2-dim block, and its constancy."""
    from .systems import hom

    H = hom(W, W)
    # columns: vec (column-major) of [[1,0],[0,-1]], [[0,0],[1,0]], [[0,1],[0,0]]
    S = mat([["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"], ["-1", "0", "0"]])
    B, _, _, _ = sub_quotient(H, S)
    return is_constant(B, bound=cfg.bound)


def _sym_square(W: DiffSystem):
    from .systems import tensor as _tensor

    T = _tensor(W, W)
    # symmetric vectors: e1⊗e1, e1⊗e2 + e2⊗e1, e2⊗e2 (column-major coords)
    S = mat([["1", "0", "0"], ["0", "1", "0"], ["0", "1", "0"], ["0", "0", "1"]])
    B, _, _, _ = sub_quotient(T, S)
    return B


def _semisimple_group(blocks, cfg: DispatchConfig, free_upper=False):
    """Group of a direct sum of blocks of dims summing to <= 3.

    blocks are in coordinate order.  With free_upper the strictly
    upper-block entries are left unconditioned (used when only the lower
    zeros are known to cut out the ambient group).
    """
    n = sum(b.dim for b in blocks)
    dims = [b.dim for b in blocks]
    notes, certs = [], []
    offs = []
    o = 0
    for d in dims:
        offs.append(o)
        o += d

    if all(d == 1 for d in dims):
        g, lat = _torus([b.A[0][0] for b in blocks], cfg)
        certs.append(("character-lattice", lat.generators))
        notes.append("tau(G)=0: commutative identity component")
        return g, notes, certs

    if dims == [3]:
        V = blocks[0]
        tr = sum((V.A[i][i] for i in range(3)), ZERO)
        tr_g = rank1_group(tr, cfg.max_order)
        det_entries = ((jet_matrix(3).det(),),)
        det_rep = RepMap(source_dim=3, target_dim=1, entries=det_entries,
                         name="det")
        shifted = DiffSystem(
            tuple(
                tuple(V.A[i][j] - (tr / 3 if i == j else ZERO)
                      for j in range(3))
                for i in range(3)
            )
        )
        w = _try_constant(shifted, cfg)
        comps = [(det_rep, tr_g)]
        flags = ()
        if w is not None:
            comps.append(
                (RepMap(3, 3, tuple(tuple(jet(i + 1, j + 1) for j in range(3))
                                    for i in range(3)), name="id"),
                 Named(dim=3, family="sl-constant-conjugate",
                       flags=("up-to-conjugation",)))
            )
            certs.append(("constancy-witness", [[v.to_string() for v in row]
                                                for row in w.B]))
        else:
            flags = ("quasi-simple-closure-unchecked",)
        notes.append("simple 3-dim: determined by det character and the "
                     "trace-zero constancy dichotomy")
        return Pullback(dim=3, components=tuple(comps), flags=flags), notes, certs

    # one 2-dim simple block W plus (possibly) a 1-dim block U
    wi = dims.index(2)
    W = blocks[wi]
    woff = offs[wi]
    wrows = [woff, woff + 1]
    try:
        closure_fails = bool(hyperexponential_solutions(W)) or bool(
            hyperexponential_solutions(_sym_square(W))
        )
    except Exception:
        closure_fails = True
    if closure_fails:
        return (
            Deferred(
                dim=n,
                reduction="2-dim factor fails the SL2-closure hypothesis; a "
                "Kovacic-type second-order subroutine is required",
            ),
            ["closure hypothesis failed for the 2-dim factor"],
            certs,
        )

    zero_pos = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            same_block = any(
                offs[k] < i <= offs[k] + dims[k] and offs[k] < j <= offs[k] + dims[k]
                for k in range(len(dims))
            )
            if same_block:
                continue
            if free_upper and j > i:
                continue
            zero_pos.append((i, j))
    ambient = Explicit(dim=n, equations=tuple(_zeros(zero_pos)))

    trW = W.A[0][0] + W.A[1][1]
    det_entry = (jet(wrows[0] + 1, wrows[0] + 1) * jet(wrows[1] + 1, wrows[1] + 1)
                 - jet(wrows[0] + 1, wrows[1] + 1) * jet(wrows[1] + 1, wrows[0] + 1))
    comps = []
    if n == 3:
        ui = dims.index(1)
        uoff = offs[ui]
        aU = blocks[ui].A[0][0]
        torus2, lat = _torus([trW, aU], cfg)
        certs.append(("character-lattice", lat.generators))
        rep = RepMap(
            source_dim=3,
            target_dim=2,
            entries=((det_entry, sp.S.Zero),
                     (sp.S.Zero, jet(uoff + 1, uoff + 1))),
            name="wedge2W-plus-U",
        )
        comps.append((rep, torus2))
        notes.append("tau=0 on wedge^2 W + U: commutative identity component")
    else:
        rep = RepMap(source_dim=2, target_dim=1, entries=((det_entry,),),
                     name="det")
        comps.append((rep, rank1_group(trW, cfg.max_order)))

    w = _try_constant(W, cfg, traceless=True)
    flags = ("finite-primitive-closure-unchecked",)
    if w is not None:
        flags = flags + ("up-to-conjugation",)
        comps.append(
            (block_rep(n, wrows, name="W-block"),
             Named(dim=2, family="sl2-constant-conjugate",
                   flags=("up-to-conjugation",)))
        )
        certs.append(("constancy-witness", [[v.to_string() for v in row]
                                            for row in w.B]))
        notes.append("W⊗W* dichotomy: constant; SL2-conjugate-to-constants part")
    else:
        notes.append("W⊗W* dichotomy: non-constant; full SL2 part")
    return Pullback(dim=n, components=tuple(comps), ambient=ambient,
                    flags=flags), notes, certs


def _try_constant(W: DiffSystem, cfg: DispatchConfig, traceless=False):
    try:
        if traceless:
            return _sl_part(W, cfg)
        return is_constant(W, bound=cfg.bound)
    except IncompleteSearchError:
        return None


def diag_group(D: ModuleDiag, cfg: DispatchConfig = None) -> GroupDescription:
    """Group of a semisimple system presented by its diagonal blocks."""
    cfg = cfg or DEFAULT_CONFIG
    g, _, _ = _semisimple_group(list(D.blocks), cfg)
    return g


# -- decomposability probing ------------------------------------------------------------


def _candidate_lines(M: DiffSystem):
    from .solvers import hyperexponential_classes

    try:
        classes, _ = hyperexponential_classes(M)
    except Exception:
        return []
    out = []
    for _, space in classes:
        basis = space.basis
        for v in basis:
            out.append(v)
        for i in range(len(basis)):
            for j in range(i + 1, len(basis)):
                out.append(tuple(a + b for a, b in zip(basis[i], basis[j])))
    return out


def _find_line_summand(M: DiffSystem):
    """(line, complement) with M = line ⊕ complement, or None."""
    for v in _candidate_lines(M):
        S = tuple((x,) for x in v)
        try:
            comp, complete = split_extension(M, S)
        except Exception:
            continue
        if comp is not None:
            return S, comp
    return None


# -- the dispatcher ----------------------------------------------------------------------


def dispatch(V: DiffSystem, cert: FlagCertificate = None,
             cfg: DispatchConfig = None):
    """(CaseReport, GroupDescription) for a 3-dim system."""
    cfg = cfg or DEFAULT_CONFIG
    if V.dim != 3:
        raise UnsupportedError("dispatch requires a 3-dimensional system")

    D = diag_decompose(V, cert)
    certs = [("gauge", [[v.to_string() for v in row] for row in mat(D.P)]),
             ("factors", [b.to_strings() for b in D.blocks])]

    ss, Pss, ssblocks = semisimplify(V, D)
    if ss is True:
        g, notes, more = _semisimple_group(ssblocks, cfg)
        certs.append(("semisimple-gauge",
                      [[v.to_string() for v in row] for row in mat(Pss)]))
        certs.extend(more)
        report = CaseReport(
            case_path="SEMISIMPLE",
            type_tags=(),
            certificates=tuple(certs),
            flags=tuple(g.flags),
            tau_notes=tuple(notes),
        )
        return report, g
    if ss is None:
        report = CaseReport(
            case_path="UNDECIDED",
            certificates=tuple(certs),
            flags=("bound-limited",),
        )
        return report, Deferred(
            dim=3, reduction="semisimplicity test not provably complete",
            flags=("deferred", "bound-limited"),
        )

    dims = sorted(b.dim for b in D.blocks)
    if dims == [1, 2]:
        return _case_indecomposable_2dim(V, D, cfg, certs)

    found = _find_line_summand(V)
    if found is not None:
        return _case_decomposable(V, found, cfg, certs)
    dual_found = _find_line_summand(dual(V))
    if dual_found is not None:
        rep_dual = _invtranspose_rep(3)
        sub_report, g = _case_decomposable(dual(V), dual_found, cfg, certs)
        return (
            CaseReport(
                case_path=sub_report.case_path + "(dual)",
                type_tags=sub_report.type_tags,
                certificates=sub_report.certificates,
                flags=sub_report.flags,
                tau_notes=sub_report.tau_notes,
            ),
            _transport(g, rep_dual),
        )

    return _case_full_flag(V, D, cfg, certs)


def _case_decomposable(V, found, cfg, certs):
    S, comp = found
    # W = complement, non-semisimple (else V would be semisimple)
    BW = DiffSystem(is_invariant(V, comp))
    DW = diag_decompose(BW)
    w1 = DW.blocks[0].A[0][0]
    w2 = DW.blocks[-1].A[0][0]
    a_u = is_invariant(V, S)[0][0]
    entries = (w1, w2, a_u)
    certs = certs + [("summand-line", [v[0].to_string() for v in S]),
                     ("summand-complement",
                      [[v.to_string() for v in row] for row in comp]),
                     ("diag-entries", [e.to_string() for e in entries])]
    if rational_antiderivative(d_t(w1 - w2)) is not None:
        partial = _flag_group(
            entries,
            [(2, 1), (3, 1), (3, 2), (1, 3), (2, 3)],
            [(1, 2)],
            cfg,
            flags=("tau0-partial",),
        )
        g = Deferred(
            dim=3,
            reduction="tau(G)=0: W1 ⊗ W2* constant; complete via a "
            "constant-system algorithm",
            partial=partial,
        )
        report = CaseReport(
            case_path="DECOMPOSABLE",
            type_tags=("CQ",),
            certificates=tuple(certs),
            flags=("deferred",),
            tau_notes=("tau(G)=0 by the constant-quotient premise and the "
                       "type inequality tau(G)=max(tau(H),tau(G/H))",),
        )
        return report, g
    g = _flag_group(entries, [(2, 1), (3, 1), (3, 2), (1, 3), (2, 3)], [], cfg)
    report = CaseReport(
        case_path="DECOMPOSABLE",
        type_tags=("NC",),
        certificates=tuple(certs),
        flags=(),
        tau_notes=("G determined by V^diag within the stabilizer of W0; the "
                   "G_a kernel block (1,2) is unconditioned",),
    )
    return report, g


def _case_indecomposable_2dim(V, D, cfg, certs):
    dualized = D.blocks[0].dim != 2
    if dualized:
        Vd = dual(V)
        Dd = diag_decompose(Vd)
        if Dd.blocks[0].dim != 2:
            return (
                CaseReport(case_path="INDECOMPOSABLE-2DIM",
                           certificates=tuple(certs),
                           flags=("bound-limited",)),
                Deferred(dim=3, reduction="could not realize the 2-dim factor "
                         "as a submodule"),
            )
        report, g = _case_indecomposable_2dim(Vd, Dd, cfg, certs)
        return (
            CaseReport(
                case_path=report.case_path + "(dual)",
                type_tags=report.type_tags,
                certificates=report.certificates,
                flags=report.flags,
                tau_notes=report.tau_notes,
            ),
            _transport(g, _invtranspose_rep(3)),
        )
    W = D.blocks[0]
    U = D.blocks[1]
    Wtest = tensor(dual(U), W)  # W1* ⊗ W2, 2-dimensional
    w = _try_constant(Wtest, cfg)
    if w is not None:
        report = CaseReport(
            case_path="INDECOMPOSABLE-2DIM",
            type_tags=("constant",),
            certificates=tuple(certs + [("constancy-witness",
                                         [[v.to_string() for v in row]
                                          for row in w.B])]),
            flags=("deferred",),
            tau_notes=("tau(G)=0: W1*⊗W2 constant; "
                       "tau(G)=max(tau(ker),tau(image)) with both of type 0",),
        )
        return report, Deferred(
            dim=3,
            reduction="tau(G)=0: complete via a constant-system algorithm",
        )
    g, notes, more = _semisimple_group([W, U], cfg, free_upper=True)
    report = CaseReport(
        case_path="INDECOMPOSABLE-2DIM",
        type_tags=("non-constant",),
        certificates=tuple(certs + more),
        flags=tuple(g.flags),
        tau_notes=tuple(notes) + (
            "R_u(G) is the full 2-dim unipotent block; G determined by "
            "V^diag",
        ),
    )
    return report, g


def _case_full_flag(V, D, cfg, certs):
    Mt = gauge(V, D.P)
    a = [Mt.A[i][i] for i in range(3)]
    b12, b13, b23 = Mt.A[0][1], Mt.A[0][2], Mt.A[1][2]
    V2 = DiffSystem([[a[0], b12], [ZERO, a[1]]])
    Q1 = DiffSystem([[a[1], b23], [ZERO, a[2]]])
    t1 = classify2(V2, _E1_CERT)
    t2 = classify2(Q1, _E1_CERT)
    certs = certs + [("diag-entries", [x.to_string() for x in a]),
                     ("pair", (t1, t2))]

    if (t1, t2) in {("CQ", "CR"), ("NC", "CR"), ("NC", "CQ")}:
        sub_report, g = dispatch(dual(V), cfg=cfg)
        report = CaseReport(
            case_path=f"({t1},{t2})→dual→" + sub_report.case_path,
            type_tags=(t1, t2) + sub_report.type_tags,
            certificates=sub_report.certificates,
            flags=sub_report.flags,
            tau_notes=sub_report.tau_notes,
        )
        return report, _transport(g, _invtranspose_rep(3))

    if (t1, t2) == ("CQ", "CQ"):
        partial = _flag_group(
            tuple(a), [(2, 1), (3, 1), (3, 2)],
            [(1, 2), (2, 3), (1, 3)], cfg, flags=("tau0-partial",),
        )
        report = CaseReport(
            case_path="(CQ,CQ)",
            type_tags=(t1, t2),
            certificates=tuple(certs),
            flags=("deferred",),
            tau_notes=("tau(G)=0: V^diag constant",),
        )
        return report, Deferred(
            dim=3,
            reduction="tau(G)=0: complete via a constant-system algorithm",
            partial=partial,
        )

    if (t1, t2) == ("CR", "CR"):
        found = _find_line_summand(V)
        if found is not None:
            return _case_decomposable(V, found, cfg, certs)
        return (
            CaseReport(case_path="(CR,CR)", type_tags=(t1, t2),
                       certificates=tuple(certs), flags=("bound-limited",)),
            Deferred(dim=3, reduction="(CR,CR) forces decomposability but no "
                     "splitting was found within the search bound"),
        )

    if t1 == "CR":
        return _case_cr(V, Mt, a, cfg, certs, t2)
    if (t1, t2) == ("NC", "NC"):
        return _case_ncnc(Mt, a, b12, b23, cfg, certs)
    if (t1, t2) == ("CQ", "NC"):
        return _case_cqnc(Mt, a, V2, cfg, certs)
    raise RuntimeError(f"unhandled pair ({t1},{t2})")


def _split_v2_basis(Mt):
    """Gauge making the invariant complement of V1 in V2 the second basis
    vector; returns (new system, gauge matrix)."""
    comp, _ = split_extension(
        DiffSystem([[Mt.A[0][0], Mt.A[0][1]], [ZERO, Mt.A[1][1]]]),
        (("1",), ("0",)),
    )
    if comp is None:
        raise RuntimeError("V2 expected to split")
    c1, c2 = comp[0][0], comp[1][0]
    P_cols = mat([[ONE, c1, ZERO], [ZERO, c2, ZERO], [ZERO, ZERO, ONE]])
    return gauge(Mt, mat_inv(P_cols)), P_cols


def _case_cr(V, Mt, a, cfg, certs, t2):
    Mt2, _ = _split_v2_basis(Mt)
    a = [Mt2.A[i][i] for i in range(3)]
    VoverU = DiffSystem([[a[0], Mt2.A[0][2]], [ZERO, a[2]]])
    t3 = classify2(VoverU, _E1_CERT)
    certs = certs + [("third-type", t3)]
    if t3 == "CR":
        return (
            CaseReport(case_path=f"(CR,{t2},CR)", certificates=tuple(certs),
                       flags=("inconsistent",)),
            Deferred(dim=3, reduction="(CR,*,CR) would force decomposability; "
                     "inconsistent certificates"),
        )

    if (t2, t3) == ("CQ", "CQ"):
        partial = _flag_group(
            tuple(a), [(2, 1), (3, 1), (3, 2), (1, 2)],
            [(2, 3), (1, 3)], cfg, flags=("tau0-partial",),
        )
        report = CaseReport(
            case_path="(CR,CQ,CQ)",
            type_tags=("CR", "CQ", "CQ"),
            certificates=tuple(certs),
            flags=("deferred",),
            tau_notes=("tau(G)=0: faithful action on V/V1 ⊕ V/U is of "
                       "constant type",),
        )
        return report, Deferred(
            dim=3,
            reduction="tau(G)=0: complete via a constant-system algorithm",
            partial=partial,
        )

    if (t2, t3) == ("CQ", "NC"):
        g = _flag_group(
            tuple(a), [(2, 1), (3, 1), (3, 2), (1, 2)], [(2, 3)],
            cfg, flags=("tau0-partial-on-(2,3)",),
        )
        report = CaseReport(
            case_path="(CR,CQ,NC)",
            type_tags=("CR", "CQ", "NC"),
            certificates=tuple(certs),
            flags=g.flags,
            tau_notes=("G determined by (B', V1 ⊕ V/V1); the G_a kernel "
                       "block (1,3) is unconditioned",),
        )
        return report, g

    if (t2, t3) == ("NC", "CQ"):
        sigma = [1, 0, 2]
        Mp = gauge(Mt2, _perm_matrix(sigma))
        ap = [Mp.A[i][i] for i in range(3)]
        gp = _flag_group(
            tuple(ap), [(2, 1), (3, 1), (3, 2), (1, 2)], [(2, 3)],
            cfg, flags=("tau0-partial-on-(2,3)",),
        )
        g = _transport(gp, _perm_rep(3, sigma))
        report = CaseReport(
            case_path="(CR,NC,CQ)→permute→(CR,CQ,NC)",
            type_tags=("CR", "NC", "CQ"),
            certificates=tuple(certs),
            flags=gp.flags,
            tau_notes=("permuted V1 and U, then: G determined by "
                       "(B', V1 ⊕ V/V1)",),
        )
        return report, g

    # (CR,NC,NC)
    g = _flag_group(tuple(a), [(2, 1), (3, 1), (3, 2), (1, 2)], [], cfg)
    report = CaseReport(
        case_path="(CR,NC,NC)",
        type_tags=("CR", "NC", "NC"),
        certificates=tuple(certs),
        flags=(),
        tau_notes=("G determined by V2 ⊕ V/V2; the full unipotent Y block "
                   "(1,3),(2,3) is unconditioned",),
    )
    return report, g


def _perm_matrix(sigma):
    n = len(sigma)
    return mat([[ONE if sigma[i] == j else ZERO for j in range(n)]
                for i in range(n)])


def _case_ncnc(Mt, a, b12, b23, cfg, certs):
    iso = is_log_derivative(a[0] - 2 * a[1] + a[2], cfg.m_bound)
    if iso is None or iso[0] != 1:
        flags = () if iso is None else ("identity-component-level",)
        g = _flag_group(tuple(a), [(2, 1), (3, 1), (3, 2)], [], cfg,
                        flags=flags)
        report = CaseReport(
            case_path="(NC,NC)-noncommutative",
            type_tags=("NC", "NC"),
            certificates=tuple(certs),
            flags=flags,
            tau_notes=("[G,G] non-commutative: [B,B] ⊂ G, so G determined "
                       "by V^diag",),
        )
        return report, g
    _, s = iso
    # commutative [G,G] iff the (2,3)-class is a constant multiple of the
    # s-twisted (1,2)-class: solve d(f) = (a2-a3) f - c*(b12/s) + b23, d(c)=0
    aug = DiffSystem([[a[1] - a[2], -(b12 / s)], [ZERO, ZERO]])
    space = rational_solutions(aug, [b23, ZERO], bound=cfg.bound)
    certs = certs + [("isotypic-witness", s.to_string())]
    if space.particular is None and not space.complete:
        g = _flag_group(tuple(a), [(2, 1), (3, 1), (3, 2)], [], cfg,
                        flags=("bound-limited",))
        report = CaseReport(
            case_path="(NC,NC)-undecided",
            type_tags=("NC", "NC"),
            certificates=tuple(certs),
            flags=("bound-limited", "deferred"),
            tau_notes=("commutator dichotomy inconclusive: both candidates "
                       "share these equations",),
        )
        return report, Deferred(
            dim=3,
            reduction="(NC,NC) commutator dichotomy inconclusive within the "
            "solver bound; candidates: determined by V2 / by V^diag",
            partial=g,
        )
    commutative = space.particular is not None
    if commutative:
        g = _flag_group(tuple(a), [(2, 1), (3, 1), (3, 2)], [], cfg,
                        flags=("identity-component-level",))
        report = CaseReport(
            case_path="(NC,NC)-commutative",
            type_tags=("NC", "NC"),
            certificates=tuple(certs + [("proportionality",
                                         [v.to_string() if hasattr(v, "to_string")
                                          else str(v)
                                          for v in space.particular])]),
            flags=("identity-component-level",),
            tau_notes=("[G,G] commutative: G determined by V2; closure "
                       "conditions on the (2,3) entry are not computed",),
        )
        return report, g
    g = _flag_group(tuple(a), [(2, 1), (3, 1), (3, 2)], [], cfg)
    report = CaseReport(
        case_path="(NC,NC)-noncommutative",
        type_tags=("NC", "NC"),
        certificates=tuple(certs),
        flags=(),
        tau_notes=("[G,G] non-commutative: [B,B] ⊂ G, so G determined by "
                   "V^diag",),
    )
    return report, g


def _case_cqnc(Mt, a, V2, cfg, certs):
    ss, _, _ = semisimplify(V2)
    if ss is None:
        return (
            CaseReport(case_path="(CQ,NC)-undecided", type_tags=("CQ", "NC"),
                       certificates=tuple(certs),
                       flags=("bound-limited", "deferred")),
            Deferred(dim=3, reduction="semisimplicity of V2 undecided within "
                     "the solver bound",
                     flags=("deferred", "bound-limited")),
        )
    if ss is True:
        Mt2, _ = _split_v2_basis(Mt)
        a2 = [Mt2.A[i][i] for i in range(3)]
        g = _flag_group(tuple(a2), [(2, 1), (3, 1), (3, 2), (1, 2)],
                        [(1, 2)], cfg)
        report = CaseReport(
            case_path="(CQ,NC)-V2semisimple",
            type_tags=("CQ", "NC"),
            certificates=tuple(certs),
            flags=(),
            tau_notes=("V2 semisimple: G determined by V2 ⊕ V/V2 with the "
                       "Y block unconditioned",),
        )
        return report, g

    # R_u(G') = 1 iff V1 ≅ V2/V1 (witness u) and the extension class of
    # V2 ⊗ (V/V2)* lies on the prolongation line: for some lambda in Q(t)
    # and rational f, df/dx = b12*u - lambda * delta(a1 - a3).
    riso = rank1_isomorphism(a[0], a[1])
    reductive = False
    prol_witness = None
    if riso is not None:
        coeff = [[ZERO, -d_t(a[0] - a[2])], [ZERO, ZERO]]
        rhs = [Mt.A[0][1] * riso, ZERO]
        space = rational_solutions(coeff, rhs, bound=cfg.bound)
        if space.particular is None and not space.complete:
            return (
                CaseReport(case_path="(CQ,NC)-undecided",
                           type_tags=("CQ", "NC"),
                           certificates=tuple(certs),
                           flags=("bound-limited", "deferred")),
                Deferred(dim=3, reduction="reductivity of the restricted "
                         "group undecided within the solver bound",
                         flags=("deferred", "bound-limited")),
            )
        if space.particular is not None:
            reductive = True
            prol_witness = space.particular
    if not reductive:
        g = _flag_group(tuple(a), [(2, 1), (3, 1), (3, 2)], [(1, 2)], cfg,
                        flags=("tau0-partial-on-(1,2)",))
        report = CaseReport(
            case_path="(CQ,NC)-Ru",
            type_tags=("CQ", "NC"),
            certificates=tuple(certs),
            flags=g.flags,
            tau_notes=("R_u(G') nontrivial: Z ⊂ G, so G determined by "
                       "V2 ⊕ V/V2 with the Y block unconditioned",),
        )
        return report, g

    # prolongation branch: V1 ≅ V2/V1, G' reductive
    emb = _prolongation_embedding(Mt, a)
    flags = ["structural", "prolongation-embedding-certified" if emb is not None
             else "prolongation-embedding-not-found"]
    certs = certs + [
        ("rank1-isomorphism", riso.to_string()),
        ("reductivity-witness", [v.to_string() for v in prol_witness]),
    ]
    b12, b23 = Mt.A[0][1], Mt.A[1][2]
    normalized = (
        a[0] == a[1]
        and b12 == d_t(a[1] - a[2])
        and Mt.A[0][2] == d_t(b23)
    )
    comps = ((block_rep(3, [1, 2], name="V/V1"),
              group2(a[1], a[2], "NC", cfg)),)
    eqs = _zeros([(2, 1), (3, 1), (3, 2)])
    if normalized:
        y = jet
        eqs += [
            y(1, 1) - y(2, 2),
            y(1, 2) * y(3, 3) - y(3, 3) * jet(2, 2, 1) + y(2, 2) * jet(3, 3, 1),
            y(1, 3) * y(3, 3) - y(3, 3) * jet(2, 3, 1) + y(2, 3) * jet(3, 3, 1),
        ]
    else:
        flags.append("non-normalized-basis")
    g = Pullback(dim=3, components=comps,
                 ambient=Explicit(dim=3, equations=tuple(eqs)),
                 flags=tuple(flags))
    certs = certs + [("embedding-into-prolongation",
                      emb if emb is None else
                      [[v.to_string() for v in row] for row in emb])]
    report = CaseReport(
        case_path="(CQ,NC)-prolongation",
        type_tags=("CQ", "NC"),
        certificates=tuple(certs),
        flags=tuple(flags),
        tau_notes=("V lies in the tensor category generated by the first "
                   "prolongation of V/V1",),
    )
    return report, g


def _prolongation_embedding(Mt, a):
    """Injective morphism of the det-shifted system into the prolongation of
    the shifted V/V1, or None."""
    chi = a[2]
    Vsh = DiffSystem(
        [[Mt.A[i][j] - (chi if i == j else ZERO) for j in range(3)]
         for i in range(3)]
    )
    Wsh = DiffSystem([[a[1] - chi, Mt.A[1][2]], [ZERO, ZERO]])
    try:
        space = morphisms(Vsh, prolong(Wsh))
    except Exception:
        return None
    cands = list(space.basis)
    for i in range(len(space.basis)):
        for j in range(i + 1, len(space.basis)):
            cands.append(tuple(
                tuple(x + y for x, y in zip(r1, r2))
                for r1, r2 in zip(space.basis[i], space.basis[j])
            ))
    for U in cands:
        if column_rank(tuple(tuple(row) for row in U)) == 3:
            return U
    return None
