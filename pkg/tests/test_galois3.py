"""Case dispatch for 3-dim systems: typing, branch selection, emitted groups."""

import sympy as sp

import pytest

from pdgal3.errors import UnsupportedError
from pdgal3.galois3 import DispatchConfig, classify2, diag_group, dispatch
from pdgal3.groups import Deferred, jet
from pdgal3.modules import FlagCertificate, diag_decompose
from pdgal3.systems import DiffSystem, dual, gauge

t = sp.Symbol("t")

CERT2 = FlagCertificate(subspaces=((("1",), ("0",)),))
CERT3 = FlagCertificate(
    subspaces=(
        (("1",), ("0",), ("0",)),
        (("1", "0"), ("0", "1"), ("0", "0")),
    )
)
CFG = DispatchConfig()


def S(rows):
    return DiffSystem(rows)


# -- classify2 ---------------------------------------------------------------------------


def test_classify2_cq():
    assert classify2(S([["0", "1"], ["0", "0"]]), CERT2) == "CQ"
    assert classify2(S([["1/x", "1/(x-1)"], ["0", "0"]]), CERT2) == "CQ"


def test_classify2_cr():
    assert classify2(S([["t/x", "0"], ["0", "0"]]), CERT2) == "CR"
    # [[t/x, 1],[0,0]] splits via F = x/(t-1), hence completely reducible
    assert classify2(S([["t/x", "1"], ["0", "0"]]), CERT2) == "CR"


def test_classify2_nc():
    assert classify2(S([["t/x", "1/(x-1)"], ["0", "0"]]), CERT2) == "NC"


def test_classify2_dim_check():
    with pytest.raises(ValueError):
        classify2(S([["0"]]))


# -- diag_group --------------------------------------------------------------------------


def test_diag_group_torus():
    D = diag_decompose(S([["t/x", "0", "0"], ["0", "1/x", "0"], ["0", "0", "0"]]),
                       CERT3)
    g = diag_group(D, CFG)
    assert g.family == "torus"
    assert g.data["lattice"] == ((0, 0, 1), (0, 1, 0))
    eqs = g.to_explicit().equations
    assert jet(2, 2) - 1 in eqs and jet(3, 3) - 1 in eqs
    assert jet(1, 1) * jet(1, 1, 2) - jet(1, 1, 1) ** 2 in eqs


def test_diag_group_trivial_factors():
    D = diag_decompose(S([["0", "0"], ["0", "0"]]))
    g = diag_group(D, CFG)
    eqs = g.to_explicit().equations
    assert jet(1, 1) - 1 in eqs and jet(2, 2) - 1 in eqs


# -- dispatch: structural guards ------------------------------------------------------------


def test_dispatch_rejects_wrong_dimension():
    with pytest.raises(UnsupportedError):
        dispatch(S([["0", "0"], ["0", "0"]]))


# -- dispatch: branch fixtures ---------------------------------------------------------------


def test_dispatch_semisimple_torus():
    r, g = dispatch(S([["t/x", "0", "0"], ["0", "1/x", "0"], ["0", "0", "0"]]),
                    CERT3, CFG)
    assert r.case_path == "SEMISIMPLE"
    assert g.family == "torus"
    assert g.member([["5", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])
    assert not g.member([["t", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])


def test_dispatch_decomposable_non_constant():
    r, g = dispatch(
        S([["t/x", "1/(x-1)", "0"], ["0", "0", "0"], ["0", "0", "1/x"]]),
        CERT3, CFG)
    assert r.case_path == "DECOMPOSABLE"
    assert r.type_tags == ("NC",)
    eqs = g.to_explicit().equations
    # the G_a coordinate (1,2) is unconditioned
    assert all(jet(1, 2) not in e.free_symbols for e in eqs)
    assert jet(2, 1) in eqs and jet(1, 3) in eqs


def test_dispatch_decomposable_constant_quotient_is_deferred():
    r, g = dispatch(
        S([["1/x", "1", "0"], ["0", "0", "0"], ["0", "0", "t/x"]]),
        CERT3, CFG)
    assert r.case_path == "DECOMPOSABLE"
    assert r.type_tags == ("CQ",)
    assert isinstance(g, Deferred) and g.partial is not None
    assert any("tau(G)=0" in note for note in r.tau_notes)


def test_dispatch_indecomposable_2dim():
    r, g = dispatch(
        S([["0", "1/x", "0"], ["t/(x-1)", "0", "1/(x+1)"], ["0", "0", "0"]]),
        None, CFG)
    assert r.case_path == "INDECOMPOSABLE-2DIM"
    eqs = g.to_explicit().equations
    det2 = jet(1, 1) * jet(2, 2) - jet(1, 2) * jet(2, 1) - 1
    assert det2 in eqs
    # full unipotent column is free
    assert all(jet(1, 3) not in e.free_symbols for e in eqs)
    assert all(jet(2, 3) not in e.free_symbols for e in eqs)


def test_dispatch_cqcq_deferred():
    r, g = dispatch(
        S([["0", "1/x", "0"], ["0", "0", "1/x"], ["0", "0", "0"]]), CERT3, CFG)
    assert r.case_path == "(CQ,CQ)"
    assert isinstance(g, Deferred)
    assert g.member([["1", "3", "5"], ["0", "1", "7"], ["0", "0", "1"]])
    assert not g.member([["2", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])


def test_dispatch_cr_cq_nc():
    r, g = dispatch(
        S([["t/x", "0", "1/(x-1)"], ["0", "0", "1/x"], ["0", "0", "0"]]),
        CERT3, CFG)
    assert r.case_path == "(CR,CQ,NC)"
    eqs = g.to_explicit().equations
    assert jet(1, 2) in eqs
    assert all(jet(1, 3) not in e.free_symbols for e in eqs)  # Z free


def test_dispatch_cr_nc_cq_routes_through_permutation():
    r, g = dispatch(
        S([["1/x", "0", "1/(x-1)"], ["0", "t/x", "1/(x+1)"], ["0", "0", "0"]]),
        CERT3, CFG)
    assert r.case_path == "(CR,NC,CQ)→permute→(CR,CQ,NC)"
    eqs = g.to_explicit().equations
    assert jet(1, 1) - 1 in eqs
    # the NC coordinate (2,3) is unconditioned after the permutation
    assert all(jet(2, 3) not in e.free_symbols for e in eqs)


def test_dispatch_cr_nc_nc():
    r, g = dispatch(
        S([["t/x", "0", "1/(x-1)"], ["0", "t/(x-1)", "1/x"], ["0", "0", "0"]]),
        CERT3, CFG)
    assert r.case_path == "(CR,NC,NC)"
    eqs = g.to_explicit().equations
    for free in [jet(1, 3), jet(2, 3)]:
        assert all(free not in e.free_symbols for e in eqs)


def test_dispatch_ncnc_noncommutative():
    r, g = dispatch(
        S([["t/x", "1/(x-1)", "0"], ["0", "0", "1/(x+1)"], ["0", "0", "-t/x"]]),
        CERT3, CFG)
    assert r.case_path == "(NC,NC)-noncommutative"


def test_dispatch_ncnc_commutative():
    r, g = dispatch(
        S([["t/x", "1/(x-1)", "0"], ["0", "0", "1/(x-1)"], ["0", "0", "-t/x"]]),
        CERT3, CFG)
    assert r.case_path == "(NC,NC)-commutative"
    eqs = g.to_explicit().equations
    # no condition on the (1,3) entry: determined by V2
    assert all(jet(1, 3) not in e.free_symbols for e in eqs)


def test_dispatch_cqnc_ru():
    r, g = dispatch(
        S([["0", "1/(x-1)", "0"], ["0", "0", "1/(x+1)"], ["0", "0", "t/x"]]),
        CERT3, CFG)
    assert r.case_path == "(CQ,NC)-Ru"


def test_dispatch_cqnc_prolongation():
    r, g = dispatch(
        S([["t/x", "1/x", "0"], ["0", "t/x", "1/(x-1)"], ["0", "0", "0"]]),
        CERT3, CFG)
    assert r.case_path == "(CQ,NC)-prolongation"
    assert "prolongation-embedding-certified" in r.flags
    # normal-form member: [[a*c, a'*c, v'*c],[0, a*c, v*c],[0,0,c]]
    a, v, c = sp.Integer(5), t**2, sp.Integer(1)
    ok = [[a * c, sp.diff(a, t) * c, sp.diff(v, t) * c],
          [0, a * c, v * c], [0, 0, c]]
    bad = [[a * c, sp.diff(a, t) * c, 1], [0, a * c, v * c], [0, 0, c]]
    assert g.member(ok)
    assert not g.member(bad)


def test_dispatch_gauge_invariant_label():
    V = S([["t/x", "1/(x-1)", "0"], ["0", "0", "0"], ["0", "0", "1/x"]])
    r1, _ = dispatch(V, CERT3, CFG)
    P = [["1", "0", "0"], ["0", "t", "0"], ["0", "1", "1"]]
    r2, _ = dispatch(gauge(V, P), None, CFG)
    assert r1.case_path == r2.case_path == "DECOMPOSABLE"


def test_dispatch_dual_label():
    V = S([["t/x", "1/x", "0"], ["0", "t/x", "1/(x-1)"], ["0", "0", "0"]])
    r, _ = dispatch(dual(V), None, CFG)
    assert r.case_path.endswith("(CQ,NC)-prolongation")
    assert "→dual→" in r.case_path
