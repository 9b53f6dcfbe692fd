from fractions import Fraction

import numpy as np
import pytest

from graphonlab.adjoints import edge_substitute, poly_kernel, scale, shift, tensor_fixed, tensor_pow
from graphonlab.cr import make_binary, make_cf
from graphonlab.density import t_mc
from graphonlab.forcing import (C_BAR, C_HAT, D_BAR, D_HAT, UnknownFamilyError, adjoint_identity_check,
                                area_integral, c4hat_basis, find_2labeled_dependency, kab_exact,
                                pointwise_sigmas, stokes_check, verify_family)
from graphonlab.graphon import GraphonError, const, half, levelset, step
from graphonlab.graphs import C4, K2, K3, P3, Graph, complete_bipartite
from oracles import random_rational_step

F = Fraction
N = 200_000


def test_cgw_and_regular_on_constant():
    q = const(F(1, 2))
    for rep in (verify_family(q, "cgw"), verify_family(q, "regular", d=F(1, 2)),
                verify_family(q, "regular_any")):
        assert rep.passed
        assert all(c.method == "exact_step" for c in rep.conditions)
    bad = verify_family(q, "zero_one")
    assert not bad.passed and abs(bad.conditions[0].estimate - 1 / 16) < 1e-15


def test_half_family_and_negative_control():
    h = half()
    rep = verify_family(h, "halfgraphon", samples=N)
    assert rep.passed
    printed = [c for c in rep.conditions if c.informational]
    assert len(printed) == 1 and abs(printed[0].estimate - 1 / 3) < 0.01
    assert verify_family(h, "monotone", samples=N).passed
    cgw = verify_family(h, "cgw", samples=N)
    assert not cgw.passed
    c4 = [c for c in cgw.conditions if c.label == "t(C4)"][0]
    assert abs(c4.estimate - 1 / 6) <= 4 * c4.stderr


@pytest.mark.parametrize("poly", [[(0, 0, 1), (1, 0, -1), (0, 1, -1)], [(0, 0, 1), (2, 0, -1), (0, 2, -1)]],
                         ids=["linear", "quadratic"])
def test_monpoly_on_its_reference(poly):
    assert verify_family(levelset(poly), "monpoly", poly=poly, samples=N).passed


def test_monpoly_rejects_other_graphon():
    rep = verify_family(half(), "monpoly", poly=[(0, 0, 1), (2, 0, -1), (0, 2, -1)], samples=N)
    assert not rep.passed


def test_binary_tree_family():
    rep = verify_family(make_binary().graphon(), "binary_tree", samples=N, seed=3)
    assert rep.passed, rep.text()
    assert not verify_family(half(), "binary_tree", samples=N, points=3).passed


def test_regular_cr_graphons():
    assert verify_family(make_binary().graphon(), "regular", d=F(2, 3), samples=N).passed
    alpha = F(2, 7)
    assert verify_family(make_cf(alpha).graphon(), "regular", d=alpha, samples=N).passed


def test_family_errors():
    with pytest.raises(UnknownFamilyError):
        verify_family(half(), "smooth")
    with pytest.raises(ValueError):
        verify_family(half(), "regular")
    with pytest.raises(ValueError):
        verify_family(half(), "monpoly")


def test_report_rendering():
    rep = verify_family(const(F(1, 2)), "cgw")
    assert rep.text().splitlines()[0] == "family cgw: PASS"
    assert rep.csv().splitlines()[0] == "family,condition,target,estimate,stderr,tol,method,pass"
    assert len(rep.csv().splitlines()) == 3


def test_pointwise_sigmas():
    assert pointwise_sigmas(1) == 3.0
    assert 3.8 < pointwise_sigmas(20) < 3.9
    assert pointwise_sigmas(70) > pointwise_sigmas(20)


def test_stokes_examples():
    h = half()
    lhs, rhs, gap = stokes_check(h, 1, 1)
    assert abs(lhs - 1 / 3) < 1e-12 and gap < 1e-12
    assert kab_exact(h, 1, 1) == pytest.approx(0.5, abs=1e-13)
    assert area_integral(h, 0, 0) == pytest.approx(0.5, abs=1e-13)
    assert stokes_check(h, 1, 2).gap <= 1e-6
    mc = stokes_check(h, 1, 2, method="mc", n=400_000)
    assert abs(mc.lhs - mc.rhs) < 0.005
    with pytest.raises(ValueError):
        stokes_check(h, 0, 1)
    with pytest.raises(GraphonError):
        stokes_check(const(F(1, 2)), 1, 1)


def test_kab_matches_density():
    q = levelset([(0, 0, 1), (2, 0, -1), (0, 2, -1)])
    for a, b in ((1, 1), (1, 2), (2, 2)):
        assert t_mc(complete_bipartite(a, b), q, n=N).within(kab_exact(q, a, b), 4)


def test_dependency_on_constant():
    e2 = Graph(2, ((0, 1),), (0, 1))
    n2 = Graph(2, (), (0, 1))
    dep = find_2labeled_dependency(const(F(1, 2)), [e2, n2], grid=30, n=200, verify_tuples=20)
    assert dep is not None and dep.verified
    assert np.allclose(dep.coeffs / dep.coeffs[0], [1, -0.5])


def test_dependency_on_half():
    dep = find_2labeled_dependency(half(), c4hat_basis(), grid=60, n=2_000, verify_tuples=30)
    assert dep is not None and dep.verified


def test_no_dependency_on_generic_step():
    w = step(*random_rational_step(np.random.default_rng(5), denom=97))
    basis = [Graph(2, ((0, 1),), (0, 1)), Graph(2, (), (0, 1)), Graph(3, ((0, 2), (1, 2)), (0, 1))]
    assert find_2labeled_dependency(w, basis, grid=40, n=200) is None
    with pytest.raises(ValueError):
        find_2labeled_dependency(w, [K2])


def test_binary_tree_graphs_are_transcribed():
    assert [g.n for g in (C_HAT, D_HAT)] == [3, 4]
    assert sorted(c for *_, c in D_HAT.edges) == ["b", "b", "r", "r", "r"]
    assert sorted(c for *_, c in D_BAR.edges) == ["b", "b", "b", "r", "r"]
    assert C_BAR.labels == C_HAT.labels == (0, 2)


def _ops():
    a = step([F(1, 2), F(1, 2)], [[F(1, 3), F(1, 2)], [F(1, 2), F(1, 4)]], name="A")
    h = Graph(3, ((0, 1), (1, 2)), (0, 2))
    return [scale(F(3, 4)), shift(F(1, 5)), tensor_fixed(a), tensor_pow(2), poly_kernel((0, 1)),
            edge_substitute(h)]


@pytest.mark.parametrize("seed", range(5))
def test_all_adjoints_on_random_steps(seed):
    w = step(*random_rational_step(np.random.default_rng(seed), m=3))
    for op in _ops():
        for g in (K2, P3, K3, C4):
            chk = adjoint_identity_check(op, g, w)
            assert chk.passed and chk.gap <= 1e-12, (str(op), g)


def test_adjoint_examples_on_non_step():
    # forward side exact on the discretized square, adjoint side by Monte Carlo
    chk = adjoint_identity_check(poly_kernel((0, 1)), K2, half(), n=N, m=256)
    assert chk.lhs.method == "exact_step" and chk.rhs.method == "mc"
    assert abs(chk.lhs.value - 1 / 3) < 0.01 and chk.passed
    chk = adjoint_identity_check(tensor_pow(2), K3, half(), n=N)
    assert chk.passed
