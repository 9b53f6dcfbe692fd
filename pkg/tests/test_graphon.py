from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphonlab.cr import binary_graphon
from graphonlab.density import t_exact_step, t_mc
from graphonlab.graphon import (GraphonError, affine, complement, const, discretize, dsum, from_graph, half,
                                interleave_split, levelset, oprod, pprod, step, symmetry_check, tensor)
from graphonlab.graphs import C4, K2, K3, P3, complete
from oracles import brute_step_density, random_rational_step

F = Fraction


def _rand_step(seed, **kw):
    w, v = random_rational_step(np.random.default_rng(seed), **kw)
    return step(w, v), w, v


def test_half_values():
    h = half()
    assert h(0.3, 0.6) == 1.0 and h(0.6, 0.6) == 0.0 and h(0.5, 0.5) == 1.0
    assert h.in_W0


def test_step_validation():
    with pytest.raises(GraphonError):
        step([F(1, 2), F(1, 3)], [[0, 0], [0, 0]])
    with pytest.raises(GraphonError):
        step([F(1, 2), F(1, 2)], [[0, 1], [0, 0]])
    with pytest.raises(GraphonError):
        step([1, 0], [[0, 0], [0, 0]])
    with pytest.raises(GraphonError):
        dsum([(F(1, 2), half())])


def test_step_stays_exact():
    w = step(["1/3", "2/3"], [["1/2", "1/4"], ["1/4", 1]])
    assert w.step.exact
    assert t_exact_step(K2, w).exact == F(1, 9) * F(1, 2) + 2 * F(2, 9) * F(1, 4) + F(4, 9)


def test_dsum_blocks_and_density():
    a, b = _rand_step(1)[0], _rand_step(2)[0]
    s = dsum([(F(1, 3), a), (F(2, 3), b)])
    assert s(0.1, 0.9) == 0.0
    assert s(0.1, 0.2) == a(0.3, 0.6)
    for g in (K2, P3, K3, C4):
        want = F(1, 3) ** g.n * t_exact_step(g, a).exact + F(2, 3) ** g.n * t_exact_step(g, b).exact
        assert t_exact_step(g, s).exact == want
    mixed = dsum([(0.5, half()), (0.5, const(1))])
    assert mixed.step is None
    assert mixed(0.1, 0.2) == 1.0 and mixed(0.2, 0.4) == 0.0 and mixed(0.7, 0.9) == 1.0


def test_tensor_density_multiplies():
    wk2 = from_graph(complete(2))
    t = tensor(wk2, wk2)
    assert t_exact_step(K2, t).exact == F(1, 4)
    assert t_mc(K2, t, n=200_000).within(0.25, 4)
    u, w = _rand_step(3)[0], _rand_step(4)[0]
    uw = tensor(u, w)
    for g in (K2, P3, K3, C4):
        assert t_exact_step(g, uw).exact == t_exact_step(g, u).exact * t_exact_step(g, w).exact
    assert symmetry_check(uw)


def test_interleave_split_is_measure_preserving():
    x = np.random.default_rng(0).random(200_000)
    a, b = interleave_split(x)
    assert abs(a.mean() - 0.5) < 0.005 and abs(b.mean() - 0.5) < 0.005
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01
    a, b = interleave_split(np.array([0.75]))
    assert (a[0], b[0]) == (0.5, 0.5)


@pytest.mark.parametrize("m", [8, 64, 256])
def test_discretize_half_converges(m):
    d = discretize(half(), m)
    err = abs(t_exact_step(K2, d).value - 0.5)
    assert err <= 2 / m


def test_discretize_reproduces_step():
    w, _, _ = _rand_step(5, m=3, denom=4)
    d = discretize(w, 8)
    assert np.allclose(d.step.vf, w(((np.arange(8) + 0.5) / 8)[:, None], ((np.arange(8) + 0.5) / 8)[None, :]))


@given(st.integers(0, 10 ** 6), st.fractions(-2, 2, max_denominator=5), st.fractions(0, 1, max_denominator=5))
def test_affine_scaling(seed, lam, b):
    w = _rand_step(seed)[0]
    for g in (K2, P3, C4):
        assert t_exact_step(g, affine(w, lam)).exact == lam ** len(g.edges) * t_exact_step(g, w).exact
    shifted = affine(w, 1, b)
    assert np.all(shifted.step.values == w.step.values + b)


def test_complement_is_sieve_partner():
    w, wts, vals = _rand_step(6)
    comp = complement(w)
    want = brute_step_density(((0, 1, "r"), (1, 2, "r")), 3, wts, vals)
    assert t_exact_step(P3, comp).exact == want


@pytest.mark.parametrize("seed", range(4))
def test_oprod_is_associative_and_exact(seed):
    rng = np.random.default_rng(seed)
    w = step(*random_rational_step(rng, m=int(rng.integers(2, 5))))
    ww = oprod(w, w)
    left, right = oprod(ww, w), oprod(w, ww)
    xs = rng.random((50, 2))
    assert np.array_equal(left(xs[:, 0], xs[:, 1]), right(xs[:, 0], xs[:, 1]))
    assert left.step.exact
    # the same identity at grid resolution for a non-step kernel
    h = discretize(half(), 64)
    hh = oprod(h, h)
    assert np.max(np.abs(oprod(hh, h).step.vf - oprod(h, hh).step.vf)) <= 1e-9


def test_oprod_of_noncommuting_steps_is_rejected():
    a = step([F(1, 2), F(1, 2)], [[1, 0], [0, 0]])
    b = step([F(1, 2), F(1, 2)], [[0, 1], [1, 0]])
    with pytest.raises(GraphonError):
        oprod(a, b)


def test_oprod_examples():
    wk2 = from_graph(complete(2))
    sq = oprod(wk2, wk2)
    assert sq(0.1, 0.2) == 0.5 and sq(0.1, 0.8) == 0.0
    # int 1{x+z<=1} 1{z+y<=1} dz = 1 - max(x, y)
    hh = oprod(half(), half(), m=512)
    x, y = 0.2, 0.5
    assert abs(hh(x, y) - (1 - max(x, y))) < 4 / 512


def test_pprod():
    a, b = _rand_step(7)[0], _rand_step(8)[0]
    p = pprod(a, b)
    xs = np.random.default_rng(1).random((100, 2))
    assert np.allclose(p(xs[:, 0], xs[:, 1]), a(xs[:, 0], xs[:, 1]) * b(xs[:, 0], xs[:, 1]))
    assert p.step.exact
    assert t_exact_step(K2, p).exact == t_exact_step(K2, pprod(b, a)).exact


def test_levelset_matches_half():
    ls = levelset([(0, 0, 1), (1, 0, -1), (0, 1, -1)])
    xs = np.random.default_rng(2).random((1000, 2))
    assert np.array_equal(ls(xs[:, 0], xs[:, 1]), half()(xs[:, 0], xs[:, 1]))
    assert abs(ls.boundary(0.3) - 0.7) < 1e-12
    with pytest.raises(GraphonError):
        levelset([(1, 0, 1)])


@pytest.mark.parametrize("make", [
    half,
    lambda: levelset([(0, 0, 1), (2, 0, -1), (0, 2, -1)]),
    lambda: dsum([(F(1, 4), half()), (F(3, 4), const(F(1, 3)))]),
    lambda: tensor(half(), const(F(1, 2))),
    binary_graphon,
    lambda: complement(half()),
])
def test_symmetry(make):
    assert symmetry_check(make())
