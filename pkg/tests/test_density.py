import os
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphonlab.density import (DensityCapError, Step1D, csv_header, csv_row, density, finite_rank_density,
                                finite_rank_graphon, moments, t_exact_step, t_mc, tk_eval, tk_is_zero,
                                variational_check)
from graphonlab.graphon import GraphonError, const, from_graph, half, step
from graphonlab.graphs import (A1, C4, C4_HAT, K2, K3, P3, P4_HAT, Graph, GraphError, QuantumGraph, complete,
                               empty)
from graphonlab.algebra import color_expand
from graphonlab.cr import binary_graphon
from oracles import brute_step_density, random_rational_step

F = Fraction
GRAPHS = (K2, P3, K3, C4)


def _rand_step(seed, **kw):
    w, v = random_rational_step(np.random.default_rng(seed), **kw)
    return step(w, v), w, v


def _edges(g):
    return tuple((u, v, c) for u, v, c in g.edges)


def test_exact_examples():
    assert t_exact_step(C4, const(F(1, 2))).exact == F(1, 16)
    assert t_exact_step(K2, from_graph(complete(2))).exact == F(1, 2)
    for w in (const(F(1, 3)), _rand_step(0)[0]):
        assert t_exact_step(empty(3), w).exact == 1
    assert density(empty(3), half(), n=10).value == 1.0


@given(st.integers(0, 10 ** 6), st.sampled_from([K2, P3, K3, C4, C4_HAT, P4_HAT]))
def test_exact_matches_brute_force(seed, g):
    w, wts, vals = _rand_step(seed)
    assert t_exact_step(g, w).exact == brute_step_density(_edges(g), g.n, wts, vals)


def test_multi_edge_is_a_power():
    w, wts, vals = _rand_step(11)
    g = Graph(3, ((0, 1), (0, 1), (1, 2)))
    assert t_exact_step(g, w).exact == brute_step_density(_edges(g), 3, wts, vals)


def test_cap_is_enforced():
    w = step([F(1, 4)] * 4, np.full((4, 4), F(1, 2), dtype=object))
    with pytest.raises(DensityCapError):
        t_exact_step(complete(5), w, cap=100)
    assert t_exact_step(complete(5), w, cap=None).exact == F(1, 2) ** 10


def test_mc_examples():
    h = half()
    assert t_mc(K2, h).within(0.5, 3)
    assert t_mc(P3, h).within(1 / 3, 3)
    c4p = t_mc(C4_HAT, h, n=100_000)
    assert c4p.value == 0.0 and c4p.stderr == 0.0


def test_mc_is_unbiased_over_runs():
    runs = [t_mc(K2, half(), n=20_000, seed=s) for s in range(50)]
    mean = np.mean([r.value for r in runs])
    joint = np.sqrt(sum(r.stderr ** 2 for r in runs)) / len(runs)
    assert abs(mean - 0.5) <= 4 * joint


@pytest.mark.parametrize("seed", range(20))
def test_exact_and_mc_agree(seed):
    w = _rand_step(100 + seed)[0]
    for g in GRAPHS:
        ex = t_exact_step(g, w).value
        mc = t_mc(g, w, n=100_000, seed=seed)
        assert mc.within(ex, 4, floor=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_colored_mc_matches_sieve(seed):
    w = _rand_step(200 + seed)[0]
    sieve = t_exact_step(color_expand(P4_HAT), w).value
    assert t_mc(P4_HAT, w, n=200_000, seed=seed).within(sieve, 3, floor=1e-12)
    assert abs(t_exact_step(P4_HAT, w).value - sieve) <= 1e-10


def test_mc_is_deterministic_across_workers(monkeypatch):
    g = QuantumGraph.of(C4) - QuantumGraph.of(P3, F(1, 3))
    runs = []
    for workers in ("1", "4"):
        monkeypatch.setenv("GRAPHONLAB_THREADS", workers)
        runs.append(t_mc(g, half(), n=300_000, seed=9))
    assert runs[0] == runs[1]
    assert t_mc(g, half(), n=300_000, seed=9, workers=3) == runs[0]
    assert t_mc(g, half(), n=300_000, seed=10) != runs[0]


def test_tk_examples():
    ub = binary_graphon()
    for x in (0.05, 0.4, 0.77):
        assert tk_eval(A1, ub, (x,), n=200_000, seed=1).within(2 / 3, 4)
        assert tk_eval(A1, half(), (x,), n=200_000, seed=2).within(1 - x, 4)
    assert tk_eval(K2, half(), (), n=1000, seed=5) == t_mc(K2, half(), n=1000, seed=5)
    with pytest.raises(GraphError):
        tk_eval(A1, half(), (0.1, 0.2))
    with pytest.raises(GraphonError):
        tk_eval(A1, half(), (0.1,), method="exact")


def test_tk_exact_on_steps():
    w, wts, vals = _rand_step(3)
    x = 0.61
    b = int(w.step.block_of(np.array([x]))[0])
    want = brute_step_density(_edges(A1), 2, wts, vals, labels=(0,), at=(b,))
    assert tk_eval(A1, w, (x,)).exact == want


def test_tk_is_zero():
    cliques = step([F(1, 2)] * 2, [[1, 0], [0, 1]])
    p3 = Graph(3, ((0, 1), (1, 2)), (0, 2))
    e2 = Graph(2, ((0, 1),), (0, 1))
    f = QuantumGraph.of(p3) - QuantumGraph.of(e2, F(1, 2))
    ok, evidence = tk_is_zero(f, cliques, tuples=20)
    assert ok and len(evidence) == 20
    ok, _ = tk_is_zero(QuantumGraph.of(A1) - QuantumGraph.of(Graph(1, (), (0,)), F(1, 2)), half(), tuples=20)
    assert not ok


def test_moments_examples():
    assert abs(moments([lambda x: x], [2]) - 1 / 3) < 1e-14
    c = Step1D((F(1),), (F(2, 7),))
    assert moments([c], [5]) == F(2, 7) ** 5
    assert abs(moments([lambda x: x, lambda x: x ** 2], [1, 1]) - 0.25) < 1e-14
    s = Step1D((F(1, 3), F(2, 3)), (F(1), F(-1, 2)))
    assert moments([s, s], [1, 2]) == F(1, 3) + F(2, 3) * F(-1, 8)
    with pytest.raises(ValueError):
        moments([lambda x: x], [1, 2])


def test_finite_rank_examples():
    lam = (F(1, 2), F(1, 2))
    ws = [lambda x: np.ones_like(np.asarray(x, dtype=float)), lambda x: 2 * np.asarray(x) - 1]
    assert abs(finite_rank_density(K2, lam, ws) - 0.5) < 1e-14
    assert abs(finite_rank_density(C4, (1,), [lambda x: x]) - (1 / 3) ** 4) < 1e-14
    w = finite_rank_graphon(lam, ws)
    assert t_mc(C4, w, n=400_000).within(finite_rank_density(C4, lam, ws), 3)
    with pytest.raises(GraphError):
        finite_rank_density(Graph(2, ((0, 1), (0, 1))), lam, ws)
    with pytest.raises(DensityCapError):
        finite_rank_density(complete(6), (1, 1, 1), ws + ws[:1], cap=1000)


def test_finite_rank_matches_exact_on_step():
    # rank-2 stepfunction: the expansion and the direct sum are both exact
    u = Step1D((F(1, 2), F(1, 2)), (F(1), F(-1)))
    one = Step1D((F(1),), (F(1),))
    lam = (F(1, 2), F(1, 4))
    w = step([F(1, 2)] * 2, [[F(3, 4), F(1, 4)], [F(1, 4), F(3, 4)]])
    for g in GRAPHS:
        assert finite_rank_density(g, lam, [one, u]) == t_exact_step(g, w).exact


def test_variational_examples():
    lhs, rhs, rel = variational_check(K2, const(F(1, 2)), const(F(1)))
    assert lhs == rhs == 1.0 and rel == 0
    lhs, rhs, _ = variational_check(P3, const(F(1, 2)), const(F(1)))
    assert rhs == 1.0 and abs(lhs - 1) < 1e-6
    rng = np.random.default_rng(4)
    wts, vals = random_rational_step(rng, lo=2, hi=10)
    _, dv = random_rational_step(rng)
    w, d = step(wts, vals), step(wts, dv)
    assert variational_check(C4, w, d)[2] <= 1e-3
    with pytest.raises(GraphonError):
        variational_check(K2, w, const(1))


def test_csv_row_quotes():
    est = t_exact_step(K2, const(F(1, 2)))
    assert csv_header() == "graph,graphon,method,value,stderr,n,seed"
    row = csv_row("K2", "dsum(1/2:a, 1/2:b)", est)
    assert row.startswith('K2,"dsum(1/2:a, 1/2:b)",exact_step,0.5,')


def test_threads_env(monkeypatch):
    from graphonlab.density import threads
    monkeypatch.setenv("GRAPHONLAB_THREADS", "nope")
    assert threads() == 1
    monkeypatch.setenv("GRAPHONLAB_THREADS", "3")
    assert threads() == 3
    assert os.environ["GRAPHONLAB_THREADS"] == "3"
