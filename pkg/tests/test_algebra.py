from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphonlab.algebra import (IllegitimatePartitionError, color_expand, contract, power_unlabel,
                                product, razborov, unlabel, unlabel_square_free)
from graphonlab.density import t_exact_step, t_mc, tk_eval
from graphonlab.graphon import const, from_graph, half, step
from graphonlab.graphs import (A1, BLUE, C2_HAT, C4, K2, K3, P3, P4_HAT, RED, Graph, GraphError, Partition,
                               QuantumGraph, canonicalize, complete, cycle, path)
from oracles import brute_step_density, random_rational_step

E2 = Graph(2, ((0, 1, BLUE),), (0, 1))
N2 = Graph(2, (), (0, 1))
P3_ENDS = Graph(3, ((0, 1, BLUE), (1, 2, BLUE)), (0, 2))
C4_OPP = Graph(4, C4.edges, (0, 2))


def _rand_step(seed, **kw):
    w, v = random_rational_step(np.random.default_rng(seed), **kw)
    return step(w, v), w, v


def test_product_of_rooted_edges_is_rooted_path():
    prod = product(A1, A1)
    assert prod == QuantumGraph.of(path(3).with_labels((1,)))


def test_product_of_labeled_edges():
    double = product(E2, E2)
    assert double == QuantumGraph.of(Graph(2, ((0, 1), (0, 1)), (0, 1)))
    assert product(E2, E2, simple=True) == QuantumGraph.of(E2)


def test_product_label_mismatch():
    with pytest.raises(GraphError):
        product(A1, E2)


@pytest.mark.parametrize("seed", range(3))
def test_product_is_multiplicative_pointwise(seed):
    w, _, _ = _rand_step(seed)
    f1 = QuantumGraph.of(P3_ENDS) + QuantumGraph.of(E2, Fraction(1, 3))
    f2 = QuantumGraph.of(C4_OPP) - QuantumGraph.of(N2, Fraction(1, 5))
    rng = np.random.default_rng(seed)
    for x in rng.random((10, 2)):
        lhs = tk_eval(product(f1, f2), w, x).exact
        assert lhs == tk_eval(f1, w, x).exact * tk_eval(f2, w, x).exact


def test_simple_product_multiplicative_on_zero_one():
    w = from_graph(cycle(5))
    rng = np.random.default_rng(1)
    for x in rng.random((10, 2)):
        lhs = tk_eval(product(P3_ENDS, E2, simple=True), w, x).exact
        assert lhs == tk_eval(P3_ENDS, w, x).exact * tk_eval(E2, w, x).exact


def test_contract_examples():
    merged = contract(P3_ENDS, Partition(({1, 2},)))
    assert merged == QuantumGraph.of(Graph(2, ((0, 1), (0, 1)), (0,)))
    with pytest.raises(IllegitimatePartitionError):
        contract(E2, Partition(({1, 2},)))
    pair = contract(C4_OPP, Partition(({1, 2},)))
    assert pair == QuantumGraph.of(Graph(3, ((0, 1), (0, 1), (0, 2), (0, 2)), (0,)))


def test_contraction_soundness():
    cliques = step([Fraction(1, 2)] * 2, [[1, 0], [0, 1]])
    f = QuantumGraph.of(C4_OPP) - QuantumGraph.of(P3_ENDS, Fraction(1, 2))
    for x in ((0.1, 0.2), (0.1, 0.8), (0.7, 0.9)):
        assert tk_eval(f, cliques, x).exact == 0
    g = contract(f, Partition(({1, 2},)))
    for x in (0.1, 0.6):
        assert tk_eval(g, cliques, (x,)).exact == 0
    q = const(Fraction(1, 2))
    f = QuantumGraph.of(P3_ENDS) - QuantumGraph.of(N2, Fraction(1, 4))
    assert tk_eval(contract(f, Partition(({1, 2},))), q, (0.3,)).exact == 0


def test_unlabel_examples():
    assert unlabel(A1) == QuantumGraph.of(K2)
    assert unlabel(A1, positions=()) == QuantumGraph.of(A1)
    with pytest.raises(GraphError):
        unlabel(A1, positions=(2,))
    # the integral of the rooted degree of the half-graphon is its edge density
    assert t_mc(unlabel(A1), half(), n=200_000).within(0.5, 3)
    for x in (0.1, 0.5, 0.8):
        assert tk_eval(A1, half(), (x,), n=200_000, seed=3).within(1 - x, 4)


def test_unlabel_repacks_positions():
    g = Graph(3, ((0, 1), (1, 2)), (2, 0, 1))
    h = unlabel(g, positions=(2,))
    assert h.k == 2
    (only, _), = list(h)
    assert only == canonicalize(Graph(3, ((0, 1), (1, 2)), (2, 1)))


def test_power_unlabel_examples():
    assert power_unlabel(A1, 2) == QuantumGraph.of(P3)
    assert power_unlabel(QuantumGraph.of(A1) - QuantumGraph.of(A1), 2) == QuantumGraph.zero(0)
    with pytest.raises(ValueError):
        power_unlabel(A1, 3)


@pytest.mark.parametrize("seed", range(4))
def test_power_unlabel_is_integral_of_square(seed):
    w, wts, vals = _rand_step(seed)
    f = QuantumGraph.of(path(3).with_labels((0,))) - QuantumGraph.of(A1, Fraction(1, 2))
    got = t_exact_step(power_unlabel(f, 2), w).exact
    want = Fraction(0)
    for b, p in enumerate(wts):
        t1 = (brute_step_density(((0, 1, "b"), (1, 2, "b")), 3, wts, vals, labels=(0,), at=(b,))
              - Fraction(1, 2) * brute_step_density(((0, 1, "b"),), 2, wts, vals, labels=(0,), at=(b,)))
        want += p * t1 * t1
    assert got == want and got >= 0


def test_square_free_k1_is_path():
    assert unlabel_square_free(A1) == QuantumGraph.of(P3)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_square_free_node_count_and_simplicity(k):
    F = complete(3).with_labels(tuple(range(k)))
    out = unlabel_square_free(F)
    (g, c), = list(out)
    assert c == 1
    assert g.n == 2 ** k * F.n - k * 2 ** (k - 1)
    assert g.is_simple and g.k == 0


def test_square_free_rejects_multigraph():
    with pytest.raises(GraphError):
        unlabel_square_free(Graph(2, ((0, 1), (0, 1)), (0,)))


def test_color_expand_examples():
    assert color_expand(C2_HAT) == QuantumGraph.of(E2) - QuantumGraph.of(Graph(2, ((0, 1), (0, 1)), (0, 1)))
    assert color_expand(C4) == QuantumGraph.of(C4)
    expanded = color_expand(P4_HAT)
    assert sum(abs(c) for _, c in expanded) == 8
    assert all(g.is_blue for g, _ in expanded)


@pytest.mark.parametrize("seed", range(5))
def test_sieve_matches_colored_density(seed):
    w, wts, vals = _rand_step(seed)
    direct = brute_step_density(P4_HAT.edges, 4, wts, vals)
    assert t_exact_step(color_expand(P4_HAT), w).exact == direct
    assert t_exact_step(P4_HAT, w).exact == direct


def test_razborov_examples():
    assert razborov(K3, "dag") == QuantumGraph.of(K3.with_labels((0,)), 3)
    assert razborov(K2, "ddag") == QuantumGraph.of(N2)
    p = path(3)
    assert razborov(p, "dag") == QuantumGraph.of(p.with_labels((1,))) + QuantumGraph.of(p.with_labels((0,)), 2)
    with pytest.raises(GraphError):
        razborov(A1, "dag")
    with pytest.raises(GraphError):
        razborov(Graph(2, ((0, 1, RED),)), "dag")


@given(st.integers(0, 10 ** 6), st.lists(st.fractions(-3, 3, max_denominator=6), min_size=4, max_size=4))
def test_density_is_linear(seed, cs):
    w, _, _ = _rand_step(seed)
    gs = [K2, P3, K3, C4]
    q = QuantumGraph(list(zip(gs, cs)), k=0)
    want = sum(c * t_exact_step(g, w).exact for g, c in zip(gs, cs))
    assert t_exact_step(q, w, rational=True).exact == want
