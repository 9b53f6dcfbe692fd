from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import brentq

from graphonlab.graphon import GraphonError, complement, const, discretize, from_graph, half, step
from graphonlab.graphs import complete
from graphonlab.spectral import Polynomial, eigendecompose, reconstruct, spectral_solve
from oracles import random_rational_step

F = Fraction


def test_const_has_one_eigenvalue():
    pairs = eigendecompose(const(F(1, 2)))
    assert len(pairs) == 1
    assert abs(pairs[0].value - 0.5) < 1e-15
    assert np.allclose(np.abs(pairs[0].vector), 1.0)


def test_graph_k2_eigenvalues():
    vals = sorted(e.value for e in eigendecompose(from_graph(complete(2))))
    assert np.allclose(vals, [-0.5, 0.5])


def test_discretize_examples():
    d = discretize(const(F(2, 7)), 5)
    assert np.allclose(d.step.vf, 2 / 7)
    h = discretize(half(), 2).step.vf
    assert np.all(np.abs(h - [[1, 0.5], [0.5, 0]]) <= 0.2)


@pytest.mark.parametrize("seed", range(5))
def test_reconstruction(seed):
    rng = np.random.default_rng(seed)
    w = step(*random_rational_step(rng, m=int(rng.integers(2, 7)), denom=60))
    pairs = eigendecompose(w)
    p = w.step.wf
    diff = reconstruct(pairs) - w.step.vf
    assert np.sqrt(np.sum(p[:, None] * p[None, :] * diff ** 2)) <= 1e-8
    # L2-orthonormal eigenfunctions
    gram = np.array([[np.sum(p * a.vector * b.vector) for b in pairs] for a in pairs])
    assert np.allclose(gram, np.eye(len(pairs)), atol=1e-12)
    assert all(abs(a.value) >= abs(b.value) for a, b in zip(pairs, pairs[1:]))


def test_complement_half_spectrum():
    # the eigenvalues of the kernel 1{x+y>1} are (-1)^k 2/(pi (2k+1))
    pairs = eigendecompose(discretize(complement(half()), 512))
    pos = sorted((e.value for e in pairs if e.value > 0), reverse=True)[:3]
    want = [2 / (np.pi * (4 * k + 1)) for k in range(3)]
    assert np.allclose(pos, want, rtol=5e-3)


def test_identity_polynomial():
    w = step(*random_rational_step(np.random.default_rng(1)))
    out = spectral_solve(w, [1])
    assert np.max(np.abs(out.step.vf - w.step.vf)) <= 1e-8


def test_cubic_solve():
    u = discretize(complement(half()), 128)
    w = spectral_solve(u, [1, 0, 1])
    top = max(e.value for e in eigendecompose(w))
    mu = max(e.value for e in eigendecompose(u))
    assert abs(top ** 3 + top - mu) <= 1e-12
    forward = Polynomial([1, 0, 1]).apply_step(w)
    assert np.max(np.abs(forward - u.step.vf)) <= 1e-6
    root = brentq(lambda z: z ** 3 + z - 2 / np.pi, 0, 1)
    assert abs(top - root) <= 1e-3


def test_non_bijective_rejected():
    u = const(F(1, 2))
    for coeffs in ([0, 1], [1, 0, -1], [-1, 0, 0], [-3, 0, 1], [0, 0]):
        with pytest.raises(GraphonError):
            spectral_solve(u, coeffs)
    with pytest.raises(GraphonError):
        spectral_solve(half(), [1])


def test_polynomial_inverse():
    p = Polynomial([1, 0, 1])
    for y in (-5.0, -0.3, 0.0, 0.7, 40.0):
        assert abs(p(p.inverse(y)) - y) <= 1e-12
