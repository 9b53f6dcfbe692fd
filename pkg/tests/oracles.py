"""Independent brute-force oracles used to freeze derived values.

None of these go through the library's elimination or sampling code."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def brute_step_density(edges, n, weights, values, labels=(), at=()):
    """Sum over every map of the unlabeled nodes to blocks; labeled nodes sit
    in the blocks ``at``.  ``edges`` are ``(u, v, color)`` with color 'b'/'r'."""
    m = len(weights)
    free = [v for v in range(n) if v not in labels]
    total = Fraction(0) if isinstance(weights[0], Fraction) else 0.0
    for assign in itertools.product(range(m), repeat=len(free)):
        blk = dict(zip(labels, at))
        blk.update(zip(free, assign))
        term = 1
        for v in free:
            term = term * weights[blk[v]]
        for u, v, c in edges:
            val = values[blk[u]][blk[v]]
            term = term * (val if c == "b" else 1 - val)
        total = total + term
    return total


def brute_hom_density(edges, n, adj):
    """``hom(F, G) / |V(G)|^n`` by enumerating every map."""
    N = len(adj)
    count = 0
    for phi in itertools.product(range(N), repeat=n):
        ok = True
        for u, v, c in edges:
            a = adj[phi[u]][phi[v]]
            if (c == "b" and not a) or (c == "r" and a):
                ok = False
                break
        count += ok
    return Fraction(count, N ** n)


def brute_isomorphic(g, h):
    """Label-preserving isomorphism test by trying every permutation."""
    if g.n != h.n or len(g.labels) != len(h.labels):
        return False
    if len(g.edges) != len(h.edges):
        return False
    target = sorted(h.edges)
    for perm in itertools.permutations(range(g.n)):
        if any(perm[a] != b for a, b in zip(g.labels, h.labels)):
            continue
        mapped = sorted((min(perm[u], perm[v]), max(perm[u], perm[v]), c) for u, v, c in g.edges)
        if mapped == target:
            return True
    return False


def random_rational_step(rng, m=3, denom=12, lo=0, hi=None):
    hi = denom if hi is None else hi
    cuts = sorted(rng.choice(np.arange(1, denom), size=m - 1, replace=False).tolist())
    pts = [0, *cuts, denom]
    weights = [Fraction(b - a, denom) for a, b in zip(pts[:-1], pts[1:])]
    vals = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            vals[i][j] = vals[j][i] = Fraction(int(rng.integers(lo, hi + 1)), denom)
    return weights, vals
