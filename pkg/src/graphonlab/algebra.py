"""Structural operations on (quantum) graphs: gluing products, contraction,
unlabeling, the colored sieve, and Razborov's derivative operators."""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

from .graphs import (BLUE, RED, Graph, GraphError, Partition, QuantumGraph,
                     as_quantum, canonicalize)


class IllegitimatePartitionError(GraphError):
    pass


def glue(g1: Graph, g2: Graph, simple: bool = False) -> Graph:
    """Disjoint union of two k-labeled graphs with equal labels identified."""
    if g1.k != g2.k:
        raise GraphError(f"cannot glue a {g1.k}-labeled and a {g2.k}-labeled graph")
    g1, g2 = canonicalize(g1), canonicalize(g2)
    k = g1.k
    # labeled nodes are 0..k-1 in both canonical forms
    shift = g1.n - k
    m2 = {v: (v if v < k else v + shift) for v in range(g2.n)}
    edges = list(g1.edges) + [(m2[u], m2[v], c) for u, v, c in g2.edges]
    if simple:
        edges = sorted(set(edges))
    return Graph(g1.n + g2.n - k, tuple(edges), tuple(range(k)))


def product(f1, f2, simple: bool = False) -> QuantumGraph:
    """Bilinear gluing product of two k-labeled quantum graphs.

    With ``simple=True`` parallel edges are collapsed after gluing.
    """
    f1, f2 = as_quantum(f1), as_quantum(f2)
    if f1 and f2 and f1.k != f2.k:
        raise GraphError(f"label counts differ: {f1.k} vs {f2.k}")
    for f in (f1, f2):
        for g, _ in f:
            if not g.is_blue:
                raise GraphError("products are defined for blue graphs only")
    k = f1.k if f1 else f2.k
    out = []
    for g1, c1 in f1:
        for g2, c2 in f2:
            out.append((glue(g1, g2, simple), c1 * c2))
    return QuantumGraph(out, k=k)


def power(f, r: int) -> QuantumGraph:
    f = as_quantum(f)
    if r < 1:
        raise ValueError("power needs r >= 1")
    out = f
    for _ in range(r - 1):
        out = product(out, f)
    return out


def contract_graph(g: Graph, p: Partition) -> Graph:
    if p.k != g.k:
        raise GraphError(f"partition covers {p.k} labels, graph has {g.k}")
    node_of = {}
    for bi, block in enumerate(p.blocks):
        nodes = [g.labels[pos - 1] for pos in block]
        for u, v, _ in g.edges:
            if u in nodes and v in nodes:
                raise IllegitimatePartitionError(
                    f"block {sorted(block)} is not independent in {g}")
        for x in nodes:
            node_of[x] = bi
    m = len(p.blocks)
    nxt = m
    for v in g.unlabeled_nodes:
        node_of[v] = nxt
        nxt += 1
    edges = tuple((node_of[u], node_of[v], c) for u, v, c in g.edges)
    return Graph(nxt, edges, tuple(range(m)))


def contract(f, p: Partition) -> QuantumGraph:
    """Merge the labeled nodes in each block; merged node gets the block index."""
    f = as_quantum(f)
    return QuantumGraph([(contract_graph(g, p), c) for g, c in f], k=len(p.blocks))


def unlabel_graph(g: Graph, positions) -> Graph:
    positions = set(positions)
    bad = [x for x in positions if not 1 <= x <= g.k]
    if bad:
        raise GraphError(f"unknown label positions {sorted(bad)} (graph has {g.k})")
    keep = tuple(node for i, node in enumerate(g.labels) if i + 1 not in positions)
    return Graph(g.n, g.edges, keep)


def unlabel(f, positions=None) -> QuantumGraph:
    """Drop the given label positions (all of them by default)."""
    f = as_quantum(f)
    if positions is None:
        positions = range(1, f.k + 1)
    positions = set(positions)
    bad = [x for x in positions if not 1 <= x <= f.k]
    if bad:
        raise GraphError(f"unknown label positions {sorted(bad)}")
    return QuantumGraph([(unlabel_graph(g, positions), c) for g, c in f], k=f.k - len(positions))


def power_unlabel(f, r: int) -> QuantumGraph:
    """Unlabeled ``f**r``; its density vanishes iff ``t^k(f, W)`` is 0 a.e. (r even)."""
    if r <= 0 or r % 2:
        raise ValueError(f"r must be a positive even integer, got {r}")
    f = as_quantum(f)
    if not f:
        return QuantumGraph.zero(0)
    return unlabel(power(f, r))


def _square_free_glue(graphs: list[Graph], k: int) -> Graph:
    """Glue copies indexed by subsets X of [k]; copy X's label i is shared with
    copy X ^ {i}.  ``graphs[X]`` is the term placed in copy X (X as bitmask)."""
    cls = {}
    for x in range(1 << k):
        for i in range(k):
            key = (x & ~(1 << i), i)
            cls.setdefault(key, len(cls))
    nxt = len(cls)
    edges = []
    for x, g in enumerate(graphs):
        g = canonicalize(g)
        loc = {}
        for i in range(k):
            loc[i] = cls[(x & ~(1 << i), i)]
        for v in range(k, g.n):
            loc[v] = nxt
            nxt += 1
        edges += [(loc[u], loc[v], c) for u, v, c in g.edges]
    return Graph(nxt, tuple(edges))


def unlabel_square_free(f) -> QuantumGraph:
    """Unlabeled quantum graph built from ``2**k`` glued copies of ``f``.

    Two copies share one node exactly when their index sets differ in one
    element, so a simple ``f`` yields a simple result.
    """
    f = as_quantum(f)
    k = f.k
    if k < 1:
        raise GraphError("unlabel_square_free needs k >= 1")
    terms = list(f)
    for g, _ in terms:
        if not g.is_simple:
            raise GraphError(f"term {g} has parallel edges")
    out = []
    for choice in itertools.product(range(len(terms)), repeat=1 << k):
        coeff = Fraction(1)
        for j in choice:
            coeff = coeff * terms[j][1]
        out.append((_square_free_glue([terms[j][0] for j in choice], k), coeff))
    return QuantumGraph(out, k=0)


def color_expand(g) -> QuantumGraph:
    """Sieve a 2-edge-colored graph into a signed sum of blue graphs."""
    if isinstance(g, QuantumGraph):
        acc = QuantumGraph.zero(g.k)
        for h, c in g:
            acc = acc + color_expand(h).scale(c)
        return acc
    blue = [(u, v, BLUE) for u, v, c in g.edges if c == BLUE]
    red = [(u, v, BLUE) for u, v, c in g.edges if c == RED]
    out = []
    for r in range(len(red) + 1):
        for ys in itertools.combinations(range(len(red)), r):
            es = tuple(blue + [red[i] for i in ys])
            out.append((Graph(g.n, es, g.labels), (-1) ** r))
    return QuantumGraph(out, k=g.k)


def _check_razborov_input(g: Graph):
    if g.k:
        raise GraphError("Razborov operators take unlabeled graphs")
    if not g.is_blue:
        raise GraphError("Razborov operators take blue graphs")
    if not g.is_simple:
        raise GraphError("Razborov operators take simple graphs")


def razborov(g, mode: str = "dag") -> QuantumGraph:
    """``dag``: sum over nodes labeled 1.  ``ddag``: sum over unordered edges
    ``ij`` of ``(F^ij + F^ji) / 2`` with the edge deleted and ``i, j`` labeled."""
    if isinstance(g, QuantumGraph):
        acc = QuantumGraph.zero(1 if mode == "dag" else 2)
        for h, c in g:
            acc = acc + razborov(h, mode).scale(c)
        return acc
    _check_razborov_input(g)
    if mode == "dag":
        return QuantumGraph([(g.with_labels((i,)), 1) for i in range(g.n)], k=1)
    if mode == "ddag":
        out = []
        for idx, (i, j, _) in enumerate(g.edges):
            rest = g.edges[:idx] + g.edges[idx + 1:]
            out.append((Graph(g.n, rest, (i, j)), Fraction(1, 2)))
            out.append((Graph(g.n, rest, (j, i)), Fraction(1, 2)))
        return QuantumGraph(out, k=2)
    raise ValueError(f"unknown mode {mode!r}; use 'dag' or 'ddag'")


def swap_labels(g: Graph) -> Graph:
    if g.k != 2:
        raise GraphError("label swap needs a 2-labeled graph")
    return g.with_labels((g.labels[1], g.labels[0]))


def edge_multiplicities(g: Graph) -> Counter:
    return Counter((u, v) for u, v, _ in g.edges)
