"""Finite labeled, 2-edge-colored multigraphs and quantum graphs.

Nodes are 0-based internally.  An edge is a triple ``(u, v, color)`` with
``u < v`` and ``color`` in ``{"b", "r"}`` (blue edges contribute ``W``, red
edges ``1 - W``).  Repeating an edge triple encodes multiplicity.  Label
position ``i + 1`` sits on node ``labels[i]``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Iterator, Mapping

BLUE = "b"
RED = "r"
COLORS = (BLUE, RED)
MAX_CANON_NODES = 12


class GraphError(ValueError):
    pass


class SizeLimitError(GraphError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple = ()
    labels: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("a graph needs at least one node")
        norm = []
        for e in self.edges:
            if len(e) == 2:
                u, v, c = e[0], e[1], BLUE
            else:
                u, v, c = e
            if c not in COLORS:
                raise GraphError(f"unknown edge color {c!r}")
            if u == v:
                raise GraphError(f"loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge {(u, v)} outside 0..{self.n - 1}")
            norm.append((min(u, v), max(u, v), c))
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        labels = tuple(int(x) for x in self.labels)
        if len(set(labels)) != len(labels):
            raise GraphError("label map is not injective")
        if any(not 0 <= x < self.n for x in labels):
            raise GraphError("label on a nonexistent node")
        object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def is_simple(self) -> bool:
        pairs = Counter((u, v) for u, v, _ in self.edges)
        return all(m == 1 for m in pairs.values())

    @property
    def is_blue(self) -> bool:
        return all(c == BLUE for _, _, c in self.edges)

    @property
    def unlabeled_nodes(self) -> list[int]:
        lab = set(self.labels)
        return [v for v in range(self.n) if v not in lab]

    def edge_counts(self) -> Counter:
        return Counter(self.edges)

    def pair_counts(self) -> dict[tuple[int, int], tuple[int, int]]:
        """Map ``(u, v)`` to ``(blue multiplicity, red multiplicity)``."""
        out: dict[tuple[int, int], list[int]] = {}
        for u, v, c in self.edges:
            slot = out.setdefault((u, v), [0, 0])
            slot[0 if c == BLUE else 1] += 1
        return {p: (b, r) for p, (b, r) in out.items()}

    def relabel(self, perm: Mapping[int, int] | list[int]) -> "Graph":
        """Move node ``v`` to ``perm[v]``."""
        return Graph(self.n, tuple((perm[u], perm[v], c) for u, v, c in self.edges),
                     tuple(perm[x] for x in self.labels))

    def with_labels(self, labels: Iterable[int]) -> "Graph":
        return Graph(self.n, self.edges, tuple(labels))

    def canonical(self) -> "Graph":
        return canonicalize(self)

    def __str__(self):
        es = " ".join(f"{u + 1}{'-' if c == BLUE else '~'}{v + 1}" for u, v, c in self.edges)
        lab = ",".join(str(x + 1) for x in self.labels)
        return f"Graph(n={self.n}, [{es}]" + (f", labels={lab})" if lab else ")")


def canonicalize(g: Graph) -> Graph:
    """Canonical representative of ``g`` up to label-preserving isomorphism.

    Labeled nodes go to positions ``0..k-1`` in label order.  The unlabeled
    nodes are ordered so that the column-wise upper-triangle encoding of
    ``(-blue, -red)`` multiplicities is lexicographically minimal.  The
    search is exhaustive; it only discards branches that provably cannot
    reach the minimum (worse next column, or a swap of twin nodes).
    """
    if g.n > MAX_CANON_NODES:
        raise SizeLimitError(f"canonical form limited to {MAX_CANON_NODES} nodes, got {g.n}")
    return _canon_cached(g)


@lru_cache(maxsize=200_000)
def _canon_cached(g: Graph) -> Graph:
    n = g.n
    pc = g.pair_counts()
    adj = [[(0, 0)] * n for _ in range(n)]
    for (u, v), (b, r) in pc.items():
        adj[u][v] = adj[v][u] = (-b, -r)
    fixed = list(g.labels)
    free = g.unlabeled_nodes

    best: list = [None, None]  # encoding-as-list-of-columns, order

    def twins(a: int, b: int) -> bool:
        for w in range(n):
            if w != a and w != b and adj[a][w] != adj[b][w]:
                return False
        return True

    def search(order: list[int], cols: list[tuple], rest: list[int]):
        if not rest:
            if best[0] is None or cols < best[0]:
                best[0], best[1] = list(cols), list(order)
            return
        j = len(order)
        cand = []
        for v in rest:
            cand.append((tuple(adj[order[i]][v] for i in range(j)), v))
        mincol = min(c for c, _ in cand)
        if best[0] is not None:
            prefix = cols + [mincol]
            bp = best[0][: len(prefix)]
            if prefix > bp:
                return
        tried: list[int] = []
        for col, v in cand:
            if col != mincol:
                continue
            if any(twins(v, t) for t in tried):
                continue
            tried.append(v)
            nxt = [x for x in rest if x != v]
            search(order + [v], cols + [col], nxt)

    base_cols = [tuple(adj[fixed[i]][fixed[j]] for i in range(j)) for j in range(len(fixed))]
    search(list(fixed), base_cols, free)
    order = best[1]
    perm = {v: i for i, v in enumerate(order)}
    out = g.relabel(perm)
    return Graph(out.n, out.edges, tuple(range(g.k)))


def are_isomorphic(g: Graph, h: Graph) -> bool:
    return g.k == h.k and canonicalize(g) == canonicalize(h)


def _coerce(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)) and not isinstance(c, bool):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    return float(c)


class QuantumGraph:
    """Formal linear combination of canonical ``k``-labeled graphs.

    Coefficients are ``Fraction`` whenever the algebra allows it; any float
    coefficient marks the quantum graph as inexact.
    """

    __slots__ = ("_terms", "k")

    def __init__(self, terms: Mapping[Graph, object] | Iterable[tuple[Graph, object]] | None = None,
                 k: int | None = None):
        acc: dict[Graph, object] = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or [])
        for g, c in items:
            c = _coerce(c)
            if k is None:
                k = g.k
            elif g.k != k:
                raise GraphError(f"mixed label counts {k} and {g.k} in one quantum graph")
            key = canonicalize(g)
            acc[key] = acc.get(key, Fraction(0)) + c
        self._terms = {g: c for g, c in acc.items() if c != 0}
        self.k = 0 if k is None else k

    @classmethod
    def of(cls, g: Graph, coeff=1) -> "QuantumGraph":
        return cls({g: coeff}, k=g.k)

    @classmethod
    def zero(cls, k: int = 0) -> "QuantumGraph":
        return cls({}, k=k)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._terms.values())

    def items(self):
        return self._terms.items()

    def graphs(self) -> list[Graph]:
        return list(self._terms)

    def coeff(self, g: Graph):
        return self._terms.get(canonicalize(g), Fraction(0))

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[Graph, object]]:
        return iter(self._terms.items())

    def __bool__(self):
        return bool(self._terms)

    def _check_k(self, other: "QuantumGraph"):
        if self._terms and other._terms and self.k != other.k:
            raise GraphError(f"label counts differ: {self.k} vs {other.k}")

    def __add__(self, other):
        other = as_quantum(other)
        self._check_k(other)
        k = self.k if self._terms else other.k
        return QuantumGraph(list(self._terms.items()) + list(other._terms.items()), k=k)

    def __neg__(self):
        return QuantumGraph({g: -c for g, c in self._terms.items()}, k=self.k)

    def __sub__(self, other):
        return self + (-as_quantum(other))

    def scale(self, c) -> "QuantumGraph":
        c = _coerce(c)
        return QuantumGraph({g: c * v for g, v in self._terms.items()}, k=self.k)

    def __mul__(self, other):
        if isinstance(other, (QuantumGraph, Graph)):
            from .algebra import product
            return product(self, as_quantum(other))
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if isinstance(other, Graph):
            other = QuantumGraph.of(other)
        if not isinstance(other, QuantumGraph):
            return NotImplemented
        return self._terms == other._terms and (self.k == other.k or not self._terms)

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return f"QuantumGraph(0, k={self.k})"
        parts = [f"{c}*{g}" for g, c in self._terms.items()]
        return "QuantumGraph(" + " + ".join(parts) + ")"


def as_quantum(x) -> QuantumGraph:
    if isinstance(x, QuantumGraph):
        return x
    if isinstance(x, Graph):
        return QuantumGraph.of(x)
    raise TypeError(f"cannot use {type(x).__name__} as a quantum graph")


@dataclass(frozen=True)
class Partition:
    """Blocks over label positions ``1..k`` (1-based, as in the text format)."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        if any(not b for b in blocks):
            raise GraphError("empty block in partition")
        seen: set = set()
        for b in blocks:
            if seen & b:
                raise GraphError("partition blocks overlap")
            seen |= b
        if seen != set(range(1, len(seen) + 1)):
            raise GraphError("partition blocks must cover 1..k")
        object.__setattr__(self, "blocks", blocks)

    @property
    def k(self) -> int:
        return sum(len(b) for b in self.blocks)


# -- small named graphs ------------------------------------------------------

def complete(n: int, labels=()) -> Graph:
    return Graph(n, tuple((i, j, BLUE) for i in range(n) for j in range(i + 1, n)), labels)


def path(n: int, labels=()) -> Graph:
    return Graph(n, tuple((i, i + 1, BLUE) for i in range(n - 1)), labels)


def cycle(n: int, labels=()) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n, BLUE) for i in range(n)), labels)


def empty(n: int, labels=()) -> Graph:
    return Graph(n, (), labels)


def complete_bipartite(a: int, b: int) -> Graph:
    """``K_{a,b}``; with ``a == 0`` or ``b == 0`` this is an edgeless graph."""
    n = max(a + b, 1)
    return Graph(n, tuple((i, a + j, BLUE) for i in range(a) for j in range(b)))


def disjoint_union(*gs: Graph) -> Graph:
    edges, off = [], 0
    for g in gs:
        edges += [(u + off, v + off, c) for u, v, c in g.edges]
        off += g.n
    return Graph(off, tuple(edges))


def colored_complete(g: Graph) -> Graph:
    """Complete graph on ``V(g)``: edges of ``g`` blue, non-edges red."""
    present = {(u, v) for u, v, _ in g.edges}
    extra = tuple((i, j, RED) for i in range(g.n) for j in range(i + 1, g.n) if (i, j) not in present)
    return Graph(g.n, g.edges + extra, g.labels)


def swap_colors(g: Graph) -> Graph:
    return Graph(g.n, tuple((u, v, RED if c == BLUE else BLUE) for u, v, c in g.edges), g.labels)


K2 = complete(2)
K3 = complete(3)
P3 = path(3)
C4 = cycle(4)
# 1-labeled edge
A1 = Graph(2, ((0, 1, BLUE),), (0,))
# 4-cycle with two opposite edges red
C4_HAT = Graph(4, ((0, 1, BLUE), (1, 2, RED), (2, 3, BLUE), (0, 3, RED)))
# K4 with a 3-edge path red and the rest blue: no induced P4
P4_HAT = Graph(4, ((0, 1, RED), (1, 2, RED), (2, 3, RED), (0, 2, BLUE), (1, 3, BLUE), (0, 3, BLUE)))
# two nodes joined by 2 blue and 2 red parallel edges
B4_HAT = Graph(2, ((0, 1, BLUE), (0, 1, BLUE), (0, 1, RED), (0, 1, RED)))
C2_HAT = Graph(2, ((0, 1, BLUE), (0, 1, RED)), (0, 1))
