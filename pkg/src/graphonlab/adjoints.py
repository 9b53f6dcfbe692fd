"""Operators on graphons and their density adjoints.

For an operator ``op`` acting on graphons, ``adjoint_map(F, op)`` is the
quantum graph ``F*`` with ``t(F, op(W)) = t(F*, W)`` for every ``W``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import swap_labels
from .graphon import (Graphon, GraphonError, affine, discretize, step, step_power, tensor,
                      tensor_power)
from .graphs import (Graph, GraphError, QuantumGraph, are_isomorphic, disjoint_union)

KINDS = ("scale", "shift", "tensor_fixed", "tensor_power", "poly_kernel", "edge_substitute")


class AsymmetricSubstituteError(GraphError):
    pass


@dataclass(frozen=True)
class OperatorDescriptor:
    """``kind`` is one of ``KINDS``; ``param`` is the scalar, graphon, power,
    coefficient tuple ``(a_1..a_n)`` or 2-labeled graph the kind needs."""

    kind: str
    param: object

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator {self.kind!r}")
        if self.kind == "tensor_power" and int(self.param) < 1:
            raise ValueError("tensor power needs k >= 1")
        if self.kind == "edge_substitute":
            h = self.param
            if h.k != 2:
                raise GraphError("edge substitute needs a 2-labeled graph")
            if not are_isomorphic(h, swap_labels(h)):
                raise AsymmetricSubstituteError(f"{h} has no automorphism swapping its labels")

    def __str__(self):
        p = self.param
        if isinstance(p, Graphon):
            p = p.name
        elif isinstance(p, tuple):
            p = ",".join(str(c) for c in p)
        return f"{self.kind}({p})"


def scale(lam) -> OperatorDescriptor:
    return OperatorDescriptor("scale", lam)


def shift(lam) -> OperatorDescriptor:
    return OperatorDescriptor("shift", lam)


def tensor_fixed(a: Graphon) -> OperatorDescriptor:
    return OperatorDescriptor("tensor_fixed", a)


def tensor_pow(k: int) -> OperatorDescriptor:
    return OperatorDescriptor("tensor_power", int(k))


def poly_kernel(coeffs) -> OperatorDescriptor:
    return OperatorDescriptor("poly_kernel", tuple(coeffs))


def edge_substitute(h: Graph) -> OperatorDescriptor:
    return OperatorDescriptor("edge_substitute", h)


def _subdivide(F: Graph, kappa) -> Graph:
    n = F.n
    edges = []
    for (u, v, c), k in zip(F.edges, kappa):
        chain = [u] + list(range(n, n + k - 1)) + [v]
        n += k - 1
        edges += [(a, b, c) for a, b in zip(chain[:-1], chain[1:])]
    return Graph(n, tuple(edges), F.labels)


def _substitute(F: Graph, h: Graph) -> Graph:
    n = F.n
    edges = []
    x, y = h.labels
    inner = [v for v in range(h.n) if v not in (x, y)]
    for u, v, _ in F.edges:
        loc = {x: u, y: v}
        for z in inner:
            loc[z] = n
            n += 1
        edges += [(loc[a], loc[b], c) for a, b, c in h.edges]
    return Graph(n, tuple(edges), F.labels)


def adjoint_map(F: Graph, op: OperatorDescriptor, density=None) -> QuantumGraph:
    """Quantum graph ``F*`` with ``t(F, op(W)) = t(F*, W)``.

    ``density`` computes ``t(F, A)`` for ``tensor_fixed``; by default the
    exact route is used when ``A`` is a stepfunction and Monte Carlo otherwise.
    """
    if not F.is_blue:
        raise GraphError("adjoints are defined for blue graphs")
    E = len(F.edges)
    p = op.param
    if op.kind == "scale":
        return QuantumGraph.of(F, _num(p) ** E)
    if op.kind == "shift":
        lam = _num(p)
        out = []
        for r in range(E + 1):
            for Z in itertools.combinations(F.edges, r):
                out.append((Graph(F.n, Z, F.labels), lam ** (E - r)))
        return QuantumGraph(out, k=F.k)
    if op.kind == "tensor_fixed":
        if density is None:
            from .density import density as _density
            est = _density(F, p)
            val = est.exact if est.exact is not None else est.value
        else:
            val = density(F, p)
        return QuantumGraph.of(F, val)
    if op.kind == "tensor_power":
        g = disjoint_union(*([F] * int(p)))
        return QuantumGraph.of(g.with_labels(F.labels) if F.k else g)
    if op.kind == "poly_kernel":
        coeffs = [_num(a) for a in p]
        out = []
        for kappa in itertools.product(range(1, len(coeffs) + 1), repeat=E):
            c = 1
            for k in kappa:
                c = c * coeffs[k - 1]
            if c != 0:
                out.append((_subdivide(F, kappa), c))
        return QuantumGraph(out, k=F.k)
    if op.kind == "edge_substitute":
        return QuantumGraph.of(_substitute(F, p))
    raise ValueError(op.kind)


def _num(v):
    if isinstance(v, (Fraction, int)) and not isinstance(v, bool):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return float(v)


def apply(op: OperatorDescriptor, w: Graphon, m: int = 1024) -> Graphon:
    """Forward action ``op(W)`` as a graphon."""
    p = op.param
    if op.kind == "scale":
        return affine(w, _num(p), 0)
    if op.kind == "shift":
        return affine(w, 1, _num(p))
    if op.kind == "tensor_fixed":
        return tensor(p, w)
    if op.kind == "tensor_power":
        return tensor_power(w, int(p))
    if op.kind == "poly_kernel":
        coeffs = [_num(a) for a in p]
        if w.step is None or not w.step.is_interval:
            w = discretize(w, m)
        s = w.step
        exact = s.exact and all(isinstance(c, Fraction) for c in coeffs)
        acc = None
        for i, c in enumerate(coeffs, start=1):
            if c == 0:
                continue
            term = step_power(w, i) * (c if exact else float(c))
            acc = term if acc is None else acc + term
        if acc is None:
            acc = np.zeros((s.m, s.m), dtype=object if exact else float)
            acc[:] = Fraction(0) if exact else 0.0
        return step(s.weights if exact else s.wf, acc if exact else acc.astype(float),
                    name=f"poly{tuple(p)}({w.name})")
    if op.kind == "edge_substitute":
        if w.step is None:
            raise GraphonError("edge substitution needs a stepfunction to act on")
        from .density import tk_exact_blocks
        s = w.step
        exact = s.exact
        vals = np.empty((s.m, s.m), dtype=object if exact else float)
        for i in range(s.m):
            for j in range(s.m):
                vals[i, j] = tk_exact_blocks(QuantumGraph.of(p), s, (i, j), exact)
        return step(s.weights if exact else s.wf, vals, name=f"subst({w.name})", index=s.index)
    raise ValueError(op.kind)
