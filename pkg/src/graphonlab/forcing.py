"""Numerical checks of forcing families and related identities.

Every condition is a target value for a density (or a pointwise value of a
labeled density at sampled points).  Exact stepfunction evaluations use an
absolute tolerance; Monte Carlo estimates use a multiple of their standard
error with a small floor.  Pointwise conditions are certified statistically
at sampled label tuples, never proved.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .adjoints import OperatorDescriptor, adjoint_map, apply
from .density import DensityEstimate, density, tk_eval, tk_is_zero
from .graphon import Graphon, GraphonError, Poly2
from .graphs import (B4_HAT, BLUE, C4, C4_HAT, K2, P3, P4_HAT, RED, Graph, QuantumGraph,
                     as_quantum, complete_bipartite, disjoint_union, swap_colors)

EXACT_TOL = 1e-9
MC_SIGMAS = 3.0
MC_FLOOR = 1e-4
POINTS = 20
FAMILIES = ("regular", "regular_any", "zero_one", "monotone", "cgw", "halfgraphon", "monpoly",
            "binary_tree")

# labeled graphs of the binary-tree family; node 0 carries label 1, node 3 label 2
A_EDGE = Graph(2, ((0, 1, BLUE),), (0,))
B_HAT = Graph(3, ((0, 1, BLUE), (0, 2, BLUE), (1, 2, RED)), (0,))
B_BAR = swap_colors(B_HAT)
C_HAT = Graph(3, ((0, 1, BLUE), (1, 2, RED)), (0, 2))
C_BAR = swap_colors(C_HAT)
D_HAT = Graph(4, ((0, 1, BLUE), (0, 2, BLUE), (1, 3, RED), (2, 3, RED), (1, 2, RED)), (0, 3))
D_BAR = swap_colors(D_HAT)
C4_HAT_4 = Graph(4, C4_HAT.edges, (0, 1, 2, 3))


class UnknownFamilyError(ValueError):
    pass


@dataclass
class Condition:
    label: str
    target: float
    estimate: float
    stderr: float
    tol: float
    passed: bool
    method: str = ""
    informational: bool = False


@dataclass
class VerificationReport:
    family: str
    conditions: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions if not c.informational)

    def add(self, label: str, target, est: DensityEstimate | float, *, sigmas: float = MC_SIGMAS,
            informational: bool = False) -> Condition:
        if isinstance(est, DensityEstimate):
            value, se, method = est.value, est.stderr, est.method
        else:
            value, se, method = float(est), 0.0, "quadrature"
        if method == "mc":
            tol = max(sigmas * se, MC_FLOOR)
        else:
            tol = EXACT_TOL
        cond = Condition(label, float(target), value, se, tol, abs(value - float(target)) <= tol,
                         method, informational)
        self.conditions.append(cond)
        return cond

    def text(self) -> str:
        lines = [f"family {self.family}: {'PASS' if self.passed else 'FAIL'}"]
        for k, v in self.tolerances.items():
            lines.append(f"  # {k} = {v}")
        for c in self.conditions:
            flag = "info" if c.informational else ("ok" if c.passed else "FAIL")
            lines.append(f"  [{flag:>4}] {c.label}: target {c.target:.10g} estimate {c.estimate:.10g}"
                         f" stderr {c.stderr:.3g} tol {c.tol:.3g} ({c.method})")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)

    def csv(self) -> str:
        rows = ["family,condition,target,estimate,stderr,tol,method,pass"]
        for c in self.conditions:
            lab = c.label.replace('"', "'")
            rows.append(f'{self.family},"{lab}",{c.target:.17g},{c.estimate:.17g},{c.stderr:.17g},'
                        f"{c.tol:.17g},{c.method},{int(c.passed)}")
        return "\n".join(rows)


def pointwise_sigmas(points: int, familywise: float = 0.0027) -> float:
    """Per-point threshold that keeps the family-wise false-alarm rate of a
    ``points``-fold check at that of a single 3-sigma test."""
    if points <= 1:
        return MC_SIGMAS
    return NormalDist().inv_cdf(1 - familywise / (2 * points))


def _dens(f, w: Graphon, n: int, seed: int) -> DensityEstimate:
    return density(f, w, n=n, seed=seed)


def _points(seed: int, count: int, k: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xF0]))
    return rng.random((count, k))


def _identity_at(rep: VerificationReport, w: Graphon, x, y, hat: bool, n: int, seed: int,
                 sigmas: float, tag: str):
    cg, dg = (C_HAT, D_HAT) if hat else (C_BAR, D_BAR)
    ce = tk_eval(cg, w, (x, y), n=n, seed=seed)
    de = tk_eval(dg, w, (x, y), n=n, seed=seed + 1)
    lhs = 2 * ce.value ** 2 - 5 * de.value
    se = float(np.hypot(4 * ce.value * ce.stderr, 5 * de.stderr))
    name = "hat" if hat else "bar"
    est = DensityEstimate(lhs, se, ce.method, n, seed)
    rep.add(f"2t2(C{name})^2-5t2(D{name}) at ({x:.6f},{y:.6f}){tag}", 0.0, est, sigmas=sigmas)
    return ce, de


def verify_family(w: Graphon, family: str, *, d=None, poly=None, reference: Graphon | None = None,
                  samples: int = 1_000_000, seed: int = 0, points: int = POINTS) -> VerificationReport:
    """Check ``w`` against the named family's density conditions."""
    if family not in FAMILIES:
        raise UnknownFamilyError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    rep = VerificationReport(family)
    psig = pointwise_sigmas(points)
    rep.tolerances = {"exact_abs": EXACT_TOL, "mc_sigmas": MC_SIGMAS, "mc_floor": MC_FLOOR,
                      "samples": samples, "seed": seed, "points": points,
                      "pointwise_sigmas": round(psig, 4)}
    n, s = samples, seed
    if family == "regular":
        if d is None:
            raise ValueError("family 'regular' needs the degree d")
        d = Fraction(d) if isinstance(d, (str, int, Fraction)) else float(d)
        rep.add("t(K2)", d, _dens(K2, w, n, s))
        rep.add("t(P3)", d * d, _dens(P3, w, n, s))
    elif family == "regular_any":
        f = QuantumGraph.of(P3) - QuantumGraph.of(disjoint_union(K2, K2))
        rep.add("t(P3)-t(K2)^2", 0, _dens(f, w, n, s))
    elif family == "zero_one":
        rep.add("t(B4hat) = int W^2(1-W)^2", 0, _dens(B4_HAT, w, n, s))
    elif family == "monotone":
        rep.add("t(C4hat')", 0, _dens(C4_HAT, w, n, s))
    elif family == "cgw":
        rep.add("t(K2)", Fraction(1, 2), _dens(K2, w, n, s))
        rep.add("t(C4)", Fraction(1, 16), _dens(C4, w, n, s))
    elif family == "halfgraphon":
        rep.add("t(C4hat')", 0, _dens(C4_HAT, w, n, s))
        lin = QuantumGraph.of(P3) - QuantumGraph.of(K2) + QuantumGraph.of(Graph(1), Fraction(1, 6))
        rep.add("t(P3)-t(K2)+1/6", 0, _dens(lin, w, n, s))
        printed = QuantumGraph.of(K2) - QuantumGraph.of(P3) + QuantumGraph.of(Graph(1), Fraction(1, 6))
        rep.add("t(K2)-t(P3)+1/6 (as printed)", 0, _dens(printed, w, n, s), informational=True)
    elif family == "monpoly":
        _monpoly(rep, w, poly, reference, n, s, points)
    elif family == "binary_tree":
        _binary_tree(rep, w, n, s, points, psig)
    return rep


def _monpoly(rep, w, poly, reference, n, s, points):
    if reference is None:
        if poly is None:
            raise ValueError("family 'monpoly' needs the polynomial or a reference graphon")
        from .graphon import levelset
        reference = levelset(poly)
    p = getattr(reference, "poly", None)
    if p is None and poly is not None:
        p = poly if isinstance(poly, Poly2) else Poly2(poly)
    if p is None or reference.boundary is None:
        raise GraphonError("monpoly needs a monotone level-set reference")
    # the 4-labeled colored 4-cycle is evaluated pointwise (nothing to integrate)
    hits = 0
    for x in _points(s, points, 4):
        hits += tk_eval(C4_HAT_4, w, tuple(x), n=1, seed=s).value != 0
    rep.add(f"t4(C4hat) = 0 at {points} sampled 4-tuples (nonzero count)", 0, float(hits))
    top = p.degree + 1
    for a in range(1, top + 1):
        for b in range(a, top + 1):
            ref = kab_exact(reference, a, b)
            est = _dens(complete_bipartite(a, b), w, n, s)
            rep.add(f"t(K_{a},{b}) vs reference", ref, est)
    rep.notes.append("K_{a,b} with a or b = 0 is edgeless, density 1 for every graphon")


def _binary_tree(rep, w, n, s, points, psig):
    rep.add("t(P4hat)", 0, _dens(P4_HAT, w, n, s))
    xs = _points(s, points, 1)[:, 0]
    for i, x in enumerate(xs):
        rep.add(f"t1(A) at {x:.6f}", Fraction(2, 3), tk_eval(A_EDGE, w, (x,), n=n, seed=s + 10 + i),
                sigmas=psig)
    for i, x in enumerate(xs):
        rep.add(f"t1(Bhat) at {x:.6f}", Fraction(8, 45), tk_eval(B_HAT, w, (x,), n=n, seed=s + 40 + i),
                sigmas=psig)
    for i, x in enumerate(xs):
        rep.add(f"t1(Bbar) at {x:.6f}", Fraction(2, 45), tk_eval(B_BAR, w, (x,), n=n, seed=s + 70 + i),
                sigmas=psig)
    pairs = _points(s + 1, points, 2)
    for i, (x, y) in enumerate(pairs):
        adjacent = float(w(x, y)) == 1.0
        _identity_at(rep, w, x, y, not adjacent, n, s + 100 + 2 * i, psig,
                     " (adjacent)" if adjacent else " (non-adjacent)")
    rep.notes.append("hat identity tested at non-adjacent pairs, barred identity at adjacent pairs")


# -- Stokes identity for monotone 0-1 graphons --------------------------------------

def _boundary(reference: Graphon):
    g = getattr(reference, "boundary", None)
    if g is None:
        raise GraphonError(f"{reference.name} is not a monotone 0-1 graphon with a known boundary")
    return lambda x: np.asarray(g(np.asarray(x, dtype=float)), dtype=float)


def _integrate(fn) -> float:
    val, _ = quad(lambda t: float(fn(t)), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def kab_exact(reference: Graphon, a: int, b: int) -> float:
    """``t(K_{a,b})`` of ``{y <= g(x)}``: the largest of ``b`` uniform points
    has density ``b m^(b-1)`` and the common neighbourhood has measure ``g(m)``."""
    if a == 0 or b == 0:
        return 1.0
    g = _boundary(reference)
    return _integrate(lambda m: b * m ** (b - 1) * g(m) ** a)


def area_integral(reference: Graphon, p: int, q: int) -> float:
    """``int_S x^p y^q`` over the support ``S`` of the reference."""
    g = _boundary(reference)
    return _integrate(lambda x: x ** p * g(x) ** (q + 1) / (q + 1))


@dataclass
class StokesResult:
    lhs: float
    rhs: float
    gap: float
    rhs_method: str

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.gap))


def stokes_check(reference: Graphon, a: int, b: int, method: str = "exact", n: int = 1_000_000,
                 seed: int = 0) -> StokesResult:
    """Boundary integral of ``x^a y^b (n1 + n2)`` against
    ``t(K_{a+1,b})/(a+1) + t(K_{a,b+1})/(b+1)``.

    The boundary consists of the curve ``y = g(x)`` (with any segments of the
    top and right sides of the square) and the two axes, where the integrand
    vanishes.  Parameterizing the curve by ``x`` and its vertical parts by
    ``y`` (using symmetry, ``x = g(y)`` there) gives
    ``int x^a g(x)^b dx + int g(y)^a y^b dy``.
    """
    if a < 1 or b < 1:
        raise ValueError("the boundary form needs a, b >= 1 (the integrand must vanish on the axes)")
    if reference.lo < 0 or reference.hi > 1:
        raise GraphonError("reference must be 0-1 valued")
    g = _boundary(reference)
    lhs = _integrate(lambda x: x ** a * g(x) ** b + g(x) ** a * x ** b)
    if method == "exact":
        rhs = kab_exact(reference, a + 1, b) / (a + 1) + kab_exact(reference, a, b + 1) / (b + 1)
    elif method == "mc":
        q = (QuantumGraph.of(complete_bipartite(a + 1, b), Fraction(1, a + 1))
             + QuantumGraph.of(complete_bipartite(a, b + 1), Fraction(1, b + 1)))
        rhs = density(q, reference, method="mc", n=n, seed=seed).value
    else:
        raise ValueError(f"unknown method {method!r}")
    return StokesResult(lhs, rhs, abs(lhs - rhs), method)


# -- Gram-matrix dependency probe ------------------------------------------------------

@dataclass
class Dependency:
    coeffs: np.ndarray
    quantum: QuantumGraph
    sv_ratio: float
    verified: bool
    evidence: list


def find_2labeled_dependency(w: Graphon, basis: Sequence, grid: int = 200, n: int = 20_000,
                             seed: int = 0, rel_tol: float = 1e-8, verify_tuples: int = 200):
    """Look for a combination of the 2-labeled ``basis`` whose ``t^2`` vanishes.

    ``G_ij`` averages ``t^2(F_i) t^2(F_j)`` over ``grid`` random label pairs; all
    basis graphs share sample points, so exact cancellations survive the
    noise.  Returns a :class:`Dependency` or None.
    """
    if len(basis) > 50:
        raise ValueError("basis is limited to 50 graphs")
    if any(b.k != 2 for b in basis):
        raise ValueError("basis graphs must be 2-labeled")
    pts = _points(seed, grid, 2)
    vals = np.empty((grid, len(basis)))
    for i, (x, y) in enumerate(pts):
        for j, b in enumerate(basis):
            vals[i, j] = tk_eval(b, w, (x, y), n=n, seed=seed + 1 + i).value
    gram = vals.T @ vals / grid
    _, sv, vt = np.linalg.svd(gram)
    ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    if sv[0] > 0 and ratio > rel_tol:
        return None
    v = vt[-1].copy()
    v[np.abs(v) < 1e-12] = 0.0
    v = v / np.linalg.norm(v)
    lead = np.flatnonzero(np.abs(v) > 1e-12)
    if lead.size and v[lead[0]] < 0:
        v = -v
    f = QuantumGraph.zero(2)
    raw = []
    for c, b in zip(v, basis):
        if abs(c) > 1e-15:
            f = f + as_quantum(b).scale(float(c))
            raw += [(g, float(c) * float(cb)) for g, cb in (b if isinstance(b, QuantumGraph) else [(b, 1)])]
    # verify on the basis graphs as given, so shared node numbering keeps
    # the sample columns aligned
    ok, evidence = tk_is_zero(raw, w, tuples=verify_tuples, n=n, seed=seed + 7)
    return Dependency(v, f, ratio, ok, evidence)


def c4hat_basis(labels=(0, 2)) -> list[Graph]:
    """Blue graphs of the sieve expansion of the colored 4-cycle, 2-labeled,
    all on the same node numbering."""
    blue = [(u, v, BLUE) for u, v, c in C4_HAT.edges if c == BLUE]
    red = [(u, v, BLUE) for u, v, c in C4_HAT.edges if c == RED]
    out = []
    for r in range(len(red) + 1):
        for ys in itertools.combinations(red, r):
            out.append(Graph(4, tuple(blue) + ys, labels))
    return out


# -- adjoint identities ---------------------------------------------------------------------

@dataclass
class AdjointCheck:
    lhs: DensityEstimate
    rhs: DensityEstimate
    gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.gap <= self.tol

    def __iter__(self):
        return iter((self.lhs.value, self.rhs.value, self.gap))


def adjoint_identity_check(op: OperatorDescriptor, F: Graph, w: Graphon, n: int = 1_000_000,
                           seed: int = 0, m: int = 1024) -> AdjointCheck:
    """``t(F, op(W))`` against ``t(op*(F), W)``."""
    forward = apply(op, w, m)
    star = adjoint_map(F, op)
    lhs = density(F, forward, n=n, seed=seed, cap=None)
    rhs = density(star, w, n=n, seed=seed, cap=None)
    gap = abs(lhs.value - rhs.value)
    if lhs.method == "mc" or rhs.method == "mc":
        tol = 4 * float(np.hypot(lhs.stderr, rhs.stderr))
    else:
        tol = EXACT_TOL
    return AdjointCheck(lhs, rhs, gap, tol)
