"""Graphons as symmetric two-point evaluators, plus the standard combinators.

Every evaluator is vectorized: ``w(x, y)`` broadcasts numpy arrays.  Kernels
given by formulas are evaluated at ``(min(x, y), max(x, y))`` so that
symmetry holds bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

WEIGHT_TOL = 1e-12


class GraphonError(ValueError):
    pass


def _is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def _to_exact_array(vals) -> np.ndarray | None:
    """Fraction object array if every entry is rational-typed, else None."""
    arr = np.asarray(vals, dtype=object)
    flat = arr.ravel()
    out = np.empty(flat.shape, dtype=object)
    for i, v in enumerate(flat):
        if isinstance(v, (Fraction, int, np.integer)) and not isinstance(v, bool):
            out[i] = Fraction(int(v)) if isinstance(v, (int, np.integer)) else v
        elif isinstance(v, str):
            out[i] = Fraction(v)
        else:
            return None
    return out.reshape(arr.shape)


@dataclass
class StepStructure:
    """Block weights, symmetric block values and a point-to-block map.

    ``index`` maps points of [0,1] to block numbers; ``None`` means blocks are
    consecutive intervals with the given lengths.  ``weights``/``values`` are
    float arrays or Fraction object arrays.
    """

    weights: np.ndarray
    values: np.ndarray
    index: Callable[[np.ndarray], np.ndarray] | None = None
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights)
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != w.shape[0]:
            raise GraphonError("step values must be a square matrix matching the weights")
        wf = w.astype(float)
        if np.any(wf <= 0):
            raise GraphonError("step weights must be positive")
        if abs(wf.sum() - 1) > WEIGHT_TOL:
            raise GraphonError(f"step weights sum to {wf.sum()!r}, not 1")
        if not _is_exact(v) and not np.array_equal(v, v.T):
            if np.allclose(v, v.T, atol=1e-12):
                v = (v + v.T) / 2
            else:
                raise GraphonError("step values are not symmetric")
        if _is_exact(v) and not np.all(v == v.T):
            raise GraphonError("step values are not symmetric")
        self.weights, self.values = w, v
        self._cum = np.cumsum(wf)[:-1]

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def exact(self) -> bool:
        return _is_exact(self.weights) and _is_exact(self.values)

    @property
    def wf(self) -> np.ndarray:
        return self.weights.astype(float)

    @property
    def vf(self) -> np.ndarray:
        return self.values.astype(float)

    @property
    def is_interval(self) -> bool:
        return self.index is None

    def block_of(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.index is not None:
            return np.asarray(self.index(x))
        return np.searchsorted(self._cum, x, side="right")


class Graphon:
    """Bounded symmetric kernel on [0,1]^2."""

    def __init__(self, kernel: Callable, bounds: tuple[float, float], *, step: StepStructure | None = None,
                 name: str = "W", boundary: Callable | None = None, symmetrize: bool = True):
        self._kernel = kernel
        self.lo, self.hi = float(bounds[0]), float(bounds[1])
        if self.lo > self.hi:
            raise GraphonError("empty value range")
        self.step = step
        self.name = name
        # decreasing boundary curve of a monotone 0-1 graphon: W = 1 iff y <= boundary(x)
        self.boundary = boundary
        self._symmetrize = symmetrize

    @property
    def bounds(self) -> tuple[float, float]:
        return self.lo, self.hi

    @property
    def in_W0(self) -> bool:
        return self.lo >= 0.0 and self.hi <= 1.0

    @property
    def has_step(self) -> bool:
        return self.step is not None

    def __call__(self, x, y) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if self._symmetrize:
            x, y = np.minimum(x, y), np.maximum(x, y)
        return np.asarray(self._kernel(x, y), dtype=float)

    eval = __call__

    def __repr__(self):
        return f"Graphon({self.name}, bounds={self.bounds}" + (f", steps={self.step.m})" if self.step else ")")


def _bounds_of(values) -> tuple[float, float]:
    v = np.asarray(values).astype(float)
    return float(v.min()), float(v.max())


def step(weights: Sequence, values: Sequence, name: str | None = None,
         index: Callable | None = None) -> Graphon:
    """Stepfunction; rational-typed inputs (int, Fraction, 'p/q' strings) stay exact."""
    ew, ev = _to_exact_array(weights), _to_exact_array(values)
    w = ew if ew is not None else np.asarray(weights, dtype=float)
    v = ev if ev is not None else np.asarray(values, dtype=float)
    st = StepStructure(w, v, index)
    vf = st.vf

    def kernel(x, y):
        return vf[st.block_of(x), st.block_of(y)]

    return Graphon(kernel, _bounds_of(vf), step=st, name=name or f"step{st.m}", symmetrize=False)


def const(c=Fraction(1, 2)) -> Graphon:
    g = step([1], [[c]], name=f"const({c})")
    return g


def from_graph(g, name: str | None = None) -> Graphon:
    """Graphon ``W_G`` of a finite graph: equal blocks, 0-1 adjacency."""
    n = g.n
    adj = np.empty((n, n), dtype=object)
    adj[:] = Fraction(0)
    for u, v, _ in g.edges:
        adj[u, v] = adj[v, u] = Fraction(1)
    return step([Fraction(1, n)] * n, adj, name=name or f"W_G(n={n})")


def half() -> Graphon:
    """Indicator of ``x + y <= 1``."""
    return Graphon(lambda x, y: (x + y <= 1.0).astype(float), (0.0, 1.0), name="half",
                   boundary=lambda x: 1.0 - np.asarray(x, dtype=float))


class Poly2:
    """Symmetric polynomial ``sum c * x**i * y**j`` from ``(i, j, c)`` triples."""

    def __init__(self, terms):
        acc: dict[tuple[int, int], float] = {}
        for i, j, c in terms:
            if i < 0 or j < 0:
                raise GraphonError("negative exponent in polynomial")
            acc[(int(i), int(j))] = acc.get((int(i), int(j)), 0.0) + float(c)
        for (i, j), c in acc.items():
            if abs(acc.get((j, i), 0.0) - c) > 1e-15:
                raise GraphonError(f"polynomial term x^{i} y^{j} has no symmetric partner")
        self.terms = {k: c for k, c in acc.items() if c != 0.0}

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    def __call__(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for (i, j), c in sorted(self.terms.items()):
            out = out + c * x ** i * y ** j
        return out

    def dx(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for (i, j), c in self.terms.items():
            if i:
                out = out + c * i * x ** (i - 1) * y ** j
        return out

    def is_decreasing(self, grid: int = 101) -> bool:
        t = np.linspace(0, 1, grid)
        xx, yy = np.meshgrid(t, t)
        return bool(np.all(self.dx(xx, yy) <= 1e-12))


def levelset(poly) -> Graphon:
    """Indicator of ``p(x, y) >= 0`` (closed level set)."""
    p = poly if isinstance(poly, Poly2) else Poly2(poly)
    boundary = None
    if p.is_decreasing():
        def curve(x):
            xs = np.atleast_1d(np.asarray(x, dtype=float))
            out = np.empty_like(xs)
            for i, xv in enumerate(xs):
                if p(xv, 0.0) < 0:
                    out[i] = 0.0
                elif p(xv, 1.0) >= 0:
                    out[i] = 1.0
                else:
                    out[i] = brentq(lambda y: float(p(xv, y)), 0.0, 1.0, xtol=1e-15, rtol=1e-15)
            return out if np.ndim(x) else float(out[0])
        boundary = curve
    g = Graphon(lambda x, y: (p(x, y) >= 0).astype(float), (0.0, 1.0), name="levelset",
                boundary=boundary)
    g.poly = p
    return g


def affine(w: Graphon, a=1, b=0) -> Graphon:
    """``a * W + b``."""
    af, bf = float(a), float(b)
    lo, hi = sorted((af * w.lo + bf, af * w.hi + bf))
    st = None
    if w.step is not None:
        s = w.step
        if s.exact and isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
            vals = s.values * Fraction(a) + Fraction(b)
        else:
            vals = s.vf * af + bf
        st = StepStructure(s.weights, vals, s.index)
    return Graphon(lambda x, y: af * w(x, y) + bf, (lo, hi), step=st,
                   name=f"({a}*{w.name}+{b})", symmetrize=False)


def complement(w: Graphon) -> Graphon:
    g = affine(w, -1, 1)
    g.name = f"1-{w.name}"
    return g


def dsum(parts: Sequence[tuple[object, Graphon]]) -> Graphon:
    """Weighted direct sum; blocks laid out left to right, zero between blocks."""
    if not parts:
        raise GraphonError("empty direct sum")
    ws = [a for a, _ in parts]
    wf = np.array([float(a) for a in ws])
    if np.any(wf <= 0) or abs(wf.sum() - 1) > WEIGHT_TOL:
        raise GraphonError(f"direct-sum weights must be positive and sum to 1, got {wf.sum()!r}")
    gs = [g for _, g in parts]
    start = np.concatenate([[0.0], np.cumsum(wf)[:-1]])
    cum = np.cumsum(wf)[:-1]

    def which(x):
        return np.searchsorted(cum, x, side="right")

    def local(x, i):
        return np.clip((x - start[i]) / wf[i], 0.0, 1.0)

    def kernel(x, y):
        bx, by = which(x), which(y)
        out = np.zeros(np.shape(x))
        for i, g in enumerate(gs):
            sel = (bx == i) & (by == i)
            if np.any(sel):
                out[sel] = g(local(x[sel], i), local(y[sel], i))
        return out

    lo = min([0.0] + [g.lo for g in gs])
    hi = max([0.0] + [g.hi for g in gs])
    st = None
    if all(g.step is not None for g in gs):
        exact = all(g.step.exact for g in gs) and all(isinstance(a, (int, Fraction)) for a in ws)
        blocks_w, sizes = [], []
        for a, g in parts:
            a_ = Fraction(a) if exact else float(a)
            blocks_w += list((g.step.weights if exact else g.step.wf) * a_)
            sizes.append(g.step.m)
        M = sum(sizes)
        vals = np.empty((M, M), dtype=object if exact else float)
        vals[:] = Fraction(0) if exact else 0.0
        off = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
        for i, g in enumerate(gs):
            vals[off[i]:off[i] + sizes[i], off[i]:off[i] + sizes[i]] = g.step.values if exact else g.step.vf
        if all(g.step.is_interval for g in gs):
            index = None
        else:
            def index(x):
                x = np.asarray(x, dtype=float)
                b = which(x)
                out = np.zeros(x.shape, dtype=int)
                for i, g in enumerate(gs):
                    sel = b == i
                    if np.any(sel):
                        out[sel] = off[i] + g.step.block_of(local(x[sel], i))
                return out
        st = StepStructure(np.array(blocks_w, dtype=object if exact else float), vals, index)
    name = "dsum(" + ", ".join(f"{a}:{g.name}" for a, g in parts) + ")"
    return Graphon(kernel, (lo, hi), step=st, name=name, symmetrize=False)


def _common_refinement(s1: StepStructure, s2: StepStructure):
    """Interval refinement of two interval stepfunctions: weights and the old
    block index of each new block in both."""
    exact = s1.exact and s2.exact
    if exact:
        c1 = [Fraction(0)] + list(np.cumsum(s1.weights))
        c2 = [Fraction(0)] + list(np.cumsum(s2.weights))
        c1[-1] = c2[-1] = Fraction(1)
        pts = sorted(set(c1) | set(c2))
    else:
        c1 = np.concatenate([[0.0], np.cumsum(s1.wf)])
        c2 = np.concatenate([[0.0], np.cumsum(s2.wf)])
        c1[-1] = c2[-1] = 1.0
        pts = np.unique(np.concatenate([c1, c2]))
        keep = np.concatenate([[True], np.diff(pts) > 1e-15])
        pts = list(pts[keep])
        pts[-1] = 1.0
    weights, i1, i2 = [], [], []
    for a, b in zip(pts[:-1], pts[1:]):
        mid = (float(a) + float(b)) / 2
        weights.append(b - a)
        i1.append(int(np.searchsorted(np.asarray(c1[1:-1], dtype=float), mid, side="right")))
        i2.append(int(np.searchsorted(np.asarray(c2[1:-1], dtype=float), mid, side="right")))
    w = np.array(weights, dtype=object if exact else float)
    return w, np.array(i1), np.array(i2), exact


def pprod(u: Graphon, w: Graphon) -> Graphon:
    """Pointwise product."""
    cands = [u.lo * w.lo, u.lo * w.hi, u.hi * w.lo, u.hi * w.hi]
    st = None
    if u.step is not None and w.step is not None and u.step.is_interval and w.step.is_interval:
        wt, i1, i2, exact = _common_refinement(u.step, w.step)
        a = u.step.values if exact else u.step.vf
        b = w.step.values if exact else w.step.vf
        st = StepStructure(wt, a[np.ix_(i1, i1)] * b[np.ix_(i2, i2)])
    return Graphon(lambda x, y: u(x, y) * w(x, y), (min(cands), max(cands)), step=st,
                   name=f"({u.name}*{w.name})", symmetrize=False)


def discretize(w: Graphon, m: int, s: int = 3) -> Graphon:
    """Equal-step approximation: each cell value is the mean over an ``s x s``
    grid of cell-interior midpoints."""
    if m < 1 or s < 1:
        raise GraphonError("resolution and sub-sampling must be >= 1")
    pts = (np.arange(m * s) + 0.5) / (m * s)
    vals = np.empty((m, m))
    rows = max(1, 4_000_000 // (m * s * s))
    for r0 in range(0, m, rows):
        r1 = min(m, r0 + rows)
        xs = pts[r0 * s:r1 * s]
        block = w(xs[:, None], pts[None, :])
        vals[r0:r1] = block.reshape(r1 - r0, s, m, s).mean(axis=(1, 3))
    vals = (vals + vals.T) / 2
    out = step(np.full(m, 1.0 / m), vals, name=f"disc({w.name},{m})")
    return out


def _as_interval_step(w: Graphon, m: int) -> StepStructure:
    if w.step is not None and w.step.is_interval:
        return w.step
    return discretize(w, m).step


def oprod(u: Graphon, w: Graphon, m: int = 1024) -> Graphon:
    """Kernel-operator product ``(U o W)(x,y) = int U(x,z) W(z,y) dz``.

    Interval stepfunctions are combined exactly on their common refinement;
    anything else is first discretized at resolution ``m``.
    """
    su, sw = _as_interval_step(u, m), _as_interval_step(w, m)
    wt, i1, i2, exact = _common_refinement(su, sw)
    a = (su.values if exact else su.vf)[np.ix_(i1, i1)]
    b = (sw.values if exact else sw.vf)[np.ix_(i2, i2)]
    prod = (a * wt[None, :]).dot(b)
    if not exact:
        prod = (prod + prod.T) / 2
    elif not np.all(prod == prod.T):
        raise GraphonError("operator product of symmetric kernels came out asymmetric")
    g = step(wt, prod, name=f"({u.name}o{w.name})")
    return g


def step_power(w: Graphon, r: int) -> np.ndarray:
    """Block matrix of the r-fold operator power of an interval stepfunction."""
    s = w.step
    a = s.values if s.exact else s.vf
    wt = s.weights if s.exact else s.wf
    out = a
    for _ in range(r - 1):
        out = (out * wt[None, :]).dot(a)
    return out


_BITS = 26


def interleave_split(x) -> tuple[np.ndarray, np.ndarray]:
    """Measure-preserving split of [0,1] into [0,1]^2: odd binary digits go to
    the first coordinate, even digits to the second (52 digits used)."""
    x = np.asarray(x, dtype=float)
    n = np.minimum(np.floor(x * 2.0 ** (2 * _BITS)), 2.0 ** (2 * _BITS) - 1).astype(np.uint64)
    a = np.zeros(n.shape, dtype=np.uint64)
    b = np.zeros(n.shape, dtype=np.uint64)
    one = np.uint64(1)
    for k in range(_BITS):
        # digit 2k+1 (odd) sits at bit 2*_BITS-1-2k, digit 2k+2 one below it
        hi = (n >> np.uint64(2 * _BITS - 1 - 2 * k)) & one
        lo = (n >> np.uint64(2 * _BITS - 2 - 2 * k)) & one
        a |= hi << np.uint64(_BITS - 1 - k)
        b |= lo << np.uint64(_BITS - 1 - k)
    scale = 2.0 ** -_BITS
    return a.astype(float) * scale, b.astype(float) * scale


def tensor(u: Graphon, w: Graphon) -> Graphon:
    """Tensor product pulled back to [0,1] by digit interleaving."""
    def kernel(x, y):
        x1, x2 = interleave_split(x)
        y1, y2 = interleave_split(y)
        return u(x1, y1) * w(x2, y2)

    cands = [u.lo * w.lo, u.lo * w.hi, u.hi * w.lo, u.hi * w.hi]
    st = None
    if u.step is not None and w.step is not None:
        su, sw = u.step, w.step
        exact = su.exact and sw.exact
        wts = np.kron(su.weights, sw.weights) if exact else np.kron(su.wf, sw.wf)
        vals = np.kron(su.values, sw.values) if exact else np.kron(su.vf, sw.vf)
        mw = sw.m

        def index(x):
            x1, x2 = interleave_split(x)
            return su.block_of(x1) * mw + sw.block_of(x2)

        st = StepStructure(wts, vals, index)
    return Graphon(kernel, (min(cands), max(cands)), step=st, name=f"({u.name}(x){w.name})",
                   symmetrize=False)


def tensor_power(w: Graphon, k: int) -> Graphon:
    out = w
    for _ in range(k - 1):
        out = tensor(out, w)
    return out


def symmetry_check(w: Graphon, n: int = 10_000, seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    x, y = rng.random(n), rng.random(n)
    a, b = w(x, y), w(y, x)
    inb = (a >= w.lo - 1e-12) & (a <= w.hi + 1e-12)
    return bool(np.array_equal(a, b) and inb.all())
