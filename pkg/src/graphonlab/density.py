"""Homomorphism densities of (labeled, colored, quantum) graphs in graphons.

Two routes:

* ``exact_step``: sum over block assignments for stepfunctions, organised as
  variable elimination over the node set.  Rational step data gives exact
  ``Fraction`` results.
* ``mc``: plain Monte Carlo.  Samples are drawn in fixed-size chunks; chunk
  ``c`` has its own stream seeded by ``(seed, c)``, so results do not depend
  on how chunks are scheduled across threads.  All terms of a quantum graph
  see the same sample points.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .algebra import razborov, unlabel
from .graphon import Graphon, GraphonError, StepStructure, step
from .graphs import Graph, GraphError, QuantumGraph

DEFAULT_SAMPLES = 1_000_000
DEFAULT_CAP = 10 ** 8
CHUNK = 1 << 16
ZERO_TUPLES = 200
ZERO_FLOOR = 1e-9


class DensityCapError(ValueError):
    pass


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    stderr: float
    method: str
    n: int
    seed: int = 0
    exact: Fraction | None = None

    def within(self, target: float, k: float = 3.0, floor: float = 0.0) -> bool:
        return abs(self.value - target) <= max(k * self.stderr, floor)

    def __float__(self):
        return self.value


def threads() -> int:
    try:
        return max(1, int(os.environ.get("GRAPHONLAB_THREADS", "1")))
    except ValueError:
        return 1


def csv_header() -> str:
    return "graph,graphon,method,value,stderr,n,seed"


def csv_row(graph: str, graphon: str, est: DensityEstimate) -> str:
    def q(s):
        return f'"{s}"' if ("," in s or '"' in s) else s
    return f"{q(graph)},{q(graphon)},{est.method},{est.value:.17g},{est.stderr:.17g},{est.n},{est.seed}"


# -- term preparation ---------------------------------------------------------

@dataclass(frozen=True)
class _Term:
    coeff: object
    n: int
    pairs: tuple  # (u, v, blue mult, red mult)
    labels: tuple  # node of each label position
    free: tuple  # unlabeled nodes in order


def _prepare(f) -> tuple[list[_Term], int, bool]:
    """Terms, label count and exactness of ``f``.

    A plain ``Graph`` or a list of ``(Graph, coeff)`` pairs keeps its own node
    numbering, so Monte Carlo columns line up across graphs that share it; a
    ``QuantumGraph`` uses canonical representatives.
    """
    if isinstance(f, Graph):
        items, k = [(f, Fraction(1))], f.k
    elif isinstance(f, QuantumGraph):
        items, k = list(f), f.k
    else:
        items = [(g, c) for g, c in f]
        ks = {g.k for g, _ in items}
        if len(ks) > 1:
            raise GraphError("mixed label counts in a linear combination")
        k = ks.pop() if ks else 0
    out = []
    for g, c in items:
        pc = g.pair_counts()
        pairs = tuple((u, v, b, r) for (u, v), (b, r) in sorted(pc.items()))
        out.append(_Term(c, g.n, pairs, g.labels, tuple(g.unlabeled_nodes)))
    exact = all(isinstance(c, (Fraction, int)) for g, c in items)
    return out, k, exact


def _unlabeled(f):
    if isinstance(f, Graph):
        return f.with_labels(())
    if isinstance(f, QuantumGraph):
        return unlabel(f)
    return [(g.with_labels(()), c) for g, c in f]


# -- exact route --------------------------------------------------------------

def _factor_product(fa, fb):
    va, a = fa
    vb, b = fb
    allv = tuple(sorted(set(va) | set(vb)))

    def expand(vs, arr):
        arr = np.transpose(arr, [vs.index(x) for x in sorted(vs)]) if vs else arr
        svs = sorted(vs)
        shape = [arr.shape[svs.index(x)] if x in vs else 1 for x in allv]
        return arr.reshape(shape)

    return allv, expand(va, a) * expand(vb, b)


def _eliminate(factors: list, free: list[int], weights: np.ndarray):
    """Sum out every free variable; returns the scalar."""
    factors = list(factors)
    remaining = set(free)
    while remaining:
        # greedy: variable whose elimination touches the fewest other variables
        best, best_size = None, None
        for v in remaining:
            touched = set()
            for vs, _ in factors:
                if v in vs:
                    touched |= set(vs)
            if best is None or len(touched) < best_size:
                best, best_size = v, len(touched)
        v = best
        mine = [fa for fa in factors if v in fa[0]]
        rest = [fa for fa in factors if v not in fa[0]]
        acc = ((v,), weights)
        for fa in mine:
            acc = _factor_product(acc, fa)
        vs, arr = acc
        ax = vs.index(v)
        arr = arr.sum(axis=ax)
        rest.append((tuple(x for x in vs if x != v), arr))
        factors = rest
        remaining.discard(v)
    total = None
    for vs, arr in factors:
        val = arr[()] if isinstance(arr, np.ndarray) else arr
        total = val if total is None else total * val
    return 1 if total is None else total


def _pair_matrix(vals: np.ndarray, one, b: int, r: int) -> np.ndarray:
    out = None
    if b:
        out = vals ** b
    if r:
        red = (one - vals) ** r
        out = red if out is None else out * red
    return out


def _term_exact(t: _Term, st: StepStructure, blocks: Sequence[int], rational: bool):
    vals = st.values if rational else st.vf
    weights = st.weights if rational else st.wf
    one = Fraction(1) if rational else 1.0
    fixed = {node: int(b) for node, b in zip(t.labels, blocks)}
    factors = []
    scalar = one
    for u, v, b, r in t.pairs:
        mat = _pair_matrix(vals, one, b, r)
        if u in fixed and v in fixed:
            scalar = scalar * mat[fixed[u], fixed[v]]
        elif u in fixed:
            factors.append(((v,), mat[fixed[u], :]))
        elif v in fixed:
            factors.append(((u,), mat[:, fixed[v]]))
        else:
            factors.append(((u, v), mat))
    return scalar * _eliminate(factors, list(t.free), weights)


def _check_cap(terms: list[_Term], m: int, cap):
    if cap is None:
        return
    for t in terms:
        if float(m) ** len(t.free) > cap:
            raise DensityCapError(
                f"exact evaluation needs {m}^{len(t.free)} summands, over the cap {cap:g}")


def _exact_sum(terms, st: StepStructure, blocks, rational: bool):
    total = Fraction(0) if rational else 0.0
    for t in terms:
        c = t.coeff if rational else float(t.coeff)
        total = total + c * _term_exact(t, st, blocks, rational)
    return total


def t_exact_step(f, w: Graphon, cap: float | None = DEFAULT_CAP, rational: bool | None = None) -> DensityEstimate:
    """Exact density of an unlabeled (or fully integrated) quantum graph."""
    if w.step is None:
        raise GraphonError(f"{w.name} has no step structure")
    terms, _, exact_f = _prepare(_unlabeled(f))
    st = w.step
    _check_cap(terms, st.m, cap)
    if rational is None:
        rational = st.exact and exact_f
    val = _exact_sum(terms, st, (), rational)
    if rational:
        return DensityEstimate(float(val), 0.0, "exact_step", st.m, 0, Fraction(val))
    return DensityEstimate(float(val), 0.0, "exact_step", st.m, 0)


def tk_exact_blocks(f, st: StepStructure, blocks: Sequence[int], rational: bool | None = None):
    """``t^k(f, W)`` at any point whose label coordinates lie in ``blocks``."""
    terms, k, exact_f = _prepare(f)
    if len(blocks) != k:
        raise GraphError(f"expected {k} block indices, got {len(blocks)}")
    if rational is None:
        rational = st.exact and exact_f
    return _exact_sum(terms, st, blocks, rational)


# -- Monte Carlo route --------------------------------------------------------

def _chunk_values(terms: list[_Term], w: Graphon, x: np.ndarray, seed: int, c: int, size: int,
                  nfree: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, c]))
    pts = rng.random((nfree, size)) if nfree else np.empty((0, size))
    cache: dict = {}

    def src(t: _Term, node: int):
        if node in t.labels:
            return ("x", t.labels.index(node))
        return ("u", t.free.index(node))

    def column(s):
        return np.full(size, x[s[1]]) if s[0] == "x" else pts[s[1]]

    def wval(s1, s2):
        key = (min(s1, s2), max(s1, s2))
        if key not in cache:
            cache[key] = w(column(key[0]), column(key[1]))
        return cache[key]

    acc = np.zeros(size)
    for t in terms:
        prod = np.ones(size)
        for u, v, b, r in t.pairs:
            val = wval(src(t, u), src(t, v))
            if b:
                prod = prod * val ** b
            if r:
                prod = prod * (1.0 - val) ** r
        acc += float(t.coeff) * prod
    return acc


def _merge(stats):
    """Chan's pairwise combination of (count, mean, M2) in list order."""
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in stats:
        if n == 0:
            n, mean, m2 = nb, mb, m2b
            continue
        tot = n + nb
        d = mb - mean
        mean = mean + d * nb / tot
        m2 = m2 + m2b + d * d * n * nb / tot
        n = tot
    return n, mean, m2


def _mc(terms: list[_Term], w: Graphon, x, n: int, seed: int, workers: int | None = None) -> DensityEstimate:
    if n < 1:
        raise ValueError("need at least one sample")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    x = np.asarray(x, dtype=float)
    nfree = max((len(t.free) for t in terms), default=0)
    sizes = [min(CHUNK, n - c * CHUNK) for c in range((n + CHUNK - 1) // CHUNK)]

    def run(c):
        vals = _chunk_values(terms, w, x, seed, c, sizes[c], nfree)
        mu = float(vals.mean())
        return len(vals), mu, float(((vals - mu) ** 2).sum())

    workers = workers or threads()
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(workers) as ex:
            stats = list(ex.map(run, range(len(sizes))))
    else:
        stats = [run(c) for c in range(len(sizes))]
    cnt, mean, m2 = _merge(stats)
    se = math.sqrt(m2 / (cnt - 1) / cnt) if cnt > 1 else float("nan")
    return DensityEstimate(mean, se, "mc", n, seed)


def t_mc(f, w: Graphon, n: int = DEFAULT_SAMPLES, seed: int = 0, workers: int | None = None) -> DensityEstimate:
    """Monte Carlo density; labels, if any, are integrated out."""
    terms, _, _ = _prepare(_unlabeled(f))
    return _mc(terms, w, (), n, seed, workers)


def tk_eval(f, w: Graphon, x: Sequence[float], n: int = DEFAULT_SAMPLES, seed: int = 0,
            method: str = "auto", cap: float | None = DEFAULT_CAP) -> DensityEstimate:
    """``t^k(f, W)`` at the label point ``x``.

    ``method``: ``exact`` (needs step structure), ``mc``, or ``auto`` (exact
    when the graphon is a stepfunction and the cap allows it).
    """
    terms, k, exact_f = _prepare(f)
    x = tuple(float(v) for v in x)
    if len(x) != k:
        raise GraphError(f"{k}-labeled quantum graph evaluated at {len(x)} coordinates")
    use_exact = method == "exact" or (method == "auto" and w.step is not None)
    if use_exact:
        if w.step is None:
            raise GraphonError(f"{w.name} has no step structure")
        try:
            _check_cap(terms, w.step.m, cap)
        except DensityCapError:
            if method == "exact":
                raise
            use_exact = False
    if use_exact:
        blocks = [int(b) for b in w.step.block_of(np.array(x))] if k else []
        rational = w.step.exact and exact_f
        val = _exact_sum(terms, w.step, blocks, rational)
        return DensityEstimate(float(val), 0.0, "exact_step", w.step.m, 0,
                               Fraction(val) if rational else None)
    if method not in ("auto", "mc"):
        raise ValueError(f"unknown method {method!r}")
    return _mc(terms, w, x, n, seed)


def density(f, w: Graphon, method: str = "auto", n: int = DEFAULT_SAMPLES, seed: int = 0,
            cap: float | None = DEFAULT_CAP) -> DensityEstimate:
    return tk_eval(_unlabeled(f), w, (), n=n, seed=seed, method=method, cap=cap)


def tk_is_zero(f, w: Graphon, tuples: int = ZERO_TUPLES, n: int = 20_000, seed: int = 0,
               floor: float = ZERO_FLOOR, method: str = "auto"):
    """Statistical proxy for ``t^k(f, W) = 0`` almost everywhere.

    Returns ``(verdict, evidence)`` where evidence lists ``(x, estimate)``.
    """
    _, k, _ = _prepare(f)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7A]))
    pts = rng.random((tuples, k))
    evidence = []
    ok = True
    for i, x in enumerate(pts):
        est = tk_eval(f, w, x, n=n, seed=seed + i + 1, method=method)
        evidence.append((tuple(x), est))
        if abs(est.value) > max(3 * est.stderr, floor):
            ok = False
    return ok, evidence


# -- moments and finite-rank expansion ----------------------------------------

@dataclass(frozen=True)
class Step1D:
    """Stepfunction on [0,1] with interval blocks."""

    weights: tuple
    values: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.values):
            raise ValueError("weights and values differ in length")
        if abs(sum(float(p) for p in self.weights) - 1) > 1e-12:
            raise ValueError("1-D step weights must sum to 1")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        cum = np.cumsum([float(p) for p in self.weights])[:-1]
        return np.asarray([float(v) for v in self.values])[np.searchsorted(cum, x, side="right")]


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _quad(fn: Callable, panels: int = 256) -> float:
    edges = np.linspace(0.0, 1.0, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1] - edges[0]) / 2
    xs = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
    ws = np.tile(_GL_WEIGHTS * half, panels)
    return float(np.dot(ws, fn(xs)))


def _exact_number(v):
    if isinstance(v, (Fraction, int)) and not isinstance(v, bool):
        return Fraction(v)
    return None


def _refine_1d(steps: list[Step1D]):
    cuts = set()
    for s in steps:
        acc = 0
        for p in s.weights[:-1]:
            acc = acc + p
            cuts.add(acc)
    return sorted(cuts, key=float)


def moments(w_list: Sequence, a: Sequence[int], panels: int = 256):
    """``M(w, a) = int_0^1 prod_i w_i(x)**a_i dx``."""
    if len(w_list) != len(a):
        raise ValueError(f"{len(w_list)} functions but {len(a)} exponents")
    if any(int(e) < 0 for e in a):
        raise ValueError("exponents must be non-negative")
    if all(isinstance(w, Step1D) for w in w_list):
        steps = list(w_list)
        exact = all(_exact_number(p) is not None for s in steps for p in s.weights + s.values)
        cuts = _refine_1d(steps)
        pts = [0] + cuts + [1]
        total = Fraction(0) if exact else 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            mid = (float(lo) + float(hi)) / 2
            term = (hi - lo) if exact else float(hi) - float(lo)
            for s, e in zip(steps, a):
                cum = np.cumsum([float(p) for p in s.weights])[:-1]
                v = s.values[int(np.searchsorted(cum, mid, side="right"))]
                term = term * (v if exact else float(v)) ** int(e)
            total = total + term
        return total
    return _quad(lambda x: np.prod([np.asarray(w(x), dtype=float) ** int(e)
                                    for w, e in zip(w_list, a)], axis=0), panels)


def finite_rank_density(F: Graph, lambdas: Sequence, w_list: Sequence, cap: int = 10 ** 7):
    """``t(F, sum_k lambda_k w_k(x) w_k(y))`` via the moment expansion."""
    if not (F.is_simple and F.is_blue):
        raise GraphError("finite-rank expansion needs a simple blue graph")
    r = len(lambdas)
    if r != len(w_list):
        raise ValueError("one function per eigenvalue required")
    E = len(F.edges)
    if r ** E > cap:
        raise DensityCapError(f"{r}^{E} edge colourings exceed the cap {cap}")
    memo: dict = {}
    total = 0
    for phi in itertools.product(range(r), repeat=E):
        lam = 1
        for k in phi:
            lam = lam * lambdas[k]
        if lam == 0:
            continue
        prod = lam
        for i in range(F.n):
            d = [0] * r
            for (u, v, _), k in zip(F.edges, phi):
                if i in (u, v):
                    d[k] += 1
            key = tuple(d)
            if key not in memo:
                memo[key] = moments(w_list, key)
            prod = prod * memo[key]
        total = total + prod
    return total


def finite_rank_graphon(lambdas: Sequence, w_list: Sequence, name: str = "finite-rank") -> Graphon:
    lam = [float(v) for v in lambdas]
    grid = np.linspace(0, 1, 2001)
    sup = [float(np.max(np.abs(w(grid)))) for w in w_list]
    bound = sum(abs(l) * s * s for l, s in zip(lam, sup))

    def kernel(x, y):
        out = np.zeros(np.shape(x))
        for l, w in zip(lam, w_list):
            out = out + l * w(x) * w(y)
        return out

    vals = kernel(grid[:, None], grid[None, :])
    lo, hi = float(vals.min()), float(vals.max())
    return Graphon(kernel, (max(lo - 1e-9, -bound), min(hi + 1e-9, bound)), name=name)


# -- variational derivative ---------------------------------------------------

def _same_partition(a: StepStructure, b: StepStructure) -> bool:
    if a.m != b.m or not (a.is_interval and b.is_interval):
        return False
    return bool(np.all(np.abs(a.wf - b.wf) <= 1e-15))


def variational_check(F: Graph, w: Graphon, delta: Graphon, h=Fraction(1, 10_000)):
    """Central difference of ``t(F, W + s*Delta)`` at ``s = 0`` against the
    pairing ``<Delta, t^2(F^ddag, W)>``.  Returns ``(lhs, rhs, rel_err)``."""
    if w.step is None or delta.step is None or not _same_partition(w.step, delta.step):
        raise GraphonError("W and Delta must be stepfunctions on the same interval partition")
    s, d = w.step, delta.step
    rational = s.exact and d.exact and isinstance(h, (int, Fraction))
    if rational:
        vals, dv, wts, hh = s.values, d.values, s.weights, Fraction(h)
    else:
        vals, dv, wts, hh = s.vf, d.vf, s.wf, float(h)
    plus = step(wts, vals + hh * dv)
    minus = step(wts, vals - hh * dv)
    tp = t_exact_step(F, plus, cap=None, rational=rational)
    tm = t_exact_step(F, minus, cap=None, rational=rational)
    if rational:
        lhs = (tp.exact - tm.exact) / (2 * hh)
    else:
        lhs = (tp.value - tm.value) / (2 * hh)
    deriv = razborov(F, "ddag")
    rhs = Fraction(0) if rational else 0.0
    if deriv:
        for i in range(s.m):
            for j in range(s.m):
                t2 = tk_exact_blocks(deriv, s, (i, j), rational)
                rhs = rhs + wts[i] * wts[j] * dv[i, j] * t2
    lhs_f, rhs_f = float(lhs), float(rhs)
    rel = abs(lhs_f - rhs_f) / abs(lhs_f) if lhs_f != 0 else abs(rhs_f)
    return lhs_f, rhs_f, rel
