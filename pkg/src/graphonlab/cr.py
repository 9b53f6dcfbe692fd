"""Complement-reducible graphons on rooted trees.

A point of [0,1] descends the tree through nested intervals: at node ``u``
the children split the current interval in proportion ``f(child)/f(u)``.
Two points are adjacent when the last node their paths share sits at odd
depth (root depth 0).  Points that end in the same leaf use the leaf's
depth, so leaf blocks at odd depth are cliques.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable

import numpy as np

from .graphon import Graphon, step

MAX_DEPTH = 64


class CRError(ValueError):
    pass


class UndeterminedError(CRError):
    """Two distinct points still share a path at the depth limit."""


# -- trees ---------------------------------------------------------------------

class CRTree:
    """Rooted, locally finite, possibly infinite tree with ordered children."""

    root: Hashable

    def children(self, node) -> tuple:
        raise NotImplementedError

    def depth(self, node) -> int:
        raise NotImplementedError

    def is_leaf(self, node) -> bool:
        return not self.children(node)

    def nodes_to_depth(self, depth: int) -> Iterable:
        frontier = [self.root]
        for _ in range(depth + 1):
            nxt = []
            for u in frontier:
                yield u
                nxt.extend(self.children(u))
            frontier = nxt

    def validate(self, depth: int = 10):
        if self.is_leaf(self.root):
            return
        for u in self.nodes_to_depth(depth):
            ch = self.children(u)
            if u != self.root and len(ch) == 1:
                raise CRError(f"node {u!r} has exactly one child")


class FiniteTree(CRTree):
    def __init__(self, children: dict, root):
        self._children = {u: tuple(v) for u, v in children.items()}
        self.root = root
        self._depth = {root: 0}
        seen = {root}
        stack = [root]
        while stack:
            u = stack.pop()
            for v in self._children.get(u, ()):
                if v in seen:
                    raise CRError(f"node {v!r} reached twice; not a tree")
                seen.add(v)
                self._depth[v] = self._depth[u] + 1
                stack.append(v)
        extra = set(self._children) - seen
        if extra:
            raise CRError(f"nodes {sorted(map(str, extra))} are not reachable from the root")
        self.validate(len(seen))

    def children(self, node) -> tuple:
        return self._children.get(node, ())

    def depth(self, node) -> int:
        return self._depth[node]

    @property
    def nodes(self) -> list:
        return list(self._depth)

    @property
    def height(self) -> int:
        return max(self._depth.values())


class BinaryTree(CRTree):
    """Root with one child above a complete infinite binary tree.  Nodes are
    tuples of child indices."""

    root = ()

    def children(self, node) -> tuple:
        if node == ():
            return ((0,),)
        return (node + (0,), node + (1,))

    def depth(self, node) -> int:
        return len(node)


class CaterpillarTree(CRTree):
    """Path ``("p", k)`` with ``n_{k+1}`` leaf children ``("l", k+1, j)`` at
    every level; the path ends in leaves when the sequence terminates."""

    def __init__(self, seq: "CFSequence"):
        self.seq = seq
        self.root = ("p", 0)

    def children(self, node) -> tuple:
        if node[0] == "l":
            return ()
        k = node[1]
        lvl = self.seq.level(k + 1)
        if lvl is None:
            return ()
        n, _, last = lvl
        leaves = tuple(("l", k + 1, j) for j in range(n + (1 if last else 0)))
        return leaves if last else leaves + (("p", k + 1),)

    def depth(self, node) -> int:
        return node[1]


# -- weights -------------------------------------------------------------------

@dataclass
class WeightedCRTree:
    tree: CRTree
    f: Callable
    c: Callable
    name: str = "cr"
    cut_depth: int | None = None  # path nodes at this depth act as leaves
    fast_eval: Callable | None = None
    _cum: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def d(self, node):
        fv = self.f(node)
        return self.c(node) / fv if fv else 0

    def children(self, node) -> tuple:
        if self.cut_depth is not None and self.tree.depth(node) >= self.cut_depth:
            return ()
        return self.tree.children(node)

    def child_cuts(self, node):
        with self._lock:
            hit = self._cum.get(node)
            if hit is None:
                ch = self.children(node)
                fu = float(self.f(node))
                fr = np.cumsum([float(self.f(v)) / fu for v in ch])
                hit = (ch, fr[:-1].copy())
                self._cum[node] = hit
        return hit

    @property
    def degree(self):
        return self.c(self.tree.root)

    def eval(self, x, y, max_depth: int = MAX_DEPTH) -> np.ndarray:
        if self.fast_eval is not None:
            return self.fast_eval(x, y)
        return descend_eval(self, x, y, max_depth)

    def graphon(self, max_depth: int = MAX_DEPTH) -> Graphon:
        g = Graphon(lambda x, y: self.eval(x, y, max_depth), (0.0, 1.0), name=self.name,
                    symmetrize=False)
        g.cr = self
        return g

    def point_path(self, x: float, max_depth: int = MAX_DEPTH) -> list:
        """Nodes on the root path of ``x``, down to a leaf or the depth limit."""
        node, s = self.tree.root, float(x)
        out = [node]
        for _ in range(max_depth):
            ch, cuts = self.child_cuts(node)
            if not ch:
                break
            i = int(np.searchsorted(cuts, s, side="left"))
            lo = cuts[i - 1] if i else 0.0
            hi = cuts[i] if i < len(cuts) else 1.0
            s = (s - lo) / (hi - lo)
            node = ch[i]
            out.append(node)
        return out


def descend_eval(wt: WeightedCRTree, x, y, max_depth: int = MAX_DEPTH) -> np.ndarray:
    """Adjacency by simultaneous interval descent (vectorized over pairs)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    sx, sy = x.ravel().copy(), y.ravel().copy()
    out = np.zeros(sx.shape)
    ids = np.zeros(sx.shape, dtype=np.int64)
    nodes = [wt.tree.root]
    index = {wt.tree.root: 0}
    active = np.ones(sx.shape, dtype=bool)
    for _ in range(max_depth + 1):
        if not active.any():
            break
        act = np.flatnonzero(active)
        for nid in np.unique(ids[act]):
            sel = act[ids[act] == nid]
            node = nodes[nid]
            par = float(wt.tree.depth(node) % 2)
            ch, cuts = wt.child_cuts(node)
            if not ch:
                out[sel] = par
                active[sel] = False
                continue
            ix = np.searchsorted(cuts, sx[sel], side="left")
            iy = np.searchsorted(cuts, sy[sel], side="left")
            split = ix != iy
            out[sel[split]] = par
            active[sel[split]] = False
            keep = sel[~split]
            ik = ix[~split]
            bounds = np.concatenate([[0.0], cuts, [1.0]])
            lo, hi = bounds[ik], bounds[ik + 1]
            sx[keep] = (sx[keep] - lo) / (hi - lo)
            sy[keep] = (sy[keep] - lo) / (hi - lo)
            for j in np.unique(ik):
                v = ch[j]
                if v not in index:
                    index[v] = len(nodes)
                    nodes.append(v)
                ids[keep[ik == j]] = index[v]
    if active.any():
        bad = np.flatnonzero(active)
        same = x.ravel()[bad] == y.ravel()[bad]
        if not same.all():
            i = bad[~same][0]
            raise UndeterminedError(
                f"points {x.ravel()[i]!r} and {y.ravel()[i]!r} not separated within depth {max_depth}")
        out[bad] = 0.0
    return out.reshape(shape)


def regular_weights(tree: FiniteTree, name: str = "cr") -> WeightedCRTree:
    """Exact weights of the regular CR-graphon on a finite tree.

    Bottom-up: a node with child degrees ``d_i`` gets degree
    ``d = 1 / sum 1/(1-d_i)`` and child ``i`` takes share ``d / (1-d_i)``.
    """
    deg: dict = {}
    share: dict = {}
    order = sorted(tree.nodes, key=tree.depth, reverse=True)
    for u in order:
        ch = tree.children(u)
        if not ch:
            deg[u] = Fraction(0)
            continue
        d = 1 / sum(1 / (1 - deg[v]) for v in ch)
        deg[u] = d
        for v in ch:
            share[v] = d / (1 - deg[v])
    f = {tree.root: Fraction(1)}
    for u in sorted(tree.nodes, key=tree.depth):
        for v in tree.children(u):
            f[v] = f[u] * share[v]
    c = {u: f[u] * deg[u] for u in tree.nodes}
    return WeightedCRTree(tree, f.__getitem__, c.__getitem__, name=name)


def weights_from_f(tree: FiniteTree, fvals: dict, name: str = "cr") -> WeightedCRTree:
    """Use given ``f`` values; ``c`` follows from ``c(leaf)=0`` bottom-up."""
    c: dict = {}
    for u in sorted(tree.nodes, key=tree.depth, reverse=True):
        ch = tree.children(u)
        c[u] = Fraction(0) if not ch else fvals[ch[0]] - c[ch[0]]
    return WeightedCRTree(tree, fvals.__getitem__, c.__getitem__, name=name)


def degree_from_path(fvals: Iterable, leaf_terminated: bool = False, tail: float = 1e-12) -> float:
    """Degree ``c(v_0)`` from the ``f`` values along a root path.

    ``c(v_0) = f(v_1) - f(v_2) + f(v_3) - ...``, which follows from
    ``c(u) + c(v) = f(v)`` with ``c -> 0`` along the path (or ``c = 0`` at a
    final leaf).  ``fvals[0]`` is ``f(v_0)`` and only enters the monotonicity
    check.
    """
    total = 0.0
    prev = None
    sign = 1.0
    for k, fv in enumerate(fvals):
        fv = float(fv)
        if prev is not None and fv > prev * (1 + 1e-12):
            raise CRError(f"f values increase along the path at position {k}")
        prev = fv
        if k == 0:
            continue
        if fv < tail and not leaf_terminated:
            break
        total += sign * fv
        sign = -sign
    return total


def check_invariants(wt: WeightedCRTree, depth: int = 10) -> list[str]:
    """Violations of the weight identities on the first ``depth`` levels."""
    bad = []
    t = wt.tree
    if wt.f(t.root) != 1:
        bad.append(f"f(root) = {wt.f(t.root)}")
    for u in t.nodes_to_depth(depth):
        ch = t.children(u)
        fu, cu = wt.f(u), wt.c(u)
        if fu < 0 or cu < 0:
            bad.append(f"negative weight at {u!r}")
        if not ch:
            if cu != 0:
                bad.append(f"c(leaf {u!r}) = {cu}")
            continue
        if t.depth(u) >= depth:
            continue
        if sum(wt.f(v) for v in ch) != fu:
            bad.append(f"f({u!r}) != sum over children")
        r = len(ch)
        if cu * r > fu:
            bad.append(f"c({u!r}) > f/{r}")
        for v in ch:
            if cu + wt.c(v) != wt.f(v):
                bad.append(f"c({u!r}) + c({v!r}) != f({v!r})")
            rv = len(t.children(v))
            # the sibling bound needs a sibling and a non-leaf child
            if r >= 2 and rv >= 1 and fu * rv < (2 * rv - 1) * wt.f(v):
                bad.append(f"f({u!r}) < (2-1/{rv}) f({v!r})")
    return bad


# -- the binary-tree graphon ----------------------------------------------------

_B = 53


def _digits(x, bits: int) -> np.ndarray:
    """Integer of the first ``bits`` binary digits, using the expansion that
    does not terminate (so dyadic points fall to the left)."""
    x = np.asarray(x, dtype=float)
    scaled = np.ldexp(x, bits)
    n = np.ceil(scaled) - 1
    n = np.clip(n, 0, 2.0 ** bits - 1)
    return n.astype(np.uint64)


def _top_bit(v: np.ndarray) -> np.ndarray:
    """Index of the highest set bit of positive integers below 2**53."""
    return (np.frexp(v.astype(float))[1] - 1).astype(np.int64)


def _undetermined(x, y, same):
    if np.any(same):
        xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if np.any(xs[same] != ys[same]):
            i = np.flatnonzero((xs != ys) & same)[0]
            raise UndeterminedError(f"points {xs.flat[i]!r} and {ys.flat[i]!r} not separated")


def binary_eval(x, y) -> np.ndarray:
    """Binary-tree graphon: the paths share the depth-1 node plus one node per
    common leading digit, so they split at depth ``1 + common`` and are
    adjacent when that is odd."""
    a, b = _digits(x, _B), _digits(y, _B)
    xor = a ^ b
    same = xor == 0
    _undetermined(x, y, same)
    common = (_B - 1) - _top_bit(np.where(same, 1, xor))
    return np.where(same, 0.0, (common % 2 == 0).astype(float))


def lexpower_c4_eval(x, y) -> np.ndarray:
    """Infinite lexicographic power of C4: adjacent when the first differing
    base-4 digits differ by an odd amount."""
    bits = 52
    a, b = _digits(x, bits), _digits(y, bits)
    xor = a ^ b
    same = xor == 0
    _undetermined(x, y, same)
    top = _top_bit(np.where(same, 1, xor))
    pair = (bits - 1 - top) // 2  # index of the first differing base-4 digit
    shift = (bits - 2 - 2 * pair).astype(np.uint64)
    da = (a >> shift) & np.uint64(3)
    db = (b >> shift) & np.uint64(3)
    odd = ((da ^ db) & np.uint64(1)).astype(float)
    return np.where(same, 0.0, odd)


def make_binary() -> WeightedCRTree:
    tree = BinaryTree()

    def f(node):
        k = len(node)
        return Fraction(1) if k <= 1 else Fraction(1, 2 ** (k - 1))

    def c(node):
        return Fraction(2, 3) if node == () else f(node) / 3

    return WeightedCRTree(tree, f, c, name="U_B", fast_eval=binary_eval)


def binary_graphon() -> Graphon:
    return make_binary().graphon()


def lexpower_graphon() -> Graphon:
    g = Graphon(lexpower_c4_eval, (0.0, 1.0), name="lexC4", symmetrize=False)
    return g


# -- continued-fraction graphons ------------------------------------------------

class CFSequence:
    """Levels of the caterpillar for density ``alpha`` (exact arithmetic on
    the rational value of ``alpha``)."""

    def __init__(self, alpha):
        a = Fraction(alpha) if not isinstance(alpha, str) else Fraction(alpha)
        if not 0 < a < 1:
            raise CRError(f"alpha must lie in (0,1), got {alpha}")
        self.alpha = a
        self._levels: list = []  # (n_k, alpha_k, terminal)
        self._next = a
        self._lock = threading.Lock()

    def level(self, k: int):
        """``(n_k, alpha_k, terminal)`` for ``k >= 1``, or None past the end."""
        with self._lock:
            while len(self._levels) < k and self._next is not None:
                ak = self._next
                inv = 1 / ak
                n = math.floor(inv) - 1
                if inv.denominator == 1:
                    self._levels.append((n, ak, True))
                    self._next = None
                else:
                    self._levels.append((n, ak, False))
                    self._next = 1 - ak / (1 - n * ak)
            return self._levels[k - 1] if k <= len(self._levels) else None

    def terms(self, count: int) -> list[int]:
        out = []
        for k in range(1, count + 1):
            lvl = self.level(k)
            if lvl is None:
                break
            out.append(lvl[0])
        return out


def cf_sequence(alpha, count: int) -> list[int]:
    """Leaf counts ``n_1, n_2, ...`` of the caterpillar for density ``alpha``."""
    return CFSequence(alpha).terms(count)


def make_cf(alpha, depth: int = 40) -> WeightedCRTree:
    """Caterpillar CR-graphon of density ``alpha``; the path is cut at
    ``depth`` and the remaining block closed by parity."""
    seq = CFSequence(alpha)
    tree = CaterpillarTree(seq)
    fpath = {0: Fraction(1)}

    def path_f(k):
        while k not in fpath:
            j = max(fpath)
            n, a, _ = seq.level(j + 1)
            fpath[j + 1] = fpath[j] * (1 - n * a)
        return fpath[k]

    def f(node):
        if node[0] == "p":
            return path_f(node[1])
        _, k, _ = node
        return path_f(k - 1) * seq.level(k)[1]

    def c(node):
        if node[0] == "l":
            return Fraction(0)
        lvl = seq.level(node[1] + 1)
        return Fraction(0) if lvl is None else path_f(node[1]) * lvl[1]

    return WeightedCRTree(tree, f, c, name=f"cf({float(seq.alpha):.12g})", cut_depth=depth)


# -- truncation ------------------------------------------------------------------

def truncate(wt: WeightedCRTree, depth: int, exact_limit: int = 256) -> Graphon:
    """Stepfunction on the nodes cut at ``depth`` (plus shallower leaves).

    Blocks are laid out in depth-first order, matching the interval descent.
    Off-diagonal values come from the parity of the last common node; each
    diagonal block takes the parity of its own node.
    """
    if depth < 1:
        raise CRError("truncation depth must be >= 1")
    tree = wt.tree

    def cut(u) -> tuple:
        return () if tree.depth(u) >= depth else wt.children(u)

    blocks: list = []

    def collect(u):
        ch = cut(u)
        if not ch:
            blocks.append(u)
        for v in ch:
            collect(v)

    collect(tree.root)
    m = len(blocks)
    pos = {u: i for i, u in enumerate(blocks)}
    vals = np.zeros((m, m))

    def fill(u) -> tuple[int, int]:
        ch = cut(u)
        if not ch:
            i = pos[u]
            vals[i, i] = tree.depth(u) % 2
            return i, i + 1
        spans = [fill(v) for v in ch]
        lo, hi = spans[0][0], spans[-1][1]
        par = tree.depth(u) % 2
        for a, b in spans:
            vals[a:b, lo:a] = par
            vals[a:b, b:hi] = par
        return lo, hi

    fill(tree.root)
    if m <= exact_limit:
        wts = [Fraction(wt.f(u)) for u in blocks]
        ev = np.empty((m, m), dtype=object)
        for i in range(m):
            for j in range(m):
                ev[i, j] = Fraction(int(vals[i, j]))
        g = step(wts, ev, name=f"{wt.name}|{depth}")
    else:
        g = step([float(wt.f(u)) for u in blocks], vals, name=f"{wt.name}|{depth}")
    g.cut_nodes = blocks
    return g


# -- tree files -------------------------------------------------------------------

def parse_tree(text: str, name: str = "cr") -> WeightedCRTree:
    """``node <id> children <ids...>``, ``root <id>``, optional ``f <id> <p/q>``."""
    children: dict = {}
    fvals: dict = {}
    root = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "node":
                if len(tok) < 3 or tok[2] != "children":
                    raise CRError("expected 'node <id> children <ids>'")
                if tok[1] in children:
                    raise CRError(f"node {tok[1]} defined twice")
                children[tok[1]] = tuple(tok[3:])
            elif tok[0] == "root":
                if len(tok) != 2:
                    raise CRError("expected 'root <id>'")
                root = tok[1]
            elif tok[0] == "f":
                if len(tok) != 3:
                    raise CRError("expected 'f <id> <p/q>'")
                fvals[tok[1]] = Fraction(tok[2])
            elif tok[0] == "c":
                pass  # derived data written by format_tree
            else:
                raise CRError(f"unknown directive {tok[0]!r}")
        except (CRError, ValueError, ZeroDivisionError) as e:
            raise CRError(f"line {ln}: {e}") from None
    if root is None:
        raise CRError("missing 'root' line")
    tree = FiniteTree(children, root)
    if fvals:
        missing = [u for u in tree.nodes if u not in fvals]
        if missing:
            raise CRError(f"f missing for nodes {missing}")
        return weights_from_f(tree, fvals, name)
    return regular_weights(tree, name)


def format_tree(wt: WeightedCRTree, depth: int | None = None) -> str:
    tree = wt.tree
    if isinstance(tree, FiniteTree):
        nodes = tree.nodes
        lim = None
    else:
        lim = 6 if depth is None else depth
        nodes = list(tree.nodes_to_depth(lim))
    ids = {u: (u if isinstance(u, str) else _node_id(u)) for u in nodes}
    lines = [f"root {ids[tree.root]}"]
    for u in nodes:
        ch = () if lim is not None and tree.depth(u) >= lim else wt.children(u)
        lines.append(f"node {ids[u]} children " + " ".join(ids[v] for v in ch) if ch
                     else f"node {ids[u]} children")
    for u in nodes:
        lines.append(f"f {ids[u]} {wt.f(u)}")
    for u in nodes:
        lines.append(f"c {ids[u]} {wt.c(u)}")
    return "\n".join(lines) + "\n"


def _node_id(u) -> str:
    if isinstance(u, tuple) and all(isinstance(t, int) for t in u):
        return "r" + "".join(map(str, u))
    return "_".join(str(t) for t in u)


def star(k: int) -> FiniteTree:
    return FiniteTree({"r": tuple(f"l{i}" for i in range(k))}, "r")


def complete_tree(branching: int, height: int) -> FiniteTree:
    children: dict = {}
    frontier = ["r"]
    for _ in range(height):
        nxt = []
        for u in frontier:
            children[u] = tuple(f"{u}.{i}" for i in range(branching))
            nxt.extend(children[u])
        frontier = nxt
    return FiniteTree(children, "r")
