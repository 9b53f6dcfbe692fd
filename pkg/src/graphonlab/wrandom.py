"""W-random graphs: sampling, induced-P4 scans, degree statistics and
density convergence experiments."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .density import _eliminate, density
from .graphon import Graphon, GraphonError
from .graphs import Graph, GraphError

MAX_SCAN = 200
MAX_PATTERN = 5


@dataclass(frozen=True)
class SampledGraph:
    n: int
    adj: np.ndarray  # symmetric boolean matrix, zero diagonal
    points: np.ndarray
    seed: int
    source: str = ""

    @property
    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.adj, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    @property
    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    @property
    def edge_density(self) -> float:
        if self.n < 2:
            return 0.0
        return float(np.triu(self.adj, 1).sum()) / (self.n * (self.n - 1) / 2)

    def to_graph(self) -> Graph:
        return Graph(self.n, tuple((u, v) for u, v in self.edges))

    def edge_list(self) -> str:
        lines = [f"# n={self.n} seed={self.seed} graphon={self.source}"]
        lines += [f"{u + 1} {v + 1}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


def sample_graph(w: Graphon, n: int, seed: int = 0) -> SampledGraph:
    """``G(W, n)``: uniform latent points, independent edges with probability
    ``W(x_i, x_j)``."""
    if not w.in_W0:
        raise GraphonError(f"{w.name} takes values outside [0,1]; cannot sample edges")
    if n < 1:
        raise ValueError("need at least one node")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    pts = rng.random(n)
    coins = rng.random((n, n))
    iu = np.triu_indices(n, 1)
    probs = w(pts[iu[0]], pts[iu[1]])
    adj = np.zeros((n, n), dtype=bool)
    adj[iu] = coins[iu] < probs
    adj = adj | adj.T
    return SampledGraph(n, adj, pts, seed, w.name)


def induced_p4(g: SampledGraph | np.ndarray, stop_at_first: bool = False) -> tuple[int, tuple | None]:
    """Count 4-sets inducing a path, by exhaustive scan.  Returns the count and
    one witness (or None)."""
    adj = g.adj if isinstance(g, SampledGraph) else np.asarray(g, dtype=bool)
    n = adj.shape[0]
    if n > MAX_SCAN:
        raise GraphError(f"exhaustive scan is capped at {MAX_SCAN} nodes")
    a = adj.astype(np.int8)
    count, witness = 0, None
    for i in range(n - 3):
        rest = np.arange(i + 1, n)
        if len(rest) < 3:
            break
        trip = np.array(list(itertools.combinations(rest.tolist(), 3)), dtype=np.int64)
        j, k, l = trip[:, 0], trip[:, 1], trip[:, 2]
        eij, eik, eil = a[i, j], a[i, k], a[i, l]
        ejk, ejl, ekl = a[j, k], a[j, l], a[k, l]
        deg = np.stack([eij + eik + eil, eij + ejk + ejl, eik + ejk + ekl, eil + ejl + ekl])
        edges = eij + eik + eil + ejk + ejl + ekl
        hit = (edges == 3) & (deg.max(axis=0) == 2) & (deg.min(axis=0) == 1)
        c = int(hit.sum())
        if c and witness is None:
            t = trip[np.argmax(hit)]
            witness = (i, int(t[0]), int(t[1]), int(t[2]))
        count += c
        if count and stop_at_first:
            break
    return count, witness


@dataclass(frozen=True)
class DegreeReport:
    n: int
    d: float
    eps: float
    max_degree: float
    min_degree: float
    max_deviation: float
    bound: float  # probability lower bound for all deviations <= eps

    @property
    def within_eps(self) -> bool:
        return self.max_deviation <= self.eps

    @property
    def vacuous(self) -> bool:
        return self.bound <= 0

    def text(self) -> str:
        return (f"n={self.n} d={self.d:.6g} eps={self.eps:g}: normalized degrees in "
                f"[{self.min_degree:.6f}, {self.max_degree:.6f}], max deviation {self.max_deviation:.6f}, "
                f"bound {self.bound:.6g}{' (vacuous)' if self.vacuous else ''}, "
                f"within eps: {self.within_eps}")


def azuma_bound(n: int, eps: float) -> float:
    return 1.0 - 2.0 * n * math.exp(-(n - 1) * eps * eps)


def degree_report(g: SampledGraph, d: float, eps: float) -> DegreeReport:
    if g.n < 2:
        raise ValueError("degree statistics need at least two nodes")
    norm = g.degrees / (g.n - 1)
    dev = float(np.max(np.abs(norm - d)))
    return DegreeReport(g.n, float(d), float(eps), float(norm.max()), float(norm.min()), dev,
                        azuma_bound(g.n, eps))


def hom_density(F: Graph, adj: np.ndarray) -> float:
    """``t(F, G)`` by exact integer homomorphism counting (colored edges use
    the complement matrix, diagonal included)."""
    if F.n > MAX_PATTERN:
        raise GraphError(f"pattern graphs are limited to {MAX_PATTERN} nodes")
    a = np.asarray(adj, dtype=np.int64)
    n = a.shape[0]
    comp = 1 - a
    factors = []
    for (u, v), (b, r) in F.pair_counts().items():
        mat = np.ones((n, n), dtype=np.int64)
        if b:
            mat = mat * a ** b
        if r:
            mat = mat * comp ** r
        factors.append(((u, v), mat))
    homs = int(_eliminate(factors, list(range(F.n)), np.ones(n, dtype=np.int64)))
    return homs / float(n) ** F.n


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    trials: int
    mean: float
    std: float
    lo: float
    hi: float
    target: float


def convergence_experiment(w: Graphon, F: Graph, n_list: Sequence[int], trials: int, seed: int = 0,
                           target_samples: int = 1_000_000) -> list[ConvergenceRow]:
    """Mean and spread of ``t(F, G(W, n))`` over independent trials."""
    if F.n > MAX_PATTERN:
        raise GraphError(f"pattern graphs are limited to {MAX_PATTERN} nodes")
    target = density(F, w, n=target_samples, seed=seed).value
    rows = []
    for n in n_list:
        vals = []
        for t in range(trials):
            s = int(np.random.SeedSequence([seed, n, t]).generate_state(1)[0])
            vals.append(hom_density(F, sample_graph(w, n, s).adj))
        v = np.array(vals)
        rows.append(ConvergenceRow(n, trials, float(v.mean()), float(v.std(ddof=1)) if trials > 1 else 0.0,
                                   float(v.min()), float(v.max()), target))
    return rows
