"""Kernel-operator spectra of stepfunctions and inversion of ``W -> p(W)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .graphon import Graphon, GraphonError, step, step_power

TRUNCATE = 1e-9


@dataclass(frozen=True)
class Eigenpair:
    value: float
    weights: np.ndarray  # block weights
    vector: np.ndarray  # eigenfunction value on each block

    def __call__(self, x, block_of=None):
        cum = np.cumsum(self.weights)[:-1]
        idx = block_of(x) if block_of else np.searchsorted(cum, np.asarray(x, dtype=float), side="right")
        return self.vector[idx]


def eigendecompose(w: Graphon, top_k: int | None = None) -> list[Eigenpair]:
    """Eigenpairs sorted by decreasing ``|eigenvalue|``; eigenfunctions are
    orthonormal in ``L^2[0,1]``."""
    if w.step is None:
        raise GraphonError(f"{w.name} has no step structure")
    p = w.step.wf
    a = w.step.vf
    sq = np.sqrt(p)
    mu, v = np.linalg.eigh(sq[:, None] * a * sq[None, :])
    order = np.argsort(-np.abs(mu), kind="stable")
    if top_k is not None:
        order = order[:top_k]
    return [Eigenpair(float(mu[i]), p, v[:, i] / sq) for i in order]


def reconstruct(pairs: Sequence[Eigenpair]) -> np.ndarray:
    m = len(pairs[0].vector)
    out = np.zeros((m, m))
    for e in pairs:
        out += e.value * np.outer(e.vector, e.vector)
    return out


class Polynomial:
    """``p(z) = sum_i a_i z**i`` for ``i = 1..n`` (no constant term)."""

    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = [float(c) for c in coeffs]
        while self.coeffs and self.coeffs[-1] == 0.0:
            self.coeffs.pop()
        if not self.coeffs:
            raise GraphonError("zero polynomial")

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return sum(c * z ** i for i, c in enumerate(self.coeffs, start=1))

    def deriv(self, z):
        z = np.asarray(z, dtype=float)
        return sum(i * c * z ** (i - 1) for i, c in enumerate(self.coeffs, start=1))

    def check_bijective(self, grid: int = 20001):
        lead = self.coeffs[-1]
        if self.degree % 2 == 0 or lead <= 0:
            raise GraphonError("p must have odd degree and a positive leading coefficient")
        bound = 1.0 + max(abs(c / lead) * self.degree for c in self.coeffs)
        z = np.linspace(-bound, bound, grid)
        if np.any(self.deriv(z) < -1e-12):
            raise GraphonError("p is not increasing on the real line")

    def inverse(self, y: float) -> float:
        y = float(y)
        if y == 0.0:
            return 0.0
        hi = 1.0
        while self(hi) < abs(y):
            hi *= 2
        lo = -hi
        return brentq(lambda z: float(self(z)) - y, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)

    def apply_step(self, w: Graphon) -> np.ndarray:
        """Block matrix of ``sum_i a_i W^{oi}`` for an interval stepfunction."""
        out = np.zeros((w.step.m, w.step.m))
        for i, c in enumerate(self.coeffs, start=1):
            if c:
                out += c * np.asarray(step_power(_float_step(w), i), dtype=float)
        return out


def _float_step(w: Graphon) -> Graphon:
    if not w.step.exact:
        return w
    return step(w.step.wf, w.step.vf)


def spectral_solve(u: Graphon, coeffs: Sequence[float], truncate: float = TRUNCATE) -> Graphon:
    """The graphon ``W`` with ``p(W) = U`` where ``p(z) = sum a_i z^i``."""
    if u.step is None:
        raise GraphonError(f"{u.name} has no step structure")
    p = Polynomial(coeffs)
    p.check_bijective()
    pairs = [e for e in eigendecompose(u) if abs(e.value) >= truncate]
    solved = [Eigenpair(p.inverse(e.value), e.weights, e.vector) for e in pairs]
    m = u.step.m
    vals = reconstruct(solved) if solved else np.zeros((m, m))
    vals = (vals + vals.T) / 2
    w = step(u.step.wf, vals, name=f"specsolve({u.name})", index=u.step.index)
    w.eigenpairs = solved
    return w
