"""Empirical distributions: ECDF, two-sample Kolmogorov-Smirnov and 1-D Wasserstein."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, InvalidInputError


def _sample(values, name="sample") -> np.ndarray:
    x = np.asarray(values, dtype=float).reshape(-1)
    if x.size == 0:
        raise InsufficientDataError(f"{name} is empty")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return np.sort(x, kind="stable")


class Ecdf:
    """Right-continuous step function F(x) = #(values <= x) / n."""

    def __init__(self, values):
        self.values = _sample(values)
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.size

    def __call__(self, x):
        out = np.searchsorted(self.values, x, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    def steps(self):
        """Distinct support points and the ECDF value at each."""
        xs = np.unique(self.values)
        return xs, self(xs)


def ecdf(values) -> Ecdf:
    return Ecdf(values)


@dataclass(frozen=True)
class KsResult:
    d_n: float
    p_value: float


def kolmogorov_sf(lam: float) -> float:
    """Survival function Q(lam) of the Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.18:
        # Jacobi theta form; the alternating series converges slowly here
        s = sum(math.exp(-((2 * j - 1) ** 2) * math.pi ** 2 / (8 * lam * lam)) for j in range(1, 8))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2 * math.pi) / lam * s))
    s = sum((-1) ** (j - 1) * math.exp(-2 * j * j * lam * lam) for j in range(1, 101))
    return min(1.0, max(0.0, 2.0 * s))


def ks_two_sample(a, b) -> KsResult:
    """Two-sample KS statistic (exact sup over the pooled sample) and asymptotic p-value."""
    a = _sample(a, "first sample")
    b = _sample(b, "second sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    n_eff = a.size * b.size / (a.size + b.size)
    root = math.sqrt(n_eff)
    return KsResult(d, kolmogorov_sf((root + 0.12 + 0.11 / root) * d))


def wasserstein1(a, b) -> float:
    """Integral of |F_a - F_b| over the pooled support, computed piecewise exactly."""
    a = _sample(a, "first sample")
    b = _sample(b, "second sample")
    grid = np.unique(np.concatenate([a, b]))
    if grid.size < 2:
        return 0.0
    fa = np.searchsorted(a, grid[:-1], side="right") / a.size
    fb = np.searchsorted(b, grid[:-1], side="right") / b.size
    return float(np.sum(np.abs(fa - fb) * np.diff(grid)))
