"""Seeded K-means (k-means++ initialisation, Lloyd iterations) and choice of k."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import InvalidInputError, InvalidKError
from .assessment import DiscriminatoryPower, try_discriminatory_power

K_RANGE = (3, 9)
RESTARTS = 10


@dataclass(frozen=True, eq=False)
class Clustering:
    k: int
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    seed: object
    iterations: int
    inertia_history: tuple[float, ...] = ()


def derive_seed(seed: int, k: int, restart: int) -> np.random.SeedSequence:
    """Independent, order-free seed for one (k, restart) clustering run."""
    return np.random.SeedSequence([int(seed), int(k), int(restart)])


def _sq_dist(x, centroids):
    diff = x[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _assign(x, centroids):
    d2 = _sq_dist(x, centroids)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(x.shape[0]), labels]


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dist(x, x[chosen]).min(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every point already coincides with a centre
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dist(x, x[[idx]])[:, 0])
    return x[chosen].copy()


def kmeans(m, k: int, seed, max_iter: int = 300, tol: float = 1e-6) -> Clustering:
    """Lloyd's algorithm from a k-means++ start.

    Stops once no centroid moves more than ``tol`` or after ``max_iter``
    updates. Empty clusters are re-seeded at the point farthest from its
    centroid. Inertia is checked to be non-increasing at every step.
    """
    x = np.asarray(m, dtype=float)
    if x.ndim != 2 or not np.all(np.isfinite(x)):
        raise InvalidInputError("kmeans expects a finite 2-D matrix")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise InvalidKError(f"k={k} must satisfy 1 <= k <= n={n}")
    rng = np.random.default_rng(seed)
    centroids = kmeans_plusplus(x, k, rng)
    labels, d2 = _assign(x, centroids)
    history = [float(d2.sum())]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new = np.empty_like(centroids)
        spare = d2.copy()
        for j in range(k):
            members = labels == j
            if np.any(members):
                new[j] = x[members].mean(axis=0)
            else:
                far = int(np.argmax(spare))
                new[j] = x[far]
                spare[far] = -1.0
        shift = float(np.max(np.sqrt(np.sum((new - centroids) ** 2, axis=1))))
        centroids = new
        labels, d2 = _assign(x, centroids)
        inertia = float(d2.sum())
        if inertia > history[-1] * (1 + 1e-12) + 1e-12:
            raise RuntimeError(f"k-means inertia increased: {history[-1]} -> {inertia}")
        history.append(inertia)
        if shift < tol:
            break
    return Clustering(k, centroids, labels, history[-1], seed, iterations, tuple(history))


def best_of_restarts(m, k: int, seed: int, restarts: int = RESTARTS, max_iter: int = 300, tol: float = 1e-6) -> Clustering:
    """Lowest-inertia clustering over ``restarts`` independently seeded runs."""
    best = None
    for r in range(restarts):
        c = kmeans(m, k, derive_seed(seed, k, r), max_iter, tol)
        if best is None or c.inertia < best.inertia:
            best = c
    return best


class KMeans(ClusterMixin, BaseEstimator):
    """scikit-learn style wrapper around :func:`best_of_restarts`."""

    def __init__(self, n_clusters: int = 5, seed: int = 0, n_init: int = RESTARTS, max_iter: int = 300, tol: float = 1e-6):
        self.n_clusters = n_clusters
        self.seed = seed
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.result_ = best_of_restarts(X, self.n_clusters, self.seed, self.n_init, self.max_iter, self.tol)
        self.cluster_centers_ = self.result_.centroids
        self.labels_ = self.result_.labels
        self.inertia_ = self.result_.inertia
        self.n_iter_ = self.result_.iterations
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        return _assign(check_array(X, dtype=float), self.cluster_centers_)[0]


@dataclass
class KReport:
    k: int
    clustering: Clustering
    power: Optional[DiscriminatoryPower]

    @property
    def max_dn(self) -> Optional[float]:
        return None if self.power is None else self.power.max_dn

    @property
    def min_dn(self) -> Optional[float]:
        return None if self.power is None else self.power.min_dn


@dataclass
class KSelection:
    best_k: int
    reports: list[KReport] = field(default_factory=list)
    power_available: bool = True
    discriminative: bool = True

    def report(self, k: int) -> KReport:
        return next(r for r in self.reports if r.k == k)


def select_k(
    m,
    d_robot,
    k_range: Sequence[int] = K_RANGE,
    seed: int = 0,
    restarts: int = RESTARTS,
    aggregate: str = "max",
) -> KSelection:
    """Cluster for every k in the inclusive ``k_range`` and keep the most discriminative.

    Each k is scored by the largest (``aggregate="max"``) or smallest
    (``"min"``) pairwise KS statistic between clusters' d_robot samples; ties
    go to the smaller k. When no k yields two eligible clusters the smallest
    k is returned with ``power_available`` False.
    """
    if aggregate not in ("max", "min"):
        raise InvalidInputError("aggregate must be 'max' or 'min'")
    x = np.asarray(m, dtype=float)
    d = np.asarray(d_robot, dtype=float).reshape(-1)
    if d.shape[0] != x.shape[0]:
        raise InvalidInputError("d_robot length differs from matrix rows")
    lo, hi = int(k_range[0]), int(k_range[-1])
    if lo < 1 or hi < lo:
        raise InvalidKError(f"invalid k range [{lo}, {hi}]")
    if hi > x.shape[0]:
        raise InvalidKError(f"k={hi} exceeds the number of rows n={x.shape[0]}")
    reports = []
    for k in range(lo, hi + 1):
        c = best_of_restarts(x, k, seed, restarts)
        reports.append(KReport(k, c, try_discriminatory_power(c.labels, d)))
    scored = [r for r in reports if r.power is not None]
    if not scored:
        return KSelection(lo, reports, power_available=False, discriminative=False)
    score = (lambda r: r.max_dn) if aggregate == "max" else (lambda r: r.min_dn)
    best = scored[0]
    for r in scored[1:]:
        if score(r) > score(best):
            best = r
    discriminative = max(r.max_dn for r in scored) > 1e-12
    return KSelection(best.k, reports, True, discriminative)
