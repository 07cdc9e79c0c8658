"""Spectral-filter robust mean estimation.

Two entry points share one filter loop: compute the weighted mean and
covariance, and while the top eigenvalue of the covariance exceeds a stopping
threshold, zero the weights of the points with the largest squared projection
onto the top eigenvector.

* :func:`robust_mean_bounded_cov` -- covariance known only to be below
  ``sigma^2 I``; threshold ``sigma^2 (1 + c_stop)``.
* :func:`robust_mean_stable` -- inliers are stable around an identity
  covariance; threshold ``1 + c_stop * delta^2 / eps``.

Removing more than ``3 eps`` of the total mass raises
:class:`FilterDivergenceError` instead of returning a silently bad estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BOUNDED_COV_C_STOP = 10.0
STABLE_C_STOP = 0.3
# error constant for the stable routine: ||mu_hat - mu|| <= STABLE_C_EST * delta
STABLE_C_EST = 20.0

POWER_TOL = 1e-6
POWER_MAX_ITER = 1000


class FilterDivergenceError(RuntimeError):
    """The filter removed more than its 3*eps mass budget."""

    def __init__(self, message: str, report: "FilterReport"):
        super().__init__(message)
        self.report = report


@dataclass
class FilterReport:
    estimate: np.ndarray
    iterations: int
    removed_mass: float
    final_top_eigenvalue: float
    threshold: float
    trace: list[tuple[float, float]] = field(default_factory=list)
    weights: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "estimate": [float(x) for x in self.estimate],
            "iterations": self.iterations,
            "removed_mass": self.removed_mass,
            "final_top_eigenvalue": self.final_top_eigenvalue,
            "threshold": self.threshold if math.isfinite(self.threshold) else None,
            "trace": [[float(a), float(b)] for a, b in self.trace],
        }


def top_eigenpair(
    matrix: np.ndarray,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    rng: np.random.Generator | None = None,
) -> tuple[float, np.ndarray]:
    """Largest eigenvalue/eigenvector of a symmetric PSD matrix by power iteration.

    Starts from the largest-norm column; if that fails to converge within
    ``max_iter`` (or the iterate collapses), restarts once from a random vector.
    """
    d = matrix.shape[0]
    col = int(np.argmax(np.einsum("ij,ij->j", matrix, matrix)))
    starts = [matrix[:, col].astype(float)]
    for attempt in range(2):
        x = starts[0] if attempt == 0 else (rng or np.random.default_rng(0)).standard_normal(d)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            if attempt == 0:
                continue
            return 0.0, np.eye(d)[0]
        x = x / nx
        lam = float(x @ matrix @ x)
        for _ in range(max_iter):
            y = matrix @ x
            ny = np.linalg.norm(y)
            if ny == 0.0:
                return 0.0, x
            x_new = y / ny
            lam_new = float(x_new @ matrix @ x_new)
            if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-12):
                return lam_new, x_new
            x, lam = x_new, lam_new
    return lam, x


def weighted_mean_cov(points: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    total = w.sum()
    mu = (w @ points) / total
    c = points - mu
    cov = (c * w[:, None]).T @ c / total
    return mu, cov


def _filter(points: np.ndarray, eps: float, threshold: float) -> FilterReport:
    x = np.asarray(points, dtype=float)
    s, d = x.shape
    w = np.full(s, 1.0 / s)
    budget = 3.0 * eps
    removed = 0.0
    trace: list[tuple[float, float]] = []
    it = 0
    while True:
        mu, cov = weighted_mean_cov(x, w)
        lam, v = top_eigenpair(cov)
        if lam <= threshold:
            return FilterReport(mu, it, removed, lam, threshold, trace, w)
        alive = np.flatnonzero(w > 0)
        scores = ((x[alive] - mu) @ v) ** 2
        med = float(np.median(scores))
        tail_mass = float(w[alive][scores > 2.0 * med].sum())
        target = min(eps / 4.0, tail_mass)
        if target <= 0.0:
            report = FilterReport(mu, it, removed, lam, threshold, trace, w)
            raise FilterDivergenceError(
                f"top eigenvalue {lam:.4g} above threshold {threshold:.4g} with no removable mass", report
            )
        order = alive[np.argsort(-scores, kind="stable")]
        cum = np.cumsum(w[order])
        k = int(np.searchsorted(cum, target - 1e-15)) + 1
        drop = order[:k]
        mass = float(w[drop].sum())
        w[drop] = 0.0
        removed += mass
        it += 1
        trace.append((lam, mass))
        if removed > budget + 1.0 / s:
            mu, _ = weighted_mean_cov(x, w)
            report = FilterReport(mu, it, removed, lam, threshold, trace, w)
            raise FilterDivergenceError(f"removed mass {removed:.4g} exceeds budget {budget:.4g}", report)


def robust_mean_bounded_cov(
    data: np.ndarray, eps: float, sigma: float, c_stop: float = BOUNDED_COV_C_STOP
) -> FilterReport:
    """Robust mean for inliers with covariance at most ``sigma^2 I``.

    On an eps-corrupted sample the estimate is within O(sigma sqrt(eps)) of the
    inlier mean.
    """
    data = np.asarray(data, dtype=float)
    if not 0.0 <= eps <= 0.1:
        raise ValueError(f"eps must lie in [0, 0.1], got {eps}")
    if data.shape[0] < data.shape[1]:
        raise ValueError("need at least as many points as dimensions")
    return _filter(data, eps, sigma**2 * (1.0 + c_stop))


def stable_threshold(eps: float, delta: float, c_stop: float = STABLE_C_STOP) -> float:
    if eps <= 0.0:
        return math.inf
    return 1.0 + c_stop * delta**2 / eps


def robust_mean_stable(
    data: np.ndarray, eps: float, delta: float, c_stop: float = STABLE_C_STOP
) -> FilterReport:
    """Robust mean for data whose inliers are (3 eps, delta)-stable with identity covariance.

    Stability is the caller's responsibility; under it the error is O(delta).
    """
    data = np.asarray(data, dtype=float)
    if not 0.0 <= eps <= 0.1:
        raise ValueError(f"eps must lie in [0, 0.1], got {eps}")
    return _filter(data, eps, stable_threshold(eps, delta, c_stop))


def stability_diagnostic(
    data: np.ndarray,
    mu: np.ndarray,
    eps: float,
    n_directions: int = 64,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Greedy lower estimates of the two stability deviations of ``data`` around ``mu``.

    For each probed direction, the (1 - eps)-subsets that push the projected
    mean or second moment furthest are found by trimming the extreme eps
    fraction. Directions: coordinate axes, the top covariance eigenvector, the
    direction of the mean offset, and random unit vectors.
    """
    x = np.asarray(data, dtype=float) - np.asarray(mu, dtype=float)
    s, d = x.shape
    rng = rng or np.random.default_rng(0)
    dirs = [np.eye(d)[i] for i in range(min(d, 32))]
    _, cov = weighted_mean_cov(x, np.full(s, 1.0 / s))
    dirs.append(top_eigenpair(cov)[1])
    off = x.mean(axis=0)
    if np.linalg.norm(off) > 0:
        dirs.append(off / np.linalg.norm(off))
    g = rng.standard_normal((n_directions, d))
    dirs.extend(g / np.linalg.norm(g, axis=1, keepdims=True))
    drop = int(math.floor(eps * s))
    keep = s - drop
    mean_dev = 0.0
    var_dev = 0.0
    for v in dirs:
        y = np.sort(x @ v)
        sq = np.sort(y**2)
        means = (y[drop:].mean(), y[:keep].mean())
        seconds = (sq[drop:].mean(), sq[:keep].mean())
        mean_dev = max(mean_dev, max(abs(m) for m in means))
        var_dev = max(var_dev, max(abs(m - 1.0) for m in seconds))
    return mean_dev, var_dev
