"""Choosing among candidate models: a robust bracket for phi, the pairwise
majority ranking, and Scheffe-style tournaments.

The tournament compares each pair of candidates on the set where the first
has strictly larger likelihood. The candidate whose mass on that set is closer
to the empirical mass wins the comparison; the overall winner has the fewest
losses (ties to the smaller index). Model masses come from Monte Carlo draws
in general, and from the exact Kendall-tau distance law when every candidate
shares one central ranking.
"""

from __future__ import annotations

import math

import numpy as np

from .mallows import MallowsModel, kt_distance_pmf, log_pmf_from_distance, sample_many
from .perm_core import Permutation, as_batch, batch_kendall_tau, pairwise_preferences

MC_CAP = 1_000_000


def copeland_ranking(samples) -> Permutation:
    """Rank elements by the number of pairwise majorities they win.

    Agrees with the majority relation whenever that relation is acyclic.
    Ties go to the smaller element.
    """
    w = pairwise_preferences(as_batch(samples))
    wins = (w > 0.5).sum(axis=1) + 0.5 * ((w == 0.5).sum(axis=1) - 1)
    return Permutation(np.argsort(-wins, kind="stable") + 1)


def majority_certified(samples, eps: float, order: Permutation | None = None) -> bool:
    """True when every pairwise majority along ``order`` survives any eps-corruption.

    Each pair must be preferred in the order's direction by more than
    ``1/2 + eps`` plus three binomial standard errors, so the observed
    majority is also the honest one, and the honest majority is the central
    ranking.
    """
    samples = as_batch(samples)
    s, n = samples.shape
    if n < 2:
        return True
    order = order or copeland_ranking(samples)
    w = pairwise_preferences(samples)
    m = order.mapping - 1
    upper = w[np.ix_(m, m)][np.triu_indices(n, 1)]
    return bool(upper.min() > 0.5 + eps + 3.0 * math.sqrt(0.25 / s))


def _adjacent_rates(w: np.ndarray, order: Permutation) -> np.ndarray:
    m = order.mapping - 1
    a, b = m[:-1], m[1:]
    return np.minimum(w[a, b], w[b, a])


def _phi_from_rate(p: float) -> float:
    if p >= 0.5:
        return 1.0
    if p <= 0.0:
        return 0.0
    return p / (1.0 - p)


def phi_point_estimate(samples) -> float:
    """Median adjacent-pair inversion rate, mapped through p = phi / (1 + phi)."""
    samples = as_batch(samples)
    if samples.shape[1] < 2:
        return 1.0
    w = pairwise_preferences(samples)
    rates = _adjacent_rates(w, copeland_ranking(samples))
    return _phi_from_rate(float(np.median(rates)))


def estimate_phi_robust(samples, eps: float) -> tuple[float, float]:
    """Interval for phi from the median adjacent-pair inversion rate.

    Adjacent pairs are read off the majority ranking. Each pair's rate moves
    by at most ``eps`` under corruption, so the median rate is widened by
    ``eps`` plus three binomial standard errors before mapping to phi.
    """
    samples = as_batch(samples)
    s, n = samples.shape
    if s < 100:
        raise ValueError(f"need at least 100 samples, got {s}")
    if n < 2:
        return 0.0, 1.0
    w = pairwise_preferences(samples)
    p = float(np.median(_adjacent_rates(w, copeland_ranking(samples))))
    slack = eps + 3.0 * math.sqrt(max(p * (1.0 - p), 0.25 / s) / s)
    return _phi_from_rate(max(p - slack, 0.0)), _phi_from_rate(min(p + slack, 0.5))


def phi_grid(lo: float, hi: float, n: int, eps: float, cap: int = 200) -> np.ndarray:
    """Grid of step ``eps / n^2`` over ``[lo, hi]``; coarsened to ``cap`` points if longer."""
    if hi < lo:
        raise ValueError("empty interval")
    if hi == lo:
        return np.array([lo])
    step = eps / n**2 if eps > 0 else 0.0
    if step > 0 and (hi - lo) / step + 1 <= cap:
        g = np.append(np.arange(lo, hi, step), hi)
    else:
        g = np.linspace(lo, hi, cap)
    return np.unique(np.clip(g, 0.0, 1.0))


def _tournament(a: np.ndarray, p: np.ndarray) -> tuple[int, np.ndarray]:
    """``a[i, j]``: empirical mass of A_ij; ``p[k, i, j]``: H_k(A_ij) for k in {i, j}."""
    k = a.shape[0]
    losses = np.zeros(k, dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            di = abs(p[0, i, j] - a[i, j])
            dj = abs(p[1, i, j] - a[i, j])
            if dj < di:
                losses[i] += 1
            else:
                losses[j] += 1
    return int(np.argmin(losses)), losses


def select_same_central(phis, central: Permutation, samples, distances: np.ndarray | None = None) -> tuple[int, np.ndarray]:
    """Exact tournament among ``M(phi_k, central)``; returns (winner, losses).

    The likelihood of each candidate depends on a sample only through its
    distance to ``central``, so every witness set is a set of distances and
    every model mass is exact.
    """
    phis = np.asarray(phis, dtype=float)
    n = central.n
    if distances is None:
        distances = batch_kendall_tau(as_batch(samples), central)
    top = n * (n - 1) // 2
    hist = np.bincount(distances, minlength=top + 1)[: top + 1] / max(len(distances), 1)
    d = np.arange(top + 1)
    models = [MallowsModel.create(ph, central) for ph in phis]
    ll = np.stack([log_pmf_from_distance(m, d) for m in models])  # (k, top+1)
    pmf = np.stack([_padded(kt_distance_pmf(n, ph), top + 1) for ph in phis])
    wit = ll[:, None, :] > ll[None, :, :]  # (k, k, top+1)
    a = (wit * hist).sum(axis=2)
    mass = np.einsum("ijd,id->ij", wit, pmf)  # H_i(A_ij)
    mass_j = np.einsum("ijd,jd->ij", wit, pmf)  # H_j(A_ij)
    return _tournament(a, np.stack([mass, mass_j]))


def _padded(v: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size)
    out[: min(size, v.size)] = v[:size]
    return out


def mc_size(eps: float, cap: int = MC_CAP) -> int:
    if eps <= 0:
        return cap
    return int(min(cap, math.ceil(50.0 / eps**2)))


def hypothesis_select(
    candidates: list[MallowsModel],
    samples,
    eps: float,
    rng: np.random.Generator,
    m_mc: int | None = None,
    exact_when_possible: bool = True,
) -> int:
    """Index of the tournament winner among ``candidates``."""
    return hypothesis_tournament(candidates, samples, eps, rng, m_mc, exact_when_possible)[0]


def hypothesis_tournament(
    candidates: list[MallowsModel],
    samples,
    eps: float,
    rng: np.random.Generator,
    m_mc: int | None = None,
    exact_when_possible: bool = True,
) -> tuple[int, np.ndarray]:
    if not candidates:
        raise ValueError("need at least one candidate")
    if len(candidates) == 1:
        return 0, np.zeros(1, dtype=np.int64)
    samples = as_batch(samples)
    centrals = {c.central for c in candidates}
    if exact_when_possible and len(centrals) == 1:
        return select_same_central([c.phi for c in candidates], candidates[0].central, samples)

    m_mc = m_mc or mc_size(eps)
    k = len(candidates)
    uniq = list(dict.fromkeys(c.central for c in candidates))
    cidx = [uniq.index(c.central) for c in candidates]

    def loglik(batch: np.ndarray) -> np.ndarray:
        dist = [batch_kendall_tau(batch, c) for c in uniq]
        return np.stack([log_pmf_from_distance(m, dist[cidx[i]]) for i, m in enumerate(candidates)])

    ll_emp = loglik(samples)
    a = np.zeros((k, k))
    p = np.zeros((2, k, k))
    for i in range(k):
        for j in range(i + 1, k):
            a[i, j] = np.mean(ll_emp[i] > ll_emp[j])
    for i, m in enumerate(candidates):
        ll = loglik(sample_many(m, m_mc, rng))
        for j in range(k):
            if j > i:
                p[0, i, j] = np.mean(ll[i] > ll[j])
            elif j < i:
                p[1, j, i] = np.mean(ll[j] > ll[i])
    return _tournament(a, p)
