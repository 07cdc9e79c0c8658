"""Exhaustive ground truth over S_n for n <= 8."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mallows import MallowsModel, log_pmf_from_distance
from .perm_core import DimensionError, Permutation, as_batch, batch_ranks

MAX_N = 8


class OracleSizeError(ValueError):
    """Raised when an exhaustive computation is requested above the size cap."""


def _check_size(n: int) -> None:
    if n > MAX_N:
        raise OracleSizeError(f"exhaustive oracle is capped at n <= {MAX_N}, got {n}")


@lru_cache(maxsize=None)
def all_permutations(n: int) -> np.ndarray:
    """All n! permutations of 1..n in lexicographic order, one per row."""
    _check_size(n)
    arr = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int64)
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=None)
def _all_ranks(n: int) -> np.ndarray:
    r = batch_ranks(all_permutations(n))
    r.flags.writeable = False
    return r


def lex_index(samples: np.ndarray) -> np.ndarray:
    """Row index of each permutation within :func:`all_permutations`."""
    samples = np.asarray(samples)
    s, n = samples.shape
    idx = np.zeros(s, dtype=np.int64)
    for k in range(n):
        smaller_after = (samples[:, k + 1:] < samples[:, k:k + 1]).sum(axis=1)
        idx += smaller_after * math.factorial(n - 1 - k)
    return idx


def _kt_to_ref(n: int, ref: Permutation) -> np.ndarray:
    # distances from every permutation of S_n to ref, via pair counts on ranks
    ranks = _all_ranks(n)
    seq = ranks[:, ref.mapping - 1]
    d = np.zeros(seq.shape[0], dtype=np.int64)
    for k in range(1, n):
        d += (seq[:, :k] > seq[:, k:k + 1]).sum(axis=1)
    return d


@dataclass(frozen=True)
class ExactDistribution:
    n: int
    probs: np.ndarray

    @property
    def perms(self) -> np.ndarray:
        return all_permutations(self.n)

    @property
    def ranks(self) -> np.ndarray:
        return _all_ranks(self.n)

    @property
    def table(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(x) for x in row): float(p) for row, p in zip(self.perms, self.probs)}

    def prob(self, p: Permutation) -> float:
        return float(self.probs[lex_index(p.mapping[None, :])[0]])


def enumerate_pmf(m: MallowsModel) -> ExactDistribution:
    _check_size(m.n)
    d = _kt_to_ref(m.n, m.central)
    probs = np.exp(log_pmf_from_distance(m, d))
    # renormalise away the last few ulps of rounding
    probs = probs / probs.sum()
    return ExactDistribution(m.n, probs)


def empirical_distribution(samples: np.ndarray) -> ExactDistribution:
    samples = as_batch(samples)
    n = samples.shape[1]
    _check_size(n)
    counts = np.bincount(lex_index(samples), minlength=math.factorial(n))
    return ExactDistribution(n, counts / counts.sum())


def _check_pair(d1: ExactDistribution, d2: ExactDistribution) -> None:
    if d1.n != d2.n:
        raise DimensionError(f"n mismatch: {d1.n} vs {d2.n}")


def exact_tv(d1: ExactDistribution, d2: ExactDistribution) -> float:
    _check_pair(d1, d2)
    return 0.5 * float(np.abs(d1.probs - d2.probs).sum())


def exact_kl(d1: ExactDistribution, d2: ExactDistribution) -> float:
    _check_pair(d1, d2)
    p, q = d1.probs, d2.probs
    supp = p > 0
    if np.any(q[supp] <= 0):
        raise ValueError("KL undefined: second distribution vanishes on the support of the first")
    return float(np.sum(p[supp] * (np.log(p[supp]) - np.log(q[supp]))))


def exact_position_moments(m: MallowsModel) -> tuple[np.ndarray, np.ndarray]:
    dist = enumerate_pmf(m)
    r = dist.ranks.astype(float)
    mean = dist.probs @ r
    c = r - mean
    cov = (c * dist.probs[:, None]).T @ c
    return mean, cov


def restricted_law(dist: ExactDistribution, elements) -> np.ndarray:
    """Law of the induced order on ``elements``, indexed like ``all_permutations(k)``."""
    elems = np.array(sorted(int(e) for e in elements), dtype=np.int64)
    k = elems.size
    sub = dist.ranks[:, elems - 1]
    # sub-ranks -> one-line pattern on 1..k
    order = np.argsort(sub, axis=1, kind="stable") + 1
    idx = lex_index(order)
    return np.bincount(idx, weights=dist.probs, minlength=math.factorial(k))


def exact_mle(samples, phi: float | None = None) -> Permutation:
    """Kemeny ranking: argmin of total KT distance, ties to the lexicographically first.

    ``phi`` is accepted for interface symmetry; for ``phi < 1`` the maximiser
    of the likelihood does not depend on it.
    """
    samples = as_batch(samples)
    n = samples.shape[1]
    _check_size(n)
    r = batch_ranks(samples)
    before = (r[:, :, None] < r[:, None, :]).sum(axis=0)  # before[x, y]: x precedes y
    cand = _all_ranks(n)
    cost = np.zeros(cand.shape[0], dtype=np.int64)
    for x in range(n):
        for y in range(n):
            if x != y:
                # candidate puts x before y: every sample with y before x disagrees
                cost += (cand[:, x] < cand[:, y]) * before[y, x]
    return Permutation(all_permutations(n)[int(np.argmin(cost))])


@dataclass(frozen=True)
class ImpossibilityReport:
    n: int
    eps: float
    k: int
    phi: float
    global_tv: float
    max_restricted_tv: float
    restricted_bound: float
    position_distance: float
    empirical_constant: float

    @property
    def restricted_ok(self) -> bool:
        return self.max_restricted_tv <= self.restricted_bound < self.eps

    def global_ok(self, c: float = 100.0) -> bool:
        return self.global_tv >= self.eps * math.sqrt(self.n) / (2 * self.k * c)


def impossibility_construction(n: int, eps: float, k: int, sigma: Permutation | None = None) -> ImpossibilityReport:
    """Identity vs adjacent-pair swaps at phi = 1 - eps/(2k).

    Reports the exact global TV and the largest TV between the laws induced on
    any ``k`` elements.
    """
    if n % 2:
        raise ValueError("construction needs even n")
    _check_size(n)
    phi = 1.0 - eps / (2 * k)
    pi_star = Permutation.identity(n)
    if sigma is None:
        swapped = []
        for i in range(1, n + 1, 2):
            swapped += [i + 1, i]
        sigma = Permutation(swapped)
    d1 = enumerate_pmf(MallowsModel.create(phi, pi_star))
    d2 = enumerate_pmf(MallowsModel.create(phi, sigma))
    gtv = exact_tv(d1, d2)
    worst = 0.0
    for subset in itertools.combinations(range(1, n + 1), k):
        r1 = restricted_law(d1, subset)
        r2 = restricted_law(d2, subset)
        worst = max(worst, 0.5 * float(np.abs(r1 - r2).sum()))
    dist = float(np.linalg.norm(pi_star.inverse - sigma.inverse))
    emp_c = (1 - phi) * dist / gtv if gtv > 0 else math.inf
    return ImpossibilityReport(
        n=n,
        eps=eps,
        k=k,
        phi=phi,
        global_tv=gtv,
        max_restricted_tv=worst,
        restricted_bound=1 - phi**k,
        position_distance=dist,
        empirical_constant=emp_c,
    )
