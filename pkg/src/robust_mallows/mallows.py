"""The Mallows distribution: density, insertion sampler, insertion-distribution
moments, and the analytic TV/KL bounds between models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .perm_core import (
    DimensionError,
    Permutation,
    batch_kendall_tau,
    kendall_tau,
    l2_distance,
    position_vector,
    restrict,
)


def log_normalizer(n: int, phi: float) -> float:
    """log Z_n(phi) = sum_i log(1 + phi + ... + phi^(i-1))."""
    if phi == 1.0:
        return math.lgamma(n + 1)
    if phi == 0.0:
        return 0.0
    lp = math.log(phi)
    total = 0.0
    for i in range(1, n + 1):
        # log((1 - phi^i) / (1 - phi)), stable near phi = 1
        total += math.log(-math.expm1(i * lp)) - math.log1p(-phi)
    return total


@dataclass(frozen=True)
class MallowsModel:
    n: int
    phi: float
    central: Permutation
    log_normalizer: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"phi must lie in [0, 1], got {self.phi}")
        if self.central.n != self.n:
            raise DimensionError(f"central has length {self.central.n}, expected {self.n}")
        object.__setattr__(self, "log_normalizer", log_normalizer(self.n, self.phi))

    @classmethod
    def create(cls, phi: float, central: Permutation | Sequence[int]) -> "MallowsModel":
        if not isinstance(central, Permutation):
            central = Permutation(central)
        return cls(central.n, float(phi), central)

    def to_dict(self) -> dict:
        return {"n": self.n, "phi": self.phi, "central": self.central.to_list()}

    @classmethod
    def from_dict(cls, d: dict) -> "MallowsModel":
        central = Permutation(d["central"])
        if int(d["n"]) != central.n:
            raise DimensionError("n does not match central length")
        return cls(central.n, float(d["phi"]), central)


def log_pmf(m: MallowsModel, p: Permutation) -> float:
    if p.n != m.n:
        raise DimensionError(f"length mismatch: {p.n} vs {m.n}")
    d = kendall_tau(p, m.central)
    return _log_weight(d, m.phi) - m.log_normalizer


def log_pmf_batch(m: MallowsModel, samples: np.ndarray) -> np.ndarray:
    d = batch_kendall_tau(samples, m.central)
    return log_pmf_from_distance(m, d)


def log_pmf_from_distance(m: MallowsModel, d: np.ndarray) -> np.ndarray:
    d = np.asarray(d)
    if m.phi == 0.0:
        return np.where(d == 0, 0.0, -np.inf)
    return d * math.log(m.phi) - m.log_normalizer


def _log_weight(d: int, phi: float) -> float:
    if phi == 0.0:
        return 0.0 if d == 0 else -math.inf
    return d * math.log(phi)


# ---------------------------------------------------------------------------
# sampling


def draw_displacements(a: int, phi: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` draws from the truncated geometric on ``{0..a-1}`` with P(j) ~ phi^j."""
    if a <= 1 or phi == 0.0:
        return np.zeros(size, dtype=np.int64)
    if phi == 1.0:
        return rng.integers(0, a, size=size)
    lp = math.log(phi)
    c = -math.expm1(a * lp)  # 1 - phi^a
    u = rng.random(size)
    j = np.floor(np.log1p(-u * c) / lp)
    return np.clip(j, 0, a - 1).astype(np.int64)


def sample_many(m: MallowsModel, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent draws via the insertion procedure, as an ``(size, n)`` array.

    Element ``central[a]`` is inserted into the current ``a``-element prefix with
    ``j`` elements to its right, ``j ~ D_{a+1, phi}``.
    """
    n = m.n
    pos = np.zeros((size, n), dtype=np.int64)
    for a in range(1, n + 1):
        j = draw_displacements(a, m.phi, size, rng)
        slot = (a - 1) - j
        if a > 1:
            prev = pos[:, :a - 1]
            prev += prev >= slot[:, None]
        pos[:, a - 1] = slot
    out = np.empty((size, n), dtype=np.int64)
    out[np.arange(size)[:, None], pos] = m.central.mapping[None, :]
    return out


def sample(m: MallowsModel, rng: np.random.Generator) -> Permutation:
    return Permutation(sample_many(m, 1, rng)[0])


# ---------------------------------------------------------------------------
# insertion distributions


@dataclass(frozen=True)
class InsertionDistribution:
    """D_{i, phi}: P(j) proportional to phi^j on {0..i-1}; ``i=None`` is the limit."""

    i: int | None
    phi: float
    pmf: np.ndarray | None

    @property
    def is_limit(self) -> bool:
        return self.i is None

    @property
    def mean(self) -> float:
        if self.is_limit:
            return self.phi / (1.0 - self.phi)
        return float(np.dot(np.arange(self.i), self.pmf))

    @property
    def variance(self) -> float:
        if self.is_limit:
            return self.phi / (1.0 - self.phi) ** 2
        k = np.arange(self.i)
        mu = float(np.dot(k, self.pmf))
        return float(np.dot((k - mu) ** 2, self.pmf))


def insertion_distribution(i: int | float | None, phi: float) -> InsertionDistribution:
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must lie in [0, 1], got {phi}")
    if i is None or (isinstance(i, float) and math.isinf(i)):
        if phi >= 1.0:
            raise ValueError("no limiting insertion distribution at phi = 1")
        return InsertionDistribution(None, phi, None)
    i = int(i)
    if i < 1:
        raise ValueError("support size must be positive")
    if phi == 0.0:
        w = np.zeros(i)
        w[0] = 1.0
    else:
        w = np.exp(np.arange(i) * math.log(phi))
    return InsertionDistribution(i, phi, w / w.sum())


def moment_gap(i: int, phi: float, delta: float) -> bool:
    """True iff ``i >= 100 log(1/delta) / (1 - phi)`` (moments of D_i near the limit)."""
    if phi >= 1.0:
        raise ValueError("moment_gap requires phi < 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return i >= 100.0 * math.log(1.0 / delta) / (1.0 - phi)


def kt_distance_pmf(n: int, phi: float) -> np.ndarray:
    """Exact law of d_KT(pi, central) for pi ~ M(phi, central).

    The insertion displacements are independent with laws D_1..D_n, and their
    sum is the distance, so the pmf is their convolution.
    """
    out = np.array([1.0])
    for a in range(2, n + 1):
        out = np.convolve(out, insertion_distribution(a, phi).pmf)
    return out


# ---------------------------------------------------------------------------
# pairwise inversion probabilities

EXACT_GAP_LIMIT = 8


def pair_inversion_probability(m: MallowsModel, a: int, b: int) -> float:
    """P(central[b] precedes central[a]) for ranks ``1 <= a < b <= n``.

    Only the contiguous block of ranks ``a..b`` matters; for gaps up to
    ``EXACT_GAP_LIMIT`` elements the block model is enumerated exactly, beyond
    that a seeded Monte Carlo estimate is returned (see
    :func:`pair_inversion_probability_mc` for its standard error).
    """
    if not 1 <= a < b <= m.n:
        raise ValueError(f"need 1 <= a < b <= n, got a={a}, b={b}")
    if m.phi == 0.0:
        return 0.0
    if m.phi == 1.0:
        return 0.5
    d = b - a + 1
    if d <= EXACT_GAP_LIMIT:
        from .oracle import enumerate_pmf

        dist = enumerate_pmf(MallowsModel.create(m.phi, Permutation.identity(d)))
        ranks = dist.ranks
        return float(dist.probs[ranks[:, d - 1] < ranks[:, 0]].sum())
    p, _ = pair_inversion_probability_mc(m, a, b, np.random.default_rng([a, b, d]))
    return p


def pair_inversion_probability_mc(
    m: MallowsModel, a: int, b: int, rng: np.random.Generator, draws: int = 200_000
) -> tuple[float, float]:
    """Monte Carlo estimate on the restricted block model, with its standard error."""
    d = b - a + 1
    block = MallowsModel.create(m.phi, Permutation.identity(d))
    s = sample_many(block, draws, rng)
    ranks = np.argsort(s, axis=1)
    hits = ranks[:, d - 1] < ranks[:, 0]
    p = float(hits.mean())
    return p, math.sqrt(max(p * (1 - p), 1e-300) / draws)


# ---------------------------------------------------------------------------
# distances between models


def _check_same_phi(m1: MallowsModel, m2: MallowsModel) -> None:
    if m1.n != m2.n:
        raise DimensionError(f"n mismatch: {m1.n} vs {m2.n}")
    if m1.phi != m2.phi:
        raise ValueError(f"phi mismatch: {m1.phi} vs {m2.phi}")


def central_distance(m1: MallowsModel, m2: MallowsModel) -> float:
    return l2_distance(position_vector(m1.central), position_vector(m2.central))


def tv_upper_bound(m1: MallowsModel, m2: MallowsModel) -> float:
    _check_same_phi(m1, m2)
    return min(1.0, 2.0 * (1.0 - m1.phi) * central_distance(m1, m2))


def kl_upper_bound(m1: MallowsModel, m2: MallowsModel) -> float:
    _check_same_phi(m1, m2)
    if m1.phi <= 0.0 or m1.phi >= 1.0:
        raise ValueError("KL bound needs phi strictly inside (0, 1)")
    return 4.0 * (1.0 - m1.phi) * (-math.log(m1.phi)) * central_distance(m1, m2) ** 2


def delta_statistic(pi_star: Permutation, sigma_star: Permutation, p: Permutation) -> int:
    """d_KT(p, pi_star) - d_KT(p, sigma_star); the log-likelihood ratio is this times log phi."""
    return kendall_tau(p, pi_star) - kendall_tau(p, sigma_star)


def phi_perturbation_tv(n: int, eps: float) -> float:
    """Grid step in phi that keeps neighbouring models within ``eps`` in TV."""
    if n < 1 or eps <= 0:
        raise ValueError("need n >= 1 and eps > 0")
    return eps / n**2


def block_restriction(m: MallowsModel, first_rank: int, last_rank: int) -> MallowsModel:
    """The Mallows law of a sample restricted to a contiguous block of central ranks."""
    elems = m.central.mapping[first_rank - 1:last_rank]
    return MallowsModel.create(m.phi, restrict(m.central, elems))
