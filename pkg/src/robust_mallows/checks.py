"""Exhaustive invariant suites over small symmetric groups.

Each suite returns a JSON-ready dict with a top-level ``passed`` flag and one
entry per case. They back the ``oracle-check`` subcommand and the exit
criteria in the test suite.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .mallows import MallowsModel, kl_upper_bound, log_pmf
from .oracle import (
    ExactDistribution,
    _all_ranks,
    enumerate_pmf,
    exact_kl,
    exact_position_moments,
    exact_tv,
    impossibility_construction,
    lex_index,
)
from .perm_core import Permutation, restrict

SUITES = ("pmf", "tv-sandwich", "inversion", "blocks", "moments", "impossibility")


def _kt_matrix(n: int) -> np.ndarray:
    """Kendall-tau distance between every pair of permutations of S_n (lex order)."""
    r = _all_ranks(n)
    d = np.zeros((r.shape[0], r.shape[0]), dtype=np.int64)
    for x in range(n):
        for y in range(x + 1, n):
            o = r[:, x] < r[:, y]
            d += o[:, None] != o[None, :]
    return d


def pmf_suite(ns=range(1, 7), phis=(0.0, 0.3, 0.5, 0.9, 1.0), seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    cases = []
    for n in ns:
        for phi in phis:
            central = Permutation(rng.permutation(n) + 1)
            m = MallowsModel.create(phi, central)
            dist = enumerate_pmf(m)
            total = float(dist.probs.sum())
            # pointwise agreement with the density on a few permutations
            idx = rng.choice(dist.probs.size, size=min(10, dist.probs.size), replace=False)
            dev = max(
                abs(math.exp(log_pmf(m, Permutation(dist.perms[i]))) - dist.probs[i]) for i in idx
            )
            ok = abs(total - 1.0) <= 1e-12 and dev <= 1e-10 and bool(np.all(dist.probs >= 0))
            cases.append({"n": n, "phi": phi, "total": total, "max_pointwise_dev": dev, "passed": ok})
    return {"suite": "pmf", "passed": all(c["passed"] for c in cases), "cases": cases}


def tv_sandwich_suite(ns=range(2, 7), phis=(0.5, 0.8, 0.9), c_max: float = 100.0) -> dict:
    """Exact TV against ``2 (1-phi) ||dv||`` everywhere, and against ``(1-phi) ||dv|| / C``
    for central pairs with ``||dv|| <= 1 / (2 (1-phi))``.

    Relabeling elements preserves both TV and position distance, so one central
    is fixed at the identity.
    """
    cases = []
    worst_c = 0.0
    best_c = math.inf
    violations = 0
    for n in ns:
        kt = _kt_matrix(n)
        ranks = _all_ranks(n).astype(float)
        ident = 0
        dist = np.sqrt(((ranks - ranks[ident]) ** 2).sum(axis=1))
        for phi in phis:
            w = phi ** kt.astype(float)
            w /= w.sum(axis=1, keepdims=True)
            tv = 0.5 * np.abs(w[ident][None, :] - w).sum(axis=1)
            upper = 2.0 * (1.0 - phi) * dist
            bad = int(np.sum(tv > upper + 1e-12))
            violations += bad
            near = (dist > 0) & (dist <= 1.0 / (2.0 * (1.0 - phi)))
            if np.any(near):
                cs = (1.0 - phi) * dist[near] / tv[near]
                c_hi, c_lo = float(cs.max()), float(cs.min())
                worst_c = max(worst_c, c_hi)
                best_c = min(best_c, c_lo)
            else:
                c_hi = c_lo = None
            cases.append(
                {
                    "n": n,
                    "phi": phi,
                    "pairs": int(dist.size - 1),
                    "lower_regime_pairs": int(near.sum()),
                    "upper_violations": bad,
                    "max_constant": c_hi,
                    "min_constant": c_lo,
                    "passed": bad == 0 and (c_hi is None or c_hi <= c_max),
                }
            )
    return {
        "suite": "tv-sandwich",
        "passed": violations == 0 and worst_c <= c_max,
        "upper_violations": violations,
        "reported_constant": worst_c,
        "min_constant": best_c if math.isfinite(best_c) else None,
        "cases": cases,
    }


def inversion_probabilities(n: int, phi: float) -> np.ndarray:
    """``P[a, b]`` = probability that central rank ``b+1`` precedes rank ``a+1`` (a < b)."""
    dist = enumerate_pmf(MallowsModel.create(phi, Permutation.identity(n)))
    r = dist.ranks
    out = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            out[a, b] = dist.probs[r[:, b] < r[:, a]].sum()
    return out


def inversion_suite(ns=range(2, 9), phis=(0.5, 0.8, 0.95)) -> dict:
    cases = []
    violations = 0
    for n in ns:
        for phi in phis:
            p = inversion_probabilities(n, phi)
            bad = 0
            tightest = math.inf
            for a in range(n):
                for b in range(a + 1, n):
                    d = b - a
                    lo = 0.5 - 8.0 * d * (1.0 - phi)
                    hi = 0.5 - 0.01 * min(1.0, d * (1.0 - phi))
                    if not lo <= p[a, b] <= hi:
                        bad += 1
                    tightest = min(tightest, hi - p[a, b])
            violations += bad
            cases.append({"n": n, "phi": phi, "violations": bad, "min_upper_slack": tightest, "passed": bad == 0})
    return {"suite": "inversion", "passed": violations == 0, "violations": violations, "cases": cases}


def _contiguous_block_pairs(n: int):
    for a1, b1, a2, b2 in itertools.combinations(range(1, n + 1), 4):
        yield (a1, b1), (a2, b2)


def blocks_suite(n: int = 6, phis=(0.3, 0.7, 0.95), seed: int = 0, tol: float = 1e-9) -> dict:
    """Joint law of a sample's restrictions to two disjoint central blocks vs
    the product of ``M(phi, central|block)`` laws."""
    rng = np.random.default_rng(seed)
    cases = []
    worst = 0.0
    for phi in phis:
        central = Permutation(rng.permutation(n) + 1)
        dist = enumerate_pmf(MallowsModel.create(phi, central))
        for (a1, b1), (a2, b2) in _contiguous_block_pairs(n):
            e1 = central.mapping[a1 - 1:b1]
            e2 = central.mapping[a2 - 1:b2]
            k1, k2 = e1.size, e2.size
            joint = _joint_restricted(dist, e1, e2)
            m1 = enumerate_pmf(MallowsModel.create(phi, restrict(central, e1)))
            m2 = enumerate_pmf(MallowsModel.create(phi, restrict(central, e2)))
            err = float(np.abs(joint - np.outer(m1.probs, m2.probs)).max())
            worst = max(worst, err)
            cases.append({"phi": phi, "blocks": [[a1, b1], [a2, b2]], "sizes": [k1, k2], "max_error": err, "passed": err <= tol})
    return {"suite": "blocks", "passed": worst <= tol, "max_error": worst, "cases": cases}


def _joint_restricted(dist: ExactDistribution, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    def pattern_index(elems):
        sub = dist.ranks[:, np.sort(elems) - 1]
        order = np.argsort(sub, axis=1, kind="stable") + 1
        return lex_index(order)

    i1 = pattern_index(e1)
    i2 = pattern_index(e2)
    k1, k2 = math.factorial(e1.size), math.factorial(e2.size)
    joint = np.bincount(i1 * k2 + i2, weights=dist.probs, minlength=k1 * k2)
    return joint.reshape(k1, k2)


def moments_suite(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    cases = []
    # point mass
    c = Permutation(rng.permutation(5) + 1)
    mean, cov = exact_position_moments(MallowsModel.create(0.0, c))
    ok = np.allclose(mean, c.inverse) and np.allclose(cov, 0.0)
    cases.append({"case": "phi=0 point mass", "passed": bool(ok)})
    # uniform on S_3
    mean, cov = exact_position_moments(MallowsModel.create(1.0, Permutation.identity(3)))
    ok = np.allclose(mean, 2.0) and np.allclose(np.diag(cov), 2.0 / 3.0)
    cases.append({"case": "phi=1 n=3 uniform", "passed": bool(ok)})
    # covariance scale
    for n, phi in [(6, 0.5), (8, 0.9)]:
        _, cov = exact_position_moments(MallowsModel.create(phi, Permutation(rng.permutation(n) + 1)))
        top = float(np.linalg.eigvalsh(cov)[-1])
        bound = 1e4 / (1.0 - phi) ** 2
        cases.append({"case": f"top eigenvalue n={n} phi={phi}", "top": top, "bound": bound, "passed": top <= bound})
    # KL bound and Pinsker
    for phi in (0.5, 0.7, 0.9):
        a = MallowsModel.create(phi, Permutation.identity(5))
        b = MallowsModel.create(phi, Permutation(rng.permutation(5) + 1))
        da, db = enumerate_pmf(a), enumerate_pmf(b)
        kl = exact_kl(da, db)
        tv = exact_tv(da, db)
        ok = kl <= kl_upper_bound(a, b) + 1e-12 and kl >= 2 * tv**2 - 1e-12
        cases.append({"case": f"kl n=5 phi={phi}", "kl": kl, "bound": kl_upper_bound(a, b), "tv": tv, "passed": bool(ok)})
    return {"suite": "moments", "passed": all(c["passed"] for c in cases), "cases": cases}


def impossibility_suite(ns=(4, 6, 8), eps: float = 0.2, k: int = 2, c: float = 100.0) -> dict:
    cases = []
    for n in ns:
        rep = impossibility_construction(n, eps, k)
        restricted_ok = rep.max_restricted_tv < eps and rep.max_restricted_tv <= rep.restricted_bound
        global_ok = rep.global_tv >= eps * math.sqrt(n) / (2 * k * c)
        cases.append(
            {
                "n": n,
                "phi": rep.phi,
                "global_tv": rep.global_tv,
                "max_restricted_tv": rep.max_restricted_tv,
                "restricted_bound": rep.restricted_bound,
                "global_lower": eps * math.sqrt(n) / (2 * k * c),
                "empirical_constant": rep.empirical_constant,
                "passed": bool(restricted_ok and global_ok),
            }
        )
    return {"suite": "impossibility", "passed": all(x["passed"] for x in cases), "cases": cases}


def run_suite(name: str) -> dict:
    table = {
        "pmf": pmf_suite,
        "tv-sandwich": tv_sandwich_suite,
        "inversion": inversion_suite,
        "blocks": blocks_suite,
        "moments": moments_suite,
        "impossibility": impossibility_suite,
    }
    if name not in table:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    return table[name]()
