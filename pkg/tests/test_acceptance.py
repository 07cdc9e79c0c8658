"""Exit criteria, each at its stated tolerance. Every test records one
PASS/FAIL line, printed in the terminal summary."""

import json
import math
import time
from importlib import resources

import numpy as np
import pytest

from conftest import random_perm, record_criterion
from robust_mallows.checks import blocks_suite, impossibility_suite, inversion_suite, tv_sandwich_suite
from robust_mallows.config import ExperimentSpec
from robust_mallows.estimator import refine_step, rough_bound
from robust_mallows.mallows import MallowsModel, sample_many
from robust_mallows.oracle import empirical_distribution, enumerate_pmf, exact_tv
from robust_mallows.padding import pad
from robust_mallows.perm_core import (
    Permutation,
    adjustment_vectors,
    batch_adjustment,
    kendall_tau,
    l2_distance,
    position_vector,
    weighted_inversion_sum,
)
from robust_mallows.robust_mean import robust_mean_bounded_cov
from robust_mallows.runner import corrupt_samples, honest_samples, resolve_strategy, run_spec, truth_model

pytestmark = pytest.mark.acceptance

HEADLINE = dict(n=30, phi=0.9, s=100_000, eps=0.05)
STRATEGIES = ("reversal", "mean_attack", "coalition")


def test_c01_exact_identities():
    rng = np.random.default_rng(1)
    t = time.time()
    bad_sum = bad_split = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 201))
        p, s = random_perm(rng, n), random_perm(rng, n)
        dv = position_vector(p) - position_vector(s)
        bad_sum += 2 * weighted_inversion_sum(p, s) != int(dv @ dv)
        adj = adjustment_vectors(p, s)
        bad_split += not np.array_equal(position_vector(p), position_vector(s) + adj.back - adj.front)
    dt = time.time() - t
    ok = bad_sum == 0 and bad_split == 0 and dt < 10
    assert record_criterion(1, ok, f"weighted-sum violations {bad_sum}, split violations {bad_split}, {dt:.1f}s")


def test_c02_sampler_tv():
    rng = np.random.default_rng(2024)
    t = time.time()
    cells = []
    for n in (3, 4, 5, 6):
        for phi in (0.3, 0.7, 0.95):
            m = MallowsModel.create(phi, random_perm(rng, n))
            tv = exact_tv(empirical_distribution(sample_many(m, 1_000_000, rng)), enumerate_pmf(m))
            cells.append((n, phi, tv))
    dt = time.time() - t
    failing = [(n, phi, round(tv, 4)) for n, phi, tv in cells if tv > 0.01]
    worst = max(tv for *_, tv in cells)
    ok = not failing and dt < 120
    assert record_criterion(2, ok, f"max TV {worst:.4f}; cells above 0.01: {failing}; {dt:.0f}s")


def test_c03_tv_sandwich():
    t = time.time()
    r = tv_sandwich_suite(range(1, 7), (0.5, 0.8, 0.9))
    dt = time.time() - t
    ok = r["upper_violations"] == 0 and r["reported_constant"] <= 100 and dt < 300
    assert record_criterion(3, ok, f"upper violations {r['upper_violations']}, C = {r['reported_constant']:.3f}, {dt:.1f}s")


def test_c04_inversion_bounds():
    t = time.time()
    r = inversion_suite(range(2, 9), (0.5, 0.8, 0.95))
    dt = time.time() - t
    ok = r["violations"] == 0 and dt < 60
    assert record_criterion(4, ok, f"violations {r['violations']} over n <= 8, {dt:.1f}s")


def test_c05_block_independence():
    r = blocks_suite(6)
    assert record_criterion(5, r["max_error"] <= 1e-9, f"max factorization error {r['max_error']:.2e}")


def test_c06_tail_bound():
    n, phi = 100, 0.95
    rng = np.random.default_rng(6)
    t = time.time()
    central = random_perm(rng, n)
    x = sample_many(MallowsModel.create(phi, central), 100_000, rng)
    front, back = batch_adjustment(x, central)
    u = rng.standard_normal((20, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    worst = -math.inf
    for vec in (front, back):
        proj = vec @ u.T
        dev = np.abs(proj - proj.mean(axis=0))
        for tt in (5, 10, 20):
            exceed = (dev >= tt / (1 - phi)).mean(axis=0)
            worst = max(worst, float((exceed - 4 * math.exp(-0.2 * tt)).max()))
    dt = time.time() - t
    ok = worst <= 0 and dt < 300
    assert record_criterion(6, ok, f"max(exceedance - 4e^(-0.2t)) = {worst:.3f} over 120 cells, {dt:.1f}s")


def test_c07_robust_mean_contract():
    rng = np.random.default_rng(7)
    t = time.time()
    s, d, eps, sigma = 100_000, 50, 0.05, 1.0
    x = sigma * rng.standard_normal((s, d))
    k = int(eps * s)
    x[:k] = 0.0
    x[:k, 0] = 100 * sigma
    rep = robust_mean_bounded_cov(x, eps, sigma)
    robust = float(np.linalg.norm(rep.estimate))
    naive = float(np.linalg.norm(x.mean(axis=0)))
    clean = sigma * rng.standard_normal((s, d))
    even = [robust_mean_bounded_cov(clean, e, sigma) for e in (0.0, eps)]
    break_even = all(r.iterations == 0 and np.allclose(r.estimate, clean.mean(axis=0), rtol=0, atol=1e-12) for r in even)
    dt = time.time() - t
    ok = robust <= 10 * sigma * math.sqrt(eps) and naive >= 3 * sigma and break_even and dt < 120
    assert record_criterion(
        7, ok, f"robust {robust:.3f} (<= {10 * math.sqrt(eps):.3f}), naive {naive:.2f}, break-even {break_even}, {dt:.1f}s"
    )


@pytest.fixture(scope="module")
def headline_runs():
    t = time.time()
    rows = {}
    for kind in STRATEGIES:
        for seed in range(10):
            spec = ExperimentSpec(**HEADLINE, seed=seed, strategy={"kind": kind, "params": {}})
            rows[kind, seed] = run_spec(spec).row()
    return rows, time.time() - t


def test_c08_end_to_end(headline_runs):
    rows, dt = headline_runs
    c_acc = json.loads(resources.files("robust_mallows").joinpath("calibration.json").read_text())["c_acc"]
    medians = {k: float(np.median([rows[k, s]["normalized_error"] for s in range(10)])) for k in STRATEGIES}
    half = all(rows["mean_attack", s]["l2_error"] <= 0.5 * rows["mean_attack", s]["naive_l2_error"] for s in range(10))
    ok = all(m <= c_acc for m in medians.values()) and half and dt < 1800
    detail = ", ".join(f"{k} {v:.3f}" for k, v in medians.items())
    assert record_criterion(8, ok, f"median normalized error {detail} (C_acc {c_acc}); "
                                   f"robust <= naive/2 under mean_attack on every seed: {half}; {dt:.0f}s")


def test_c09_refinement_contraction():
    # the target start distance 0.08 / (1 - phi) = 0.8 is below the smallest
    # nonzero position distance sqrt(2); start one adjacent transposition away
    n, phi, eps = HEADLINE["n"], HEADLINE["phi"], HEADLINE["eps"]
    t = time.time()
    medians = {}
    for kind in STRATEGIES:
        ratios = []
        for seed in range(20):
            truth = truth_model(n, phi, "random", seed)
            x = honest_samples(truth, HEADLINE["s"], seed)
            data = corrupt_samples(x, eps, resolve_strategy({"kind": kind, "params": {}}, n, seed), seed)
            inst = pad(data.samples, phi, eps, np.random.default_rng([seed, 9]))
            i = int(np.random.default_rng([seed, 90]).integers(n - 1))
            m = truth.central.mapping.copy()
            m[i], m[i + 1] = m[i + 1], m[i]
            start = Permutation(m)
            before = l2_distance(position_vector(start), position_vector(truth.central))
            step = refine_step(inst, eps, start, rough_bound(eps, phi))
            after = l2_distance(position_vector(step.central), position_vector(truth.central))
            ratios.append(1 - after / before)
        medians[kind] = float(np.median(ratios))
    dt = time.time() - t
    ok = all(v >= 0.25 for v in medians.values())
    detail = ", ".join(f"{k} {v:.0%}" for k, v in medians.items())
    assert record_criterion(9, ok, f"median one-round L2 reduction from sqrt(2): {detail}; {dt:.0f}s")


def test_c10_phi_recovery(headline_runs):
    rows, _ = headline_runs
    counts = {k: sum(rows[k, s]["phi_error"] <= 0.02 for s in range(10)) for k in STRATEGIES}
    ok = all(c >= 8 for c in counts.values())
    worst = max(r["phi_error"] for r in rows.values())
    assert record_criterion(10, ok, f"seeds with |phi_hat - phi| <= 0.02: {counts}; worst {worst:.4f}")


def test_c11_impossibility():
    t = time.time()
    r = impossibility_suite((4, 6, 8), 0.2, 2)
    dt = time.time() - t
    detail = "; ".join(
        f"n={c['n']} restricted {c['max_restricted_tv']:.4f} global {c['global_tv']:.4f} >= {c['global_lower']:.4f}"
        for c in r["cases"]
    )
    assert record_criterion(11, r["passed"] and dt < 300, f"{detail}; {dt:.1f}s")


def test_c12_determinism(tmp_path):
    from test_cli import GOLDEN, pipeline

    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    first = pipeline(tmp_path / "a")
    second = pipeline(tmp_path / "b")
    rel = [p.relative_to(tmp_path / "a") for p in first]
    same = rel == [p.relative_to(tmp_path / "b") for p in second] and all(
        a.read_bytes() == b.read_bytes() for a, b in zip(first, second)
    )
    golden = all((GOLDEN / r).exists() and (GOLDEN / r).read_bytes() == (tmp_path / "a" / r).read_bytes() for r in rel)
    ok = same and golden
    assert record_criterion(12, ok, f"{len(rel)} files; rerun identical {same}; golden identical {golden}")
