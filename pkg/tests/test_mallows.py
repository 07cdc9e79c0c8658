import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_perm
from robust_mallows.mallows import (
    MallowsModel,
    block_restriction,
    delta_statistic,
    draw_displacements,
    insertion_distribution,
    kl_upper_bound,
    kt_distance_pmf,
    log_normalizer,
    log_pmf,
    log_pmf_batch,
    moment_gap,
    pair_inversion_probability,
    pair_inversion_probability_mc,
    phi_perturbation_tv,
    sample,
    sample_many,
    tv_upper_bound,
)
from robust_mallows.oracle import all_permutations, empirical_distribution, enumerate_pmf, lex_index
from robust_mallows.perm_core import DimensionError, Permutation, batch_kendall_tau, kendall_tau


def closed_form_inversion(phi: float, d: int) -> float:
    """Probability that the last of d consecutive central elements precedes the first."""
    num = sum(k * phi ** (2 * d - 2 - k) for k in range(1, d))
    den = sum(phi**i for i in range(d - 1)) * sum(phi**i for i in range(d))
    return num / den


@pytest.mark.parametrize("n", [1, 2, 5, 7])
@pytest.mark.parametrize("phi", [0.0, 0.2, 0.5, 0.99, 0.999999, 1.0])
def test_log_normalizer_matches_direct_sum(n, phi):
    d = batch_kendall_tau(all_permutations(n), Permutation.identity(n))
    direct = math.log(sum(phi**k if phi > 0 else float(k == 0) for k in d))
    assert log_normalizer(n, phi) == pytest.approx(direct, abs=1e-9)


def test_log_normalizer_extremes():
    assert log_normalizer(10, 1.0) == pytest.approx(math.lgamma(11))
    assert log_normalizer(10, 0.0) == 0.0
    assert math.isfinite(log_normalizer(500, 1 - 1e-12))


def test_log_pmf_known_values():
    m = MallowsModel.create(0.5, Permutation.identity(3))
    assert log_pmf(m, Permutation.identity(3)) == pytest.approx(-math.log(2.625))
    assert log_pmf(m, Permutation([3, 2, 1])) == pytest.approx(3 * math.log(0.5) - math.log(2.625))


def test_log_pmf_point_mass():
    m = MallowsModel.create(0.0, Permutation([2, 1, 3]))
    assert log_pmf(m, Permutation([2, 1, 3])) == 0.0
    assert log_pmf(m, Permutation.identity(3)) == -math.inf


def test_log_pmf_batch_matches_scalar(rng):
    m = MallowsModel.create(0.7, random_perm(rng, 8))
    rows = sample_many(m, 50, rng)
    batch = log_pmf_batch(m, rows)
    for r, v in zip(rows, batch):
        assert v == pytest.approx(log_pmf(m, Permutation(r)))


def test_model_validation():
    with pytest.raises(ValueError):
        MallowsModel.create(1.5, Permutation.identity(3))
    with pytest.raises(DimensionError):
        MallowsModel(4, 0.5, Permutation.identity(3))
    m = MallowsModel.create(0.3, Permutation([2, 3, 1]))
    assert MallowsModel.from_dict(m.to_dict()) == m
    with pytest.raises(DimensionError):
        log_pmf(m, Permutation.identity(4))


@pytest.mark.parametrize("a,phi", [(1, 0.5), (5, 0.0), (5, 1.0), (7, 0.6), (40, 0.95)])
def test_displacement_law(a, phi, rng):
    j = draw_displacements(a, phi, 200_000, rng)
    assert j.min() >= 0 and j.max() <= a - 1
    pmf = insertion_distribution(a, phi).pmf
    emp = np.bincount(j, minlength=a) / j.size
    assert 0.5 * np.abs(emp - pmf).sum() < 0.01


@pytest.mark.parametrize("n,phi", [(3, 0.5), (4, 0.8), (5, 0.3)])
def test_sampler_goodness_of_fit(n, phi):
    """Pearson chi-square against the exact law, at a 1e-4 significance level."""
    rng = np.random.default_rng([n, int(phi * 100)])
    m = MallowsModel.create(phi, random_perm(rng, n))
    exact = enumerate_pmf(m).probs
    draws = 200_000
    counts = np.bincount(lex_index(sample_many(m, draws, rng)), minlength=exact.size)
    expected = draws * exact
    stat = float(((counts - expected) ** 2 / expected).sum())
    df = exact.size - 1
    # Wilson-Hilferty upper quantile for z = 3.72 (p ~ 1e-4)
    crit = df * (1 - 2 / (9 * df) + 3.72 * math.sqrt(2 / (9 * df))) ** 3
    assert stat < crit


def test_sampler_point_mass_and_uniform(rng):
    c = random_perm(rng, 6)
    rows = sample_many(MallowsModel.create(0.0, c), 100, rng)
    assert np.all(rows == c.mapping)
    rows = sample_many(MallowsModel.create(1.0, Permutation.identity(3)), 60_000, rng)
    emp = empirical_distribution(rows).probs
    assert np.abs(emp - 1 / 6).max() < 0.01
    assert isinstance(sample(MallowsModel.create(0.5, c), rng), Permutation)


def test_kt_distance_pmf_matches_enumeration():
    for n, phi in [(4, 0.3), (6, 0.8), (5, 1.0)]:
        dist = enumerate_pmf(MallowsModel.create(phi, Permutation.identity(n)))
        d = batch_kendall_tau(dist.perms, Permutation.identity(n))
        by_distance = np.bincount(d, weights=dist.probs)
        assert np.allclose(kt_distance_pmf(n, phi), by_distance, atol=1e-12)


def test_kt_distance_pmf_small_value():
    assert np.allclose(kt_distance_pmf(3, 0.5) * 2.625, [1, 1, 0.5, 0.125])


def test_insertion_distribution_moments_converge():
    phi = 0.9
    lim = insertion_distribution(None, phi)
    assert lim.mean == pytest.approx(phi / (1 - phi))
    assert lim.variance == pytest.approx(phi / (1 - phi) ** 2)
    big = insertion_distribution(2000, phi)
    assert big.mean == pytest.approx(lim.mean, rel=1e-9)
    assert big.variance == pytest.approx(lim.variance, rel=1e-9)
    with pytest.raises(ValueError):
        insertion_distribution(None, 1.0)
    with pytest.raises(ValueError):
        insertion_distribution(0, 0.5)


def test_moment_gap():
    assert moment_gap(int(100 * math.log(10) / 0.1) + 1, 0.9, 0.1)
    assert not moment_gap(10, 0.9, 0.1)
    with pytest.raises(ValueError):
        moment_gap(10, 1.0, 0.1)
    # past the gap, moments are within delta of the limit
    i = int(math.ceil(100 * math.log(1 / 0.01) / 0.05))
    d = insertion_distribution(i, 0.95)
    lim = insertion_distribution(None, 0.95)
    assert abs(d.mean - lim.mean) < 0.01 and abs(d.variance - lim.variance) < 0.01 * lim.variance


@pytest.mark.parametrize("phi", [0.3, 0.7, 0.95])
@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_inversion_probability_closed_form(phi, d):
    m = MallowsModel.create(phi, Permutation.identity(10))
    assert pair_inversion_probability(m, 1, d) == pytest.approx(closed_form_inversion(phi, d), abs=1e-12)


def test_adjacent_inversion_probability(rng):
    m = MallowsModel.create(0.5, random_perm(rng, 6))
    assert pair_inversion_probability(m, 3, 4) == pytest.approx(1 / 3)


def test_inversion_probability_mc_route(rng):
    m = MallowsModel.create(0.8, Permutation.identity(12))
    p, se = pair_inversion_probability_mc(m, 2, 7, rng)
    assert abs(p - closed_form_inversion(0.8, 6)) < 4 * se
    far = pair_inversion_probability(MallowsModel.create(0.8, Permutation.identity(15)), 1, 12)
    assert abs(far - closed_form_inversion(0.8, 12)) < 0.005


def test_inversion_probability_bad_ranks():
    m = MallowsModel.create(0.5, Permutation.identity(4))
    with pytest.raises(ValueError):
        pair_inversion_probability(m, 3, 3)


def test_bounds_argument_checks():
    a = MallowsModel.create(0.5, Permutation.identity(4))
    b = MallowsModel.create(0.6, Permutation.identity(4))
    with pytest.raises(ValueError):
        tv_upper_bound(a, b)
    with pytest.raises(ValueError):
        kl_upper_bound(MallowsModel.create(1.0, Permutation.identity(3)), MallowsModel.create(1.0, Permutation.identity(3)))
    assert tv_upper_bound(a, a) == 0.0


def test_delta_statistic_gives_likelihood_ratio(rng):
    phi = 0.7
    pi, sigma = random_perm(rng, 6), random_perm(rng, 6)
    p = random_perm(rng, 6)
    lr = log_pmf(MallowsModel.create(phi, pi), p) - log_pmf(MallowsModel.create(phi, sigma), p)
    assert lr == pytest.approx(delta_statistic(pi, sigma, p) * math.log(phi))


@pytest.mark.parametrize("n", [3, 5, 6])
def test_phi_perturbation_step_keeps_tv_small(n):
    eps = 0.1
    step = phi_perturbation_tv(n, eps)
    for phi in (0.3, 0.7, 0.9):
        a = enumerate_pmf(MallowsModel.create(phi, Permutation.identity(n))).probs
        b = enumerate_pmf(MallowsModel.create(phi + step, Permutation.identity(n))).probs
        assert 0.5 * np.abs(a - b).sum() <= eps


def test_block_restriction_law(rng):
    m = MallowsModel.create(0.6, random_perm(rng, 6))
    sub = block_restriction(m, 2, 4)
    assert sub.n == 3 and sub.phi == m.phi
    dist = enumerate_pmf(m)
    elems = m.central.mapping[1:4]
    from robust_mallows.oracle import restricted_law

    assert np.allclose(restricted_law(dist, elems), enumerate_pmf(sub).probs, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.floats(0.05, 0.95))
def test_scaling_parameter_tv_grows_with_gap(n, phi):
    # TV between dispersions is monotone in the gap for a shared central ranking
    a = enumerate_pmf(MallowsModel.create(phi, Permutation.identity(n))).probs
    tvs = []
    for gap in (0.01, 0.02, 0.04):
        b = enumerate_pmf(MallowsModel.create(min(phi + gap, 1.0), Permutation.identity(n))).probs
        tvs.append(0.5 * np.abs(a - b).sum())
    assert tvs[0] <= tvs[1] + 1e-12 <= tvs[2] + 2e-12
