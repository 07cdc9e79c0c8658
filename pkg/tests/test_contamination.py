import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_perm
from robust_mallows.contamination import (
    AdversaryStrategy,
    coalition_scenario,
    corrupt,
    maximizing_permutation,
    rotated,
)
from robust_mallows.mallows import MallowsModel, sample_many
from robust_mallows.perm_core import DimensionError, Permutation, batch_ranks, position_vector


def is_valid(rows):
    n = rows.shape[1]
    return np.all(np.sort(rows, axis=1) == np.arange(1, n + 1))


@pytest.fixture
def honest(rng):
    m = MallowsModel.create(0.7, random_perm(rng, 8))
    return m, sample_many(m, 100, rng)


def test_zero_eps_is_a_reordering(honest, rng):
    _, x = honest
    d = corrupt(x, 0.0, AdversaryStrategy("reversal"), rng)
    assert d.n_corrupted == 0
    assert sorted(map(tuple, d.samples)) == sorted(map(tuple, x))


@pytest.mark.parametrize("kind", ["uniform_junk", "reversal", "mean_attack"])
def test_exact_count_and_validity(kind, honest, rng):
    _, x = honest
    d = corrupt(x, 0.1, AdversaryStrategy(kind), rng)
    assert d.n_corrupted == 10
    assert is_valid(d.samples)


def test_honest_rows_pass_through(honest, rng):
    _, x = honest
    d = corrupt(x, 0.1, AdversaryStrategy("uniform_junk"), rng)
    kept = sorted(map(tuple, d.samples[~d.mask]))
    pool = list(map(tuple, x))
    for row in kept:
        pool.remove(row)
    assert len(pool) == 10


def test_reversal_uses_given_central(honest, rng):
    m, x = honest
    d = corrupt(x, 0.1, AdversaryStrategy("reversal", {"central": m.central.to_list()}), rng)
    assert np.all(d.samples[d.mask] == m.central.reversed().mapping)


def test_targeted_shift(honest, rng):
    m, x = honest
    c = m.central.to_list()
    d = corrupt(x, 0.1, AdversaryStrategy("targeted_shift", {"element": c[-1], "central": c}), rng)
    assert np.all(d.samples[d.mask][:, 0] == c[-1])
    d = corrupt(x, 0.1, AdversaryStrategy("targeted_shift", {"element": c[0], "central": c, "direction": "back"}), rng)
    assert np.all(d.samples[d.mask][:, -1] == c[0])
    with pytest.raises(ValueError):
        corrupt(x, 0.1, AdversaryStrategy("targeted_shift", {"element": 1, "direction": "up"}), rng)


def test_mean_attack_beats_junk_on_same_seed():
    m = MallowsModel.create(0.8, Permutation.identity(20))
    x = sample_many(m, 1000, np.random.default_rng(1))
    u = position_vector(rotated(m.central, 10)) - position_vector(m.central)
    u = u / np.linalg.norm(u)
    base = batch_ranks(x).mean(axis=0) @ u
    shifts = {}
    for kind in ("mean_attack", "uniform_junk"):
        d = corrupt(x, 0.1, AdversaryStrategy(kind, {"direction": u.tolist()}), np.random.default_rng(2))
        shifts[kind] = batch_ranks(d.samples).mean(axis=0) @ u - base
    assert shifts["mean_attack"] >= shifts["uniform_junk"]
    assert shifts["mean_attack"] > 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=9))
def test_maximizing_permutation_is_optimal(u):
    import itertools

    best = maximizing_permutation(u)
    top = position_vector(best) @ np.array(u)
    if len(u) <= 6:
        for p in itertools.permutations(range(1, len(u) + 1)):
            assert position_vector(Permutation(p)) @ np.array(u) <= top + 1e-9


def test_determinism(honest):
    _, x = honest
    a = corrupt(x, 0.1, AdversaryStrategy("uniform_junk"), np.random.default_rng(5))
    b = corrupt(x, 0.1, AdversaryStrategy("uniform_junk"), np.random.default_rng(5))
    assert np.array_equal(a.samples, b.samples) and np.array_equal(a.mask, b.mask)


def test_errors(honest, rng):
    _, x = honest
    with pytest.raises(ValueError):
        corrupt(x, 0.5, AdversaryStrategy("reversal"), rng)
    with pytest.raises(ValueError):
        corrupt(x, -0.1, AdversaryStrategy("reversal"), rng)
    with pytest.raises(ValueError):
        AdversaryStrategy("bribery")
    with pytest.raises(DimensionError):
        corrupt(x, 0.1, AdversaryStrategy("coalition", {"preferred": [1, 2]}), rng)
    with pytest.raises(ValueError):
        corrupt(x[:0], 0.1, AdversaryStrategy("reversal"), rng)


def test_strategy_roundtrip():
    s = AdversaryStrategy("coalition", {"preferred": [2, 1, 3]})
    assert AdversaryStrategy.from_dict(s.to_dict()) == s


def test_coalition_scenario(rng):
    m = MallowsModel.create(0.7, random_perm(rng, 6))
    d = coalition_scenario(100, 0, m, m.central.reversed(), rng)
    assert d.n_corrupted == 0 and d.samples.shape == (100, 6)
    d = coalition_scenario(100, 10, m, m.central.reversed(), rng)
    assert d.n_corrupted == 10
    assert np.all(d.samples[d.mask] == m.central.reversed().mapping)
    d = coalition_scenario(100, 10, m, m.central.reversed(), rng, mode="mean_attack")
    assert d.n_corrupted == 10 and is_valid(d.samples)
    with pytest.raises(ValueError):
        coalition_scenario(100, 11, m, m.central, rng)


def test_coalition_displacement_grows_with_size():
    m = MallowsModel.create(0.8, Permutation.identity(20))
    pref = m.central.reversed()
    v_star = position_vector(m.central)
    cs = [0, 100, 500, 1000]
    disp = []
    for c in cs:
        d = coalition_scenario(10_000, c, m, pref, np.random.default_rng(11))
        disp.append(np.linalg.norm(batch_ranks(d.samples).mean(axis=0) - v_star))
    slope = np.polyfit(cs, disp, 1)[0]
    assert slope > 0
    assert np.all(np.diff(disp) > 0)
