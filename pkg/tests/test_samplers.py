import math

import numpy as np
import pytest
from scipy import stats
from sklearn.base import clone

from homopt.history import Branch, TrialHistory
from homopt.samplers import (
    ExternalSampler,
    GPEISampler,
    ParzenMixture,
    RandomSampler,
    SamplerError,
    TPESampler,
    expected_improvement,
    make_sampler,
    silverman_bandwidth,
    split_good_bad,
)
from homopt.space import Categorical, Continuous, Integer, SearchSpace

SPACE = SearchSpace((Continuous("a", -3.0, 5.0), Integer("b", 0, 9), Categorical("c", ("p", "q", "r"))))


def random_history(n, seed=0, space=SPACE, fn=None):
    rng = np.random.default_rng(seed)
    fn = fn or (lambda x: float(np.sum((x - 1.0) ** 2)))
    h = TrialHistory()
    for _ in range(n):
        x = space.sample_uniform(rng)
        h.append(x, fn(x), Branch.INNER)
    return h


@pytest.mark.parametrize("sampler", [RandomSampler(), TPESampler(), GPEISampler()])
def test_deterministic(sampler):
    h = random_history(30)
    a = sampler.propose(h, SPACE, np.random.default_rng(4))
    b = sampler.propose(h, SPACE, np.random.default_rng(4))
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("make", [RandomSampler, TPESampler, GPEISampler])
def test_proposals_inside_box(make):
    sampler = make()
    rng = np.random.default_rng(0)
    histories = [random_history(n, seed=n) for n in (0, 5, 12, 25, 40)]
    lo, hi = SPACE.lower, SPACE.upper
    total = 10_000 if make is not GPEISampler else 2_000
    for i in range(total):
        x = sampler.propose(histories[i % len(histories)], SPACE, rng)
        assert np.all(x >= lo) and np.all(x <= hi)


def test_tpe_defaults():
    assert TPESampler().get_params() == {"gamma": 0.2, "n_candidates": 10, "n_startup": 10}
    assert GPEISampler().get_params() == {"n_startup": 20, "n_candidates": 10, "noise": 1e-6}


def test_tpe_good_set_is_twenty_lowest():
    rng = np.random.default_rng(3)
    losses = rng.permutation(np.linspace(0.0, 1.0, 100))
    good, bad = split_good_bad(losses, 0.20)
    assert len(good) == 20 and len(bad) == 80
    assert set(good) == set(np.argsort(losses)[:20])


@pytest.mark.parametrize("n, expected", [(10, 2), (11, 3), (5, 1), (2, 1)])
def test_split_sizes(n, expected):
    good, bad = split_good_bad(np.arange(n, dtype=float), 0.2)
    assert len(good) == expected and len(bad) == n - expected


def test_tpe_shift_invariant():
    h = random_history(40, seed=8)
    shifted = TrialHistory()
    for t in h:
        shifted.append(t.params, t.loss + 123.4, t.branch)
    s = TPESampler()
    a = s.propose(h, SPACE, np.random.default_rng(1))
    b = s.propose(shifted, SPACE, np.random.default_rng(1))
    np.testing.assert_array_equal(a, b)


def test_tpe_moves_toward_good_region():
    space = SearchSpace((Continuous("x", 0.0, 10.0),))
    h = random_history(60, seed=2, space=space, fn=lambda x: abs(x[0] - 2.0))
    rng = np.random.default_rng(0)
    props = np.array([TPESampler().propose(h, space, rng)[0] for _ in range(300)])
    assert np.median(np.abs(props - 2.0)) < 1.0


def test_silverman_floor():
    pts = np.zeros((5, 2))
    np.testing.assert_allclose(silverman_bandwidth(pts, np.array([10.0, 2.0])), [1e-2, 2e-3])


def test_parzen_density_integrates_to_one():
    mix = ParzenMixture(np.array([[0.2], [0.7]]), np.array([0.1]), np.array([0.0]), np.array([1.0]))
    grid = np.linspace(-1, 2, 30001)[:, None]
    mass = np.trapezoid(np.exp(mix.log_pdf(grid)), grid[:, 0])
    assert mass == pytest.approx(1.0, abs=1e-3)


def test_bayes_startup_is_uniform():
    # |history| = 5 < n_startup: proposals must look uniform (chi-squared over 10 bins)
    space = SearchSpace((Continuous("x", 0.0, 1.0),))
    h = random_history(5, space=space)
    rng = np.random.default_rng(12)
    draws = np.array([GPEISampler().propose(h, space, rng)[0] for _ in range(1000)])
    counts, _ = np.histogram(draws, bins=10, range=(0, 1))
    assert stats.chisquare(counts).pvalue > 0.01


def test_ei_matches_closed_form():
    mu = np.array([0.0, 0.5, 1.0, -1.0])
    sigma = np.array([1.0, 0.2, 0.3, 2.0])
    best = 0.4
    z = (best - mu) / sigma
    expected = (best - mu) * stats.norm.cdf(z) + sigma * stats.norm.pdf(z)
    np.testing.assert_allclose(expected_improvement(mu, sigma, best), expected, rtol=1e-12)


def test_ei_zero_at_incumbent_and_nonnegative():
    assert expected_improvement(np.array([0.3]), np.array([0.0]), 0.3)[0] == 0.0
    rng = np.random.default_rng(0)
    ei = expected_improvement(rng.normal(size=1000), rng.uniform(0, 2, 1000), 0.0)
    assert np.all(ei >= 0)


def test_gp_interpolates_observed_point():
    h = random_history(25, seed=6)
    gp, ys, lo, scale = GPEISampler().fit_gp(h, SPACE)
    mu, sigma = gp.predict((h.X[:3] - lo) / scale)
    np.testing.assert_allclose(mu, ys[:3], atol=1e-3)
    assert np.all(sigma < 1e-2)
    ei = expected_improvement(mu, np.zeros(3), ys.min())
    assert np.all(ei >= 0)


def test_gp_duplicate_points_survive():
    h = TrialHistory()
    for i in range(25):
        h.append([0.5, 3.0, 1.0], 1.0 + (i % 2) * 1e-3, Branch.INNER)
    x = GPEISampler().propose(h, SPACE, np.random.default_rng(0))
    assert SPACE.contains(x)


def test_external_sampler(stub):
    space = SearchSpace((Continuous("x", 0.0, 4.0), Continuous("y", -2.0, 2.0)))
    s = ExternalSampler(command=stub("midpoint_sampler.py"), timeout=30)
    np.testing.assert_array_equal(s.propose(random_history(3, space=space), space, None), [2.0, 0.0])


def test_external_sampler_failure(stub):
    space = SearchSpace((Continuous("x", 0.0, 4.0),))
    with pytest.raises(SamplerError):
        ExternalSampler(command=stub("crash.py"), timeout=30).propose(TrialHistory(), space, None)


def test_empty_space():
    with pytest.raises(SamplerError):
        RandomSampler().propose(TrialHistory(), SearchSpace(()), np.random.default_rng(0))


def test_make_sampler_and_clone():
    s = make_sampler("tpe", gamma=0.25)
    assert isinstance(s, TPESampler) and s.gamma == 0.25
    assert clone(s).get_params() == s.get_params()
    with pytest.raises(ValueError):
        make_sampler("smac")


def test_gamma_ceiling_is_exact():
    # 0.2 * 15 = 3.0000000000000004 in floating point; the good set must still be 3
    good, _ = split_good_bad(np.arange(15, dtype=float), 0.2)
    assert len(good) == math.ceil(3)
