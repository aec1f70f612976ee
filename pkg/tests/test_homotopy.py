import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homopt.gam import fit_gam
from homopt.homotopy import HomotopyConfig, eval_homotopy, track_path
from homopt.neldermead import minimize
from homopt.objectives import gramacy_lee


def _surrogates(seed, dim=2, n=15):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (n, dim))
    yf = np.sin(3 * X[:, 0]) + X[:, -1] ** 2 + rng.standard_normal(n) * 0.1
    yg = np.cos(2 * X[:, 0]) - X[:, -1] + rng.standard_normal(n) * 0.1
    return fit_gam(X, yf), fit_gam(X, yg)


@pytest.fixture(scope="module")
def fg():
    return _surrogates(0)


def test_endpoints_exact(fg):
    f, g = fg
    x = np.array([0.2, -0.4])
    assert eval_homotopy(f, g, x, 1.0) == f.predict_one(x)
    assert eval_homotopy(f, g, x, 0.0) == g.predict_one(x)


def test_midpoint_average(fg):
    f, g = fg
    x = np.array([0.1, 0.1])
    expected = 0.5 * f.predict_one(x) + 0.5 * g.predict_one(x)
    assert eval_homotopy(f, g, x, 0.5) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("t", [-0.01, 1.01, np.nan])
def test_t_out_of_range(fg, t):
    f, g = fg
    with pytest.raises(ValueError):
        eval_homotopy(f, g, [0.0, 0.0], t)


def test_dimension_mismatch(fg):
    f, _ = fg
    g1 = fit_gam(np.linspace(0, 1, 10), np.linspace(0, 1, 10))
    with pytest.raises(ValueError):
        eval_homotopy(f, g1, [0.0, 0.0], 0.5)


def test_path_shape_and_schedule(fg):
    f, g = fg
    path = track_path(f, g, [0.0, 0.0], [-1, -1], [1, 1])
    assert len(path.points) == len(path.t_values) == 6
    assert path.t_values == [1.0, 0.8, 0.6, 0.4, 0.19999999999999996, 0.0]
    assert path.t_values[-1] == 0.0
    for p in path.points:
        assert np.all(p >= -1) and np.all(p <= 1)


def test_per_step_descent(fg):
    f, g = fg
    path = track_path(f, g, [0.3, 0.5], [-1, -1], [1, 1])
    for k in range(1, len(path.points)):
        t = path.t_values[k]
        assert eval_homotopy(f, g, path.points[k], t) <= eval_homotopy(f, g, path.points[k - 1], t)


def test_identical_surrogates(fg):
    _, g = fg
    x0 = np.array([0.5, -0.5])
    path = track_path(g, g, x0, [-1, -1], [1, 1])
    for k in range(1, len(path.points)):
        assert g.predict_one(path.points[k]) <= g.predict_one(path.points[k - 1])
    plain = minimize(g.predict_one, x0, [-1, -1], [1, 1])
    assert g.predict_one(path.points[-1]) <= plain.fun + 1e-12


def test_single_step(fg):
    f, g = fg
    x0 = np.array([0.5, -0.5])
    path = track_path(f, g, x0, [-1, -1], [1, 1], HomotopyConfig(n_steps=1))
    assert len(path.points) == 2
    assert path.t_values == [1.0, 0.0]
    assert np.array_equal(path.points[0], x0)
    np.testing.assert_array_equal(path.points[1], minimize(g.predict_one, x0, [-1, -1], [1, 1]).x)


def test_gramacy_lee_ten_to_twenty_samples():
    # f from 10 evenly spaced samples, g from 20; start at the minimizer of f
    x10, x20 = np.linspace(0.5, 2.5, 10), np.linspace(0.5, 2.5, 20)
    f = fit_gam(x10, [gramacy_lee(v) for v in x10])
    g = fit_gam(x20, [gramacy_lee(v) for v in x20])
    grid = np.linspace(0.5, 2.5, 20001)
    x0 = np.array([grid[np.argmin(f.predict(grid[:, None]))]])
    path = track_path(f, g, x0, [0.5], [2.5])
    assert gramacy_lee(path.points[-1][0]) <= gramacy_lee(x0[0])


def test_n_steps_validation():
    with pytest.raises(ValueError):
        HomotopyConfig(n_steps=0)


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 19), st.floats(-1, 1), st.floats(-1, 1))
def test_endpoint_identity_property(model_seed, a, b):
    f, g = _SURROGATE_POOL[model_seed]
    x = np.array([a, b])
    assert eval_homotopy(f, g, x, 1.0) == f.predict_one(x)
    assert eval_homotopy(f, g, x, 0.0) == g.predict_one(x)


_SURROGATE_POOL = [_surrogates(s) for s in range(20)]
