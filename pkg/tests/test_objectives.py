import math

import numpy as np
import pytest

from homopt.driver import DriverConfig, run
from homopt.objectives import (
    GRAMACY_LEE,
    MODIFIED_GRIEWANK,
    ObjectiveError,
    builtin,
    external_objective,
    gramacy_lee,
    modified_griewank,
)
from homopt.space import DomainError

# frozen oracle values (grid of 10^6 points, then bounded scalar refinement)
GL_XSTAR = 0.5485634445349483
GL_PSTAR = -0.8690111349894997
# direct substitution at (5 + pi, -3) evaluated at 30 digits: pi^2/40 + 2
GRIEWANK_AT_5_PLUS_PI = 2.246740110027233965470862275


def test_gramacy_lee_exact_values():
    assert gramacy_lee(1.0) == pytest.approx(0.0, abs=1e-15)
    assert gramacy_lee(0.5) == pytest.approx(0.0625, abs=1e-15)


def test_gramacy_lee_minimum():
    assert gramacy_lee(GL_XSTAR) == pytest.approx(GL_PSTAR, abs=1e-15)
    grid = np.linspace(0.5, 2.5, 200_001)
    assert min(gramacy_lee(x) for x in grid[::10]) >= GL_PSTAR


@pytest.mark.parametrize("x", [0.49, 2.51, -1.0])
def test_gramacy_lee_domain(x):
    with pytest.raises(DomainError):
        gramacy_lee(x)


def test_griewank_minimum():
    assert modified_griewank(5.0, -3.0) == 0.0


def test_griewank_shifted_value():
    assert modified_griewank(5 + math.pi, -3.0) == pytest.approx(GRIEWANK_AT_5_PLUS_PI, rel=1e-14)
    # y = -3 zeroes the second cosine argument, leaving -cos(pi) * 1
    assert modified_griewank(5 + math.pi, -3.0) == pytest.approx(math.pi ** 2 / 40 + 2, rel=1e-15)


@pytest.mark.parametrize("a", [0.1, 1.0, 3.3, 7.5, 15.0])
def test_griewank_even_in_x(a):
    assert modified_griewank(5 + a, -3.0) == pytest.approx(modified_griewank(5 - a, -3.0), abs=1e-15)


def test_griewank_grid_minimum():
    g = np.linspace(-20, 20, 2001)
    X, Y = np.meshgrid(g, g, indexing="ij")
    dx, dy = X - 5, Y + 3
    Z = (dx ** 2 + dy ** 2) / 40 - np.cos(dx) * np.cos(dy / np.sqrt(2)) + 1
    i, j = np.unravel_index(np.argmin(Z), Z.shape)
    assert abs(Z[i, j]) < 1e-9
    assert (g[i], g[j]) == pytest.approx((5.0, -3.0), abs=1e-12)
    # vectorized grid agrees with the scalar function
    for k in range(0, 2001, 250):
        assert Z[k, 2000 - k] == pytest.approx(modified_griewank(g[k], g[2000 - k]), abs=1e-12)


def test_griewank_domain():
    with pytest.raises(DomainError):
        modified_griewank(21.0, 0.0)


def test_builtins():
    assert builtin("gramacy_lee") is GRAMACY_LEE
    assert builtin("griewank_modified") is MODIFIED_GRIEWANK
    assert GRAMACY_LEE({"x": 1.0}) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        builtin("rastrigin")


def test_external_constant_stub(stub):
    obj = external_objective(stub("constant.py"), GRAMACY_LEE.space, timeout=30)
    assert obj({"x": 1.0}) == 0.5


def test_external_matches_builtin(stub):
    obj = external_objective(stub("gramacy_lee.py"), GRAMACY_LEE.space, timeout=30)
    rng = np.random.default_rng(0)
    for x in rng.uniform(0.5, 2.5, 100):
        assert abs(obj({"x": float(x)}) - gramacy_lee(float(x))) <= 1e-12


@pytest.mark.parametrize("name", ["crash.py", "garbage.py"])
def test_external_failure(stub, name):
    obj = external_objective(stub(name), GRAMACY_LEE.space, timeout=30)
    with pytest.raises(ObjectiveError):
        obj({"x": 1.0})


def test_external_timeout(stub):
    obj = external_objective(stub("sleepy.py"), GRAMACY_LEE.space, timeout=0.5)
    with pytest.raises(ObjectiveError, match="timed out"):
        obj({"x": 1.0})


def test_external_missing_command():
    obj = external_objective(["/nonexistent/evaluator"], GRAMACY_LEE.space)
    with pytest.raises(ObjectiveError):
        obj({"x": 1.0})


def test_crashing_stub_does_not_abort_run(stub):
    obj = external_objective(stub("crash.py"), GRAMACY_LEE.space, timeout=30)
    h = run(obj, GRAMACY_LEE.space, DriverConfig(max_trials=3, warmup=3, seed=0))
    assert len(h) == 3 and all(t.failed for t in h)
