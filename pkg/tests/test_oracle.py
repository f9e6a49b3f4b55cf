import pytest

from minerdilemma import equilibrium as eqm
from minerdilemma.errors import DomainError
from minerdilemma.game import GameParams, StrategyPair, d_avg_reward
from minerdilemma.oracle import (
    DEFAULT_GRID,
    GridSpec,
    exhaustive_equilibrium,
    fd_derivative,
    grid_best_response,
    grid_fixed_point,
    is_grid_fixed_point,
)


def test_default_grid_is_fine_enough():
    assert DEFAULT_GRID.final_width(1.0) <= 1e-6


@pytest.mark.parametrize("kwargs", [{"resolution": 8}, {"refinement_rounds": 0}])
def test_grid_spec_validation(kwargs):
    with pytest.raises(DomainError):
        GridSpec(**kwargs)


def test_grid_best_response_boundary():
    params = GameParams(1, 8, 0, 0)
    assert grid_best_response(params, 4.0, 1) <= DEFAULT_GRID.final_width(1.0)


def test_grid_best_response_symmetric():
    params = GameParams(32, 32, 0, 0)
    assert grid_best_response(params, 16.0, 1) == pytest.approx(16.0, abs=DEFAULT_GRID.final_width(32))


def test_grid_best_response_general():
    params = GameParams(1, 2, 1, 0)
    e = eqm.solve(params)
    b = grid_best_response(params, e.x2, 1)
    assert b == pytest.approx(e.x1, abs=DEFAULT_GRID.final_width(1.0))
    assert b == pytest.approx(0.2648, abs=1e-4)


def test_grid_best_response_pool_two():
    params = GameParams(1, 2, 1, 0)
    e = eqm.solve(params)
    assert grid_best_response(params, e.x1, 2) == pytest.approx(e.x2, abs=DEFAULT_GRID.final_width(2.0))


def test_grid_fixed_point_from_honest_mining():
    params = GameParams(1, 2, 1, 0)
    s = grid_fixed_point(params)
    e = eqm.solve(params)
    assert s.x1 == pytest.approx(e.x1, abs=1e-5)
    assert s.x2 == pytest.approx(e.x2, abs=1e-5)
    assert is_grid_fixed_point(params, e.profile)


def test_non_equilibrium_is_not_a_fixed_point():
    assert not is_grid_fixed_point(GameParams(1, 2, 1, 0), StrategyPair(0.1, 0.1))


def test_fd_derivative_vanishes_at_symmetric_equilibrium():
    params = GameParams(16, 16, 32, 0)
    e = eqm.solve(params)
    assert abs(fd_derivative(params, e.profile, 1, 1e-4)) <= 1e-9


def test_fd_derivative_matches_analytic():
    params = GameParams(3, 5, 2, 0.3)
    s = StrategyPair(1.1, 2.2)
    an = d_avg_reward(params, s, 2)
    assert fd_derivative(params, s, 2, 1e-5) == pytest.approx(an, rel=1e-6)


def test_fd_derivative_margin():
    with pytest.raises(DomainError):
        fd_derivative(GameParams(1, 2, 1, 0), StrategyPair(0.0, 0.5), 1, 1e-6)


@pytest.mark.parametrize(
    "args,expected",
    [((1, 2, 1, 0), (0.2648, 0.4407)), ((1, 8, 0, 0), (0.0, 4.0)), ((1, 1, 0, 0.5), (0.5, 0.5))],
)
def test_exhaustive_single_cluster(args, expected):
    params = GameParams(*args)
    found = exhaustive_equilibrium(params)
    assert len(found.clusters) == 1
    c = found.clusters[0]
    assert c.x1 == pytest.approx(expected[0], abs=1e-4)
    assert c.x2 == pytest.approx(expected[1], abs=1e-4)
    assert max(found.regrets) <= 1e-7
