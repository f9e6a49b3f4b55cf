import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minerdilemma.errors import DomainError
from minerdilemma.game import (
    GameParams,
    StrategyPair,
    avg_reward,
    d_avg_reward,
    direct_reward,
    raw_avg_reward,
    raw_avg_rewards_linear,
    raw_direct_reward,
)
from minerdilemma.oracle import fd_derivative, fd_second_difference

log_power = st.floats(min_value=-2.0, max_value=8.0).map(lambda e: 2.0**e)
outside = st.floats(min_value=0.0, max_value=256.0)
betrayal = st.floats(min_value=0.0, max_value=0.95)
unit = st.floats(min_value=0.0, max_value=1.0)


@st.composite
def instances(draw, interior=False):
    params = GameParams(draw(log_power), draw(log_power), draw(outside), draw(betrayal))
    lo, hi = (0.01, 0.99) if interior else (0.0, 1.0)
    u1 = lo + (hi - lo) * draw(unit)
    u2 = lo + (hi - lo) * draw(unit)
    s = StrategyPair(u1 * params.m1, u2 * params.m2)
    if params.t == 0.0 and params.p == 0.0 and u1 == 1.0 and u2 == 1.0:
        s = StrategyPair(0.5 * params.m1, s.x2)
    return params, s


def test_direct_reward_honest_mining():
    params = GameParams(1, 2, 1, 0)
    assert direct_reward(params, StrategyPair(0, 0), 1) == 0.25


def test_direct_reward_one_sided_attack():
    params = GameParams(1, 2, 1, 0)
    assert direct_reward(params, StrategyPair(0.5, 0), 1) == pytest.approx(1 / 7, rel=1e-15)


@pytest.mark.parametrize("x1,x2", [(0.0, 0.0), (0.3, 1.7), (1.0, 2.0)])
def test_direct_reward_total_betrayal(x1, x2):
    # every infiltrator betrays: effective power is the whole system
    r = raw_direct_reward(1.0, 2.0, 1.0, 1.0, x1, x2, 1)
    assert r == pytest.approx((1.0 - x1 + x2) / 4.0, rel=1e-15)


def test_avg_reward_honest_mining_is_uniform():
    params = GameParams(3, 5, 7, 0.3)
    for pool in (1, 2):
        assert avg_reward(params, StrategyPair(0, 0), pool) == pytest.approx(1 / 15, rel=1e-15)


def test_avg_reward_matches_linear_system():
    params = GameParams(1, 2, 1, 0)
    s = StrategyPair(0.2648, 0.4407)
    r1, r2 = raw_avg_rewards_linear(1, 2, 1, 0, s.x1, s.x2)
    assert avg_reward(params, s, 1) == pytest.approx(r1, abs=1e-9)
    assert avg_reward(params, s, 2) == pytest.approx(r2, abs=1e-9)


def test_d_avg_reward_vanishes_at_symmetric_equilibrium():
    params = GameParams(32, 32, 0, 0)
    assert d_avg_reward(params, StrategyPair(16, 16), 1) == pytest.approx(0.0, abs=1e-18)


def test_d_avg_reward_matches_fd_at_honest_mining():
    params = GameParams(1, 2, 1, 0)
    s = StrategyPair(0.0, 0.0)
    an = d_avg_reward(params, s, 1)
    h = 1e-6 * (params.m1 + params.m2)
    # one-sided at the boundary: second order forward difference
    r = lambda v: raw_avg_reward(1, 2, 1, 0, v, 0.0, 1)
    fd = (-3 * r(0.0) + 4 * r(h) - r(2 * h)) / (2 * h)
    assert an > 0
    assert fd == pytest.approx(an, rel=1e-6)


def test_d_avg_reward_nonpositive_for_idle_pool():
    params = GameParams(1, 8, 0, 0)
    assert d_avg_reward(params, StrategyPair(0, 4), 1) <= 0


def test_rejects_full_infiltration_without_outsiders():
    params = GameParams(1, 2, 0, 0)
    with pytest.raises(DomainError):
        avg_reward(params, StrategyPair(1, 2), 1)


@pytest.mark.parametrize("s", [StrategyPair(-0.1, 0), StrategyPair(0, 2.5), StrategyPair(1.01, 0)])
def test_rejects_out_of_range_profiles(s):
    with pytest.raises(DomainError):
        avg_reward(GameParams(1, 2, 1, 0), s, 1)


@pytest.mark.parametrize(
    "args", [(0, 1, 0, 0), (1, -1, 0, 0), (1, 1, -1, 0), (1, 1, 0, 1.0), (1, 1, 0, -0.1),
             (math.nan, 1, 0, 0), (1, math.inf, 0, 0)]
)
def test_params_validation(args):
    with pytest.raises(DomainError):
        GameParams(*args)


def test_bad_pool_index():
    with pytest.raises(DomainError):
        avg_reward(GameParams(1, 2, 1, 0), StrategyPair(0, 0), 3)


@given(instances())
@settings(max_examples=300, deadline=None)
def test_fixed_point_consistency(inst):
    params, s = inst
    m1, m2, t, p = params.m1, params.m2, params.t, params.p
    r1 = raw_avg_reward(m1, m2, t, p, s.x1, s.x2, 1)
    r2 = raw_avg_reward(m1, m2, t, p, s.x1, s.x2, 2)
    big1 = raw_direct_reward(m1, m2, t, p, s.x1, s.x2, 1)
    big2 = raw_direct_reward(m1, m2, t, p, s.x1, s.x2, 2)
    scale1 = r1 * (m1 + s.x2) + big1 + s.x1 * r2
    scale2 = r2 * (m2 + s.x1) + big2 + s.x2 * r1
    assert abs(r1 * (m1 + s.x2) - big1 - s.x1 * r2) <= 1e-12 * scale1
    assert abs(r2 * (m2 + s.x1) - big2 - s.x2 * r1) <= 1e-12 * scale2


@given(instances(), st.floats(min_value=-3.0, max_value=3.0))
@settings(max_examples=300, deadline=None)
def test_homogeneity(inst, log_alpha):
    params, s = inst
    alpha = 10.0**log_alpha
    big, bs = params.scaled(alpha), s.scaled(alpha)
    for pool in (1, 2):
        base = raw_avg_reward(params.m1, params.m2, params.t, params.p, s.x1, s.x2, pool)
        scaled = raw_avg_reward(big.m1, big.m2, big.t, big.p, bs.x1, bs.x2, pool)
        assert scaled == pytest.approx(base / alpha, rel=1e-12)


@given(instances(interior=True))
@settings(max_examples=300, deadline=None)
def test_derivative_matches_finite_differences(inst):
    params, s = inst
    step = 1e-6 * (params.m1 + params.m2)
    step = min(step, 0.005 * min(params.m1, params.m2))
    for pool in (1, 2):
        an = d_avg_reward(params, s, pool)
        fd = fd_derivative(params, s, pool, step)
        natural = avg_reward(params, s, pool) / params.m
        assert abs(fd - an) <= 1e-6 * max(abs(an), natural)


@given(instances(interior=True), unit)
@settings(max_examples=300, deadline=None)
def test_concave_in_own_strategy(inst, u):
    params, s = inst
    h = max(u, 1e-3) * 0.01 * min(params.m1, params.m2)
    for pool in (1, 2):
        assert fd_second_difference(params, s, pool, h) <= 1e-8 * avg_reward(params, s, pool)


@given(instances())
@settings(max_examples=200, deadline=None)
def test_total_betrayal_is_flat(inst):
    params, s = inst
    m = params.m
    for pool in (1, 2):
        r = raw_avg_reward(params.m1, params.m2, params.t, 1.0, s.x1, s.x2, pool)
        assert abs(r - 1.0 / m) <= 1e-14 / m


def test_linear_system_matches_closed_form_on_grid():
    m1, m2, t, p = 3.0, 5.0, 2.0, 0.4
    x1, x2 = np.meshgrid(np.linspace(0, m1, 7), np.linspace(0, m2, 7))
    r1, r2 = raw_avg_rewards_linear(m1, m2, t, p, x1, x2)
    np.testing.assert_allclose(r1, raw_avg_reward(m1, m2, t, p, x1, x2, 1), rtol=1e-12)
    np.testing.assert_allclose(r2, raw_avg_reward(m1, m2, t, p, x1, x2, 2), rtol=1e-12)
