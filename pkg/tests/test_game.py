import math

import numpy as np
import pytest

from innoreg.game import (Equilibrium, MarketParams, equilibrium_at_royalty,
                          feasibility_region, follower_best_response,
                          follower_equilibrium_quantity, follower_profit,
                          inverse_demand, leader_optimal_quantity,
                          leader_profit, leader_profit_at, optimal_royalty,
                          royalty_foc, royalty_profit_profile, spne,
                          verify_equilibrium)


def test_market_params_validation():
    with pytest.raises(ValueError):
        MarketParams(a=0.0, c=1.0)
    with pytest.raises(ValueError):
        MarketParams(a=3.0, c=-1.0)
    with pytest.raises(ValueError):
        MarketParams(a=math.inf, c=1.0)
    p = MarketParams(a=10.0, c=1.0)
    assert p.a == 10.0 and p.c == 1.0


def test_inverse_demand_and_follower_profit():
    p = MarketParams(a=10.0, c=1.0)
    assert inverse_demand(3.0, 2.0, p) == 5.0
    # (p - r^2 - c) * q2 = (10 - 3 - 2 - 1 - 1) * 2
    assert follower_profit(1.0, 3.0, 2.0, p) == pytest.approx(6.0)


def test_follower_best_response_is_argmax():
    p = MarketParams(a=8.0, c=0.5)
    rng = np.random.default_rng(11)
    for _ in range(20):
        q1 = rng.uniform(0, 4)
        r = rng.uniform(0, 1.2)
        br = follower_best_response(q1, r, p)
        grid = np.linspace(br - 2, br + 2, 2001)
        profits = [follower_profit(r, q1, q, p) for q in grid]
        assert abs(grid[int(np.argmax(profits))] - br) < 2e-3


def test_leader_profit_matches_market_accounting():
    # reduced-form leader payoff == price*q1 + r^2*q1 - c*q1 once the
    # follower best-responds
    p = MarketParams(a=10.0, c=1.0)
    rng = np.random.default_rng(3)
    for _ in range(50):
        q1 = rng.uniform(0, 5)
        r = rng.uniform(0, 1.5)
        q2 = follower_best_response(q1, r, p)
        assert leader_profit(r, q1, p) == pytest.approx(
            leader_profit_at(r, q1, q2, p), abs=1e-12)


def test_stage_quantities_closed_form():
    p = MarketParams(a=10.0, c=1.0)
    assert leader_optimal_quantity(1.0, p) == pytest.approx((10 + 3 - 1) / 2)
    assert follower_equilibrium_quantity(1.0, p) == pytest.approx((10 - 5 - 1) / 4)


def test_worked_instance():
    p = MarketParams(a=10.0, c=1.0)
    eq = equilibrium_at_royalty(p, 1.0)
    assert eq.q1 == pytest.approx(6.0, abs=1e-12)
    assert eq.q2 == pytest.approx(1.0, abs=1e-12)
    assert eq.price == pytest.approx(3.0, abs=1e-12)
    assert eq.leader_payoff == pytest.approx(18.0, abs=1e-12)
    assert eq.follower_payoff == pytest.approx(1.0, abs=1e-12)
    assert eq.flags.all_ok()


def test_royalty_foc_form():
    p = MarketParams(a=6.0, c=2.0)
    for r in (0.0, 0.3, 1.1):
        q1 = leader_optimal_quantity(r, p)
        assert royalty_foc(r, q1) == pytest.approx(3 * r * q1)


def test_optimal_royalty_negative_radicand_never_throws():
    p = MarketParams(a=10.0, c=1.0)
    sol = optimal_royalty(p)
    assert not sol.real
    assert math.isnan(sol.value)
    assert sol.radicand == pytest.approx((1.0 - 10.0) / 3)


def test_optimal_royalty_real_branch():
    p = MarketParams(a=1.0, c=4.0)
    sol = optimal_royalty(p)
    assert sol.real
    assert sol.value == pytest.approx(1.0)
    assert sol.radicand == pytest.approx(1.0)


def test_spne_degenerate_leader_quantity():
    rng = np.random.default_rng(99)
    for _ in range(30):
        a = rng.uniform(0.5, 4.0)
        c = a + rng.uniform(0.1, 5.0)  # c > a: royalty stays real
        eq = spne(MarketParams(a=a, c=c))
        assert abs(eq.q1) < 1e-12
        assert eq.q2 == pytest.approx(2 * (a - c) / 3, abs=1e-12)
        assert eq.flags.r_real
        assert not eq.flags.q2_nonneg  # negative output is reported, not hidden


def test_spne_flags_non_real_royalty():
    eq = spne(MarketParams(a=10.0, c=1.0))
    assert not eq.flags.r_real
    assert math.isnan(eq.r)
    assert eq.r_squared == pytest.approx(-3.0)
    # quantities still evaluated at the stationary radicand
    assert eq.q1 == pytest.approx(0.0, abs=1e-12)
    assert eq.q2 == pytest.approx(6.0)


def test_profit_profile_monotone_when_a_exceeds_c():
    p = MarketParams(a=9.0, c=2.0)
    profits = royalty_profit_profile(p, np.linspace(0.0, 2.0, 40))
    assert len(profits) == 40
    assert np.all(np.diff(profits) > 0)
    q1_0 = leader_optimal_quantity(0.0, p)
    assert profits[0] == pytest.approx(leader_profit(0.0, q1_0, p))


def test_verify_equilibrium_accepts_true_optimum():
    p = MarketParams(a=10.0, c=1.0)
    eq = equilibrium_at_royalty(p, 1.0)
    rep = verify_equilibrium(p, eq)
    assert rep.all_ok()
    assert rep.foc_follower_gap < 1e-8
    assert rep.argmax_leader_gap < 1e-6
    assert rep.point_leader_gap == 0.0


def test_verify_equilibrium_rejects_off_equilibrium_point():
    p = MarketParams(a=10.0, c=1.0)
    eq = equilibrium_at_royalty(p, 1.0)
    bad = Equilibrium(q1=eq.q1 + 0.5, q2=eq.q2, r=eq.r, r_squared=eq.r_squared,
                      price=eq.price, leader_payoff=eq.leader_payoff,
                      follower_payoff=eq.follower_payoff, flags=eq.flags)
    rep = verify_equilibrium(p, bad)
    assert not rep.all_ok()
    assert not rep.checks["point_leader"]
    assert rep.checks["argmax_leader"]  # the closed form itself is still right


def test_verify_equilibrium_non_finite_input():
    p = MarketParams(a=10.0, c=1.0)
    eq = equilibrium_at_royalty(p, 1.0)
    nan_eq = Equilibrium(q1=math.nan, q2=eq.q2, r=eq.r, r_squared=eq.r_squared,
                         price=eq.price, leader_payoff=eq.leader_payoff,
                         follower_payoff=eq.follower_payoff, flags=eq.flags)
    with pytest.raises(ValueError):
        verify_equilibrium(p, nan_eq)


def test_equilibrium_at_royalty_rejects_non_finite_r():
    p = MarketParams(a=10.0, c=1.0)
    with pytest.raises(ValueError):
        equilibrium_at_royalty(p, math.nan)


def test_feasibility_region_flags():
    rows = feasibility_region([1.0, 4.0], [1.0, 2.0])
    assert len(rows) == 4
    by_key = {(row["a"], row["c"]): row for row in rows}
    assert by_key[(1.0, 2.0)]["r_real"] == 1
    assert by_key[(4.0, 1.0)]["r_real"] == 0
    for row in rows:
        for flag in ("r_real", "q1_nonneg", "q2_nonneg", "p_nonneg"):
            assert row[flag] in (0, 1)
