from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_scenario, make_slice
from h2plan.dispatch import PlantConfig, WindowTotal, cost_components, dispatch, ramp_violations
from h2plan.errors import WindowInfeasible
from h2plan.planner import (
    ContractState,
    daily_plan,
    feasible_daily_mass_bounds,
    filter_mass,
    long_term_mass,
    lookahead_mass_bounds,
    max_mass_from,
    min_end_level,
)
from h2plan.timeseries import window
from oracles import dp_day_plan


def test_bounds_examples(plant):
    assert feasible_daily_mass_bounds(plant, 1.0) == pytest.approx((0.0, 432.0))
    assert feasible_daily_mass_bounds(plant, 0.0) == pytest.approx((0.0, 423.0))


def test_bounds_with_slow_ramp_down():
    plant = PlantConfig(rrd=0.25)
    lo, hi = feasible_daily_mass_bounds(plant, 1.0)
    # levels 0.75, 0.5, 0.25, 0 then idle
    assert lo == pytest.approx(18 * (0.75 + 0.5 + 0.25))
    assert hi == pytest.approx(432.0)


def test_max_mass_closed_form_matches_lp(plant):
    for f in (0.0, 0.2, 0.7, 1.0):
        assert max_mass_from(plant, f, 24) == pytest.approx(feasible_daily_mass_bounds(plant, f)[1])


def test_min_end_level(plant):
    assert min_end_level(plant, 100.0, 24) == 0.0
    assert min_end_level(plant, 432.0, 24) == pytest.approx(1.0)
    f = min_end_level(plant, 430.0, 24)
    assert max_mass_from(plant, f, 24) == pytest.approx(430.0, abs=1e-9)
    assert min_end_level(plant, 500.0, 24) == 1.0
    assert min_end_level(plant, 50.0, 0) == 0.0


@pytest.mark.parametrize("value,expected", [(500, 432), (296, 296), (-5, 0)])
def test_filter_examples(value, expected):
    assert filter_mass(value, (0, 432)) == expected


def test_filter_rejects_empty_range():
    with pytest.raises(ValueError):
        filter_mass(1.0, (2.0, 1.0))


@given(m=st.floats(-1e4, 1e4), lo=st.floats(0, 500), width=st.floats(0, 500))
def test_filter_idempotent_and_inside(m, lo, width):
    b = (lo, lo + width)
    once = filter_mass(m, b)
    assert b[0] <= once <= b[1]
    assert filter_mass(once, b) == once


def test_contract_state():
    s = ContractState("week", 2071.0, 1800.0, 48, 5, 120)
    assert s.remaining_target_kg == pytest.approx(271.0)
    nxt = s.after_day(300.0)
    assert nxt.remaining_target_kg == 0.0
    assert (nxt.remaining_hours_in_period, nxt.day_index_in_period, nxt.next_day_start) == (24, 6, 144)
    with pytest.raises(ValueError):
        ContractState("fortnight", 1.0, 0.0, 24, 0)
    with pytest.raises(ValueError):
        ContractState("week", 1.0, 0.0, 30, 0)


def test_long_term_daily_and_last_day(plant):
    sc = make_scenario(24 * 14)
    day = ContractState("day", 296.0, 0.0, 24, 0, 24)
    assert long_term_mass(sc, day, plant, 0.5, 0.0) == 296.0
    last = ContractState("week", 2071.0, 1800.0, 24, 6, 24 * 6)
    assert long_term_mass(sc, last, plant, 0.5, 0.3) == pytest.approx(271.0)


def test_long_term_front_loads_cheap_day(plant):
    price = np.full(24 * 14, 100.0)
    price[168:192] = 0.0  # only the first day of the second week is cheap
    sc = make_scenario(24 * 14, price=price, co2=0.0)
    state = ContractState("week", 2071.0, 0.0, 168, 0, 168)
    M = long_term_mass(sc, state, plant, 0.0, 0.0)
    # independent reference: most a cold electrolyser makes in one day
    assert M == pytest.approx(min(2071.0, max_mass_from(plant, 0.0, 24)), abs=1e-6)
    # and the full-window LP makes the same first-day choice
    sl = window(sc, 168, 168)
    _, res = dispatch(sl, plant, 0.0, 0.0, WindowTotal(2071.0, "="))
    assert res.m[:24].sum() == pytest.approx(M, abs=1e-6)


def test_long_term_window_infeasible(plant):
    sc = make_scenario(24 * 14)
    state = ContractState("week", 5000.0, 0.0, 168, 0, 168)
    with pytest.raises(WindowInfeasible):
        long_term_mass(sc, state, plant, 0.0, 0.0)


def test_long_term_early_in_dataset_scales_target(plant):
    sc = make_scenario(24 * 14)
    state = ContractState("week", 2071.0, 0.0, 168, 0, 0)  # no history before hour 0
    M = long_term_mass(sc, state, plant, 0.0, 0.0)
    assert 0.0 <= M <= 423.0 + 1e-9


def test_daily_plan_zero(plant):
    plan = daily_plan(make_slice(34, price=30.0), plant, 0.0, 0.0, 0.0)
    assert np.all(plan.committed == 0.0) and plan.f4_end == 0.0
    assert plan.committed.shape == (24,) and plan.advisory.shape == (10,)


def test_daily_plan_full(plant):
    plan = daily_plan(make_slice(34, price=30.0), plant, 1.0, 0.0, 432.0)
    np.testing.assert_allclose(plan.committed, 18.0, atol=1e-9)
    assert plan.f4_end == pytest.approx(1.0)


def test_daily_plan_follows_cheap_hours():
    plant = PlantConfig(rruc=1.0)  # instant cold start: the split is exact
    price = np.r_[np.full(12, 100.0), np.full(22, 5.0)]
    plan = daily_plan(make_slice(34, price=price, co2=0.0), plant, 0.0, 0.0, 216.0)
    np.testing.assert_allclose(plan.committed[12:], 18.0, atol=1e-9)
    np.testing.assert_allclose(plan.committed[:12], 0.0, atol=1e-9)


def test_daily_plan_matches_dp_oracle(plant):
    price = np.r_[np.full(12, 100.0), np.full(22, 5.0)]
    sl = make_slice(34, price=price, co2=50.0)
    for alpha in (0.0, 0.5):
        plan = daily_plan(sl, plant, 0.0, alpha, 216.0)
        lp_cost = cost_components(plan.expected, make_slice(24, price=price[:24], co2=50.0), plant, alpha).C_alpha
        tail_cost = float(np.sum(plan.advisory / 18.0 * (alpha * 50.0 + (1 - alpha) * 5.0)))
        levels = [0.0, 0.25, 0.5, 0.75, 1.0]
        dp = dp_day_plan(price, np.full(34, 50.0), plant, alpha, 0.0, 216.0, plan.extra_mass, levels)
        assert lp_cost + tail_cost <= dp + 1e-6
        assert lp_cost + tail_cost == pytest.approx(dp, abs=1e-6)  # the optimum lies on the grid here


@settings(max_examples=25, deadline=None)
@given(f0=st.floats(0, 1), frac=st.floats(0, 1), seed=st.integers(0, 1000))
def test_daily_plan_hits_target(f0, frac, seed):
    plant = PlantConfig()
    rng = np.random.default_rng(seed)
    lo, hi = feasible_daily_mass_bounds(plant, f0)
    M = lo + frac * (hi - lo)
    sl = make_slice(34, rng.uniform(0, 1, 34), rng.uniform(0, 1, 34), rng.uniform(-10, 90, 34), rng.uniform(0, 300, 34))
    plan = daily_plan(sl, plant, f0, rng.uniform(), M)
    assert plan.committed.sum() == pytest.approx(M, abs=1e-6)
    assert np.all(plan.committed <= plant.max_hourly_mass + 1e-9)
    assert len(ramp_violations(plan.expected.g4, plant, f0)) == 0


def test_lookahead_bounds_respect_day_mass(plant):
    lo, hi = lookahead_mass_bounds(plant, 1.0, 432.0, 10)
    assert lo == 0.0 and hi == pytest.approx(180.0)
    lo, hi = lookahead_mass_bounds(replace(plant, rrd=0.25), 1.0, 432.0, 10)
    assert lo == pytest.approx(18 * 1.5)


def test_end_level_floor_keeps_last_day_reachable(plant):
    # 432 kg must remain possible tomorrow: today has to end at full load
    state = ContractState("week", 632.0, 0.0, 48, 5, 0)
    plan = daily_plan(make_slice(34, price=np.r_[np.full(23, 5.0), np.full(11, 500.0)]), plant, 0.0, 0.0, 200.0, state)
    assert plan.f4_end == pytest.approx(1.0)
    assert plan.committed.sum() == pytest.approx(200.0, abs=1e-6)
