from dataclasses import replace

import numpy as np
import pytest

from conftest import make_slice
from h2plan.dispatch import (
    DailySum,
    DispatchResult,
    PlantConfig,
    WindowTotal,
    balance_violations,
    build_dispatch,
    cost_components,
    dispatch,
    extract_flows,
    period_targets,
    plan_follow,
    ramp_violations,
)
from h2plan.errors import InternalConsistency, InvalidMassSpec, NotOptimal
from h2plan.lp import LpSolution, Status, solve


def test_plant_validation():
    with pytest.raises(ValueError):
        PlantConfig(G4=0)
    with pytest.raises(ValueError):
        PlantConfig(rruc=0)
    with pytest.raises(ValueError):
        PlantConfig(eta_lhv=1.2)
    with pytest.raises(ValueError):
        PlantConfig(lifetime_years=0.5)
    assert PlantConfig().kg_per_mwh_input == pytest.approx(18.0)


def test_full_production_hour(plant):
    sl = make_slice(1)
    sol, res = dispatch(sl, plant, 1.0, 0.0, plan_follow([18.0]))
    assert sol.status is Status.OPTIMAL
    assert res.g4[0] == pytest.approx(1.0)
    assert res.g5i[0] == pytest.approx(1.0)
    assert res.m[0] == pytest.approx(18.0)


def test_cold_start_cannot_reach_full_load(plant):
    sol, res = dispatch(make_slice(1), plant, 0.0, 0.0, plan_follow([18.0]))
    assert sol.status is Status.INFEASIBLE and res is None


def test_null_operation(plant):
    sol, res = dispatch(make_slice(6, price=[10, 20, 30, 40, 50, 60]), plant, 0.0, 0.0, WindowTotal(0.0, ">="))
    assert sol.objective_value == pytest.approx(0.0, abs=1e-12)
    for k in ("g1", "g2", "g4", "g5i", "g5e", "m"):
        assert np.all(np.abs(getattr(res, k)) < 1e-12)


def test_extract_flows_requires_optimal(plant):
    p, vm = build_dispatch(make_slice(2), plant, 0.0, 0.0, None)
    bad = LpSolution(Status.INFEASIBLE, np.full(p.n_vars, np.nan), np.nan)
    with pytest.raises(NotOptimal):
        extract_flows(bad, vm, make_slice(2), plant)


def test_tampered_solution_detected(plant):
    sl = make_slice(3, cf_wind=0.5)
    p, vm = build_dispatch(sl, plant, 0.0, 0.0, WindowTotal(10.0, "="))
    sol = solve(p)
    x = sol.values.copy()
    x[vm["g5e"][1]] += 0.01  # breaks the AC balance
    with pytest.raises(InternalConsistency):
        extract_flows(LpSolution(Status.OPTIMAL, x, sol.objective_value), vm, sl, plant)


def test_mass_spec_validation(plant):
    with pytest.raises(InvalidMassSpec):
        build_dispatch(make_slice(3), plant, 0.0, 0.0, plan_follow([1.0, 2.0]))
    with pytest.raises(InvalidMassSpec):
        build_dispatch(make_slice(3), plant, 0.0, 0.0, period_targets([(0, 5, 1.0)]))
    with pytest.raises(InvalidMassSpec):
        build_dispatch(make_slice(3), plant, 0.0, 0.0, DailySum(1.0, 0.0, 4))
    with pytest.raises(ValueError):
        build_dispatch(make_slice(3), plant, 1.5, 0.0, None)


def test_inverter_loss_and_solar_export(plant):
    sl = make_slice(1, cf_solar=1.0, price=100.0)
    _, res = dispatch(sl, plant, 0.0, 0.0, plan_follow([0.0]))
    assert res.g3ac[0] == pytest.approx(0.9)
    assert res.g5e[0] == pytest.approx(0.9) and res.g5i[0] == 0.0
    assert cost_components(res, sl, plant, 0.0).C_e == pytest.approx(-90.0)


def test_curtailment_at_negative_price(plant):
    sl = make_slice(2, cf_wind=0.8, price=-10.0)
    _, res = dispatch(sl, plant, 0.0, 0.0, plan_follow([0.0, 0.0]))
    assert np.allclose(res.g5e, 0.0, atol=1e-9)  # never pay to export
    assert cost_components(res, sl, plant, 0.0).C_e == pytest.approx(0.0, abs=1e-9)


def _result(n, **flows):
    base = {k: np.zeros(n) for k in ("g1", "g1c", "g2", "g2c", "g3dc", "g3ac", "g4", "gH2", "g5i", "g5e", "m")}
    base.update({k: np.asarray(v, dtype=float) for k, v in flows.items()})
    return DispatchResult(**base)


def test_cost_formulas(plant):
    sl = make_slice(1, price=50.0, co2=100.0)
    imp = cost_components(_result(1, g4=[1.0], g5i=[1.0], gH2=[0.6], m=[18.0]), sl, plant, 0.3)
    assert (imp.C_e, imp.co2_kg, imp.C_co2_eur) == pytest.approx((50.0, 100.0, 100.0))
    assert imp.C_alpha == pytest.approx(0.3 * 100.0 + 0.7 * 50.0, rel=1e-9)
    exp = cost_components(_result(1, g2=[1.0], g5e=[1.0]), make_slice(1, cf_wind=1.0, price=50.0, co2=100.0), plant, 0.0)
    assert exp.C_e == pytest.approx(-50.0) and exp.co2_kg == 0.0


def test_annualised_capital():
    plant = PlantConfig(c_e_capacity=700_000, lifetime_years=10, discount_rate=0.07, c_fixed=0)
    # annuity factor 0.07 / (1 - 1.07**-10) evaluated independently
    expected = 700_000 * 0.07 / (1 - 1 / 1.07 ** 10)
    assert plant.annualised_capex() == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(99_662, rel=1e-4)
    year = cost_components(DispatchResult.zeros(8760), make_slice(8760), plant, 0.0)
    assert year.C_c == pytest.approx(expected)
    assert PlantConfig(discount_rate=0.0).annualised_capex() == pytest.approx(70_000)


def test_operation_cost():
    plant = PlantConfig(c_op_electrolyser=2.0, c_op_wind=1.0)
    sl = make_slice(2, cf_wind=1.0, price=10.0)
    _, res = dispatch(sl, plant, 1.0, 0.0, plan_follow([18.0, 18.0]))
    c = cost_components(res, sl, plant, 0.0)
    assert c.C_o == pytest.approx(2 * 2.0 + 2 * 1.0)


def test_balances_hold_on_random_instances(plant):
    rng = np.random.default_rng(3)
    for _ in range(5):
        n = 24
        sl = make_slice(n, rng.uniform(0, 1, n), rng.uniform(0, 1, n), rng.uniform(-20, 120, n), rng.uniform(0, 400, n))
        f0 = rng.uniform()
        _, res = dispatch(sl, plant, f0, rng.uniform(), WindowTotal(rng.uniform(0, 300), "="))
        v = balance_violations(res, sl, plant)
        assert max(v.values()) <= 1e-6
        assert len(ramp_violations(res.g4, plant, f0)) == 0
        assert np.all(res.g1c <= sl.cf_solar + 1e-9) and np.all(res.g2c <= sl.cf_wind + 1e-9)


def test_ramp_audit_counts_bad_steps(plant):
    g4 = np.array([0.5, 1.0, 0.0, 0.6])
    assert list(ramp_violations(g4, plant, 0.0)) == [3]
    assert list(ramp_violations(g4, plant, 0.0, tol=0.2)) == []
    assert list(ramp_violations(np.array([0.6]), plant, 0.0)) == [0]


def test_ramp_respected_from_initial_level():
    plant = PlantConfig(rrd=0.25)
    sl = make_slice(8, price=[0, 0, 0, 0, 500, 500, 500, 500])
    for f0 in (0.0, 0.3, 1.0):
        _, res = dispatch(sl, plant, f0, 0.0, WindowTotal(50.0, "="))
        assert len(ramp_violations(res.g4, plant, f0)) == 0


def test_concat_head_tail(plant):
    _, res = dispatch(make_slice(6, price=[1, 2, 3, 4, 5, 6]), plant, 0.0, 0.0, WindowTotal(40.0, "="))
    joined = DispatchResult.concat([res.head(2), res.tail(2)])
    assert np.array_equal(joined.m, res.m)
    assert res.total_h2_kg == pytest.approx(40.0)


def test_digest_changes_with_config():
    assert PlantConfig().digest() == PlantConfig().digest()
    assert PlantConfig().digest() != replace(PlantConfig(), G1=2.0).digest()
