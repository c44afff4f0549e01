import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_slice
from h2plan.dispatch import FLOWS, DispatchResult, PlantConfig, cost_components
from h2plan.errors import MismatchedAlphas, ZeroProduction
from h2plan.metrics import (
    GreenRules,
    ParetoPoint,
    classify_green,
    cumulative_series,
    levelised_cost,
    normalized_comparison,
    pareto_sweep,
    specific_emissions,
    write_pareto_csv,
)
from h2plan.simulator import DeliveryContract, SimulationReport, run_benchmark
from h2plan.synthetic import synthetic_scenario


def report_of(flows: dict, sl, plant=PlantConfig(), alpha=0.0):
    n = sl.n_hours
    base = {k: np.zeros(n) for k in FLOWS}
    base.update({k: np.asarray(v, dtype=float) for k, v in flows.items()})
    res = DispatchResult(**base, G4=plant.G4)
    return SimulationReport("benchmark", alpha, DeliveryContract("day", 0.0), plant, res,
                            cost_components(res, sl, plant, alpha), data=sl)


def grid_hour(price, co2, g4=1.0, g5i=1.0):
    sl = make_slice(1, price=price, co2=co2)
    return report_of({"g4": [g4], "g5i": [g5i], "gH2": [0.6 * g4], "m": [18.0 * g4]}, sl), sl


def test_lcoh_formula():
    plant = PlantConfig(c_e_capacity=0.0)
    rep, _ = grid_hour(0.0, 0.0)
    assert levelised_cost(rep, 0.0, plant) == 0.0  # free capital, free power
    rep_costs = rep.costs.__class__(C_e=10_000.0, C_o=0.0, C_co2_eur=0.0, co2_kg=0.0, C_c=99_662.0, C_alpha=0.0)
    big = SimulationReport("benchmark", 0.0, None, plant,
                           DispatchResult(**{k: np.zeros(1) for k in FLOWS[:-1]}, m=np.array([108_000.0])), rep_costs)
    assert levelised_cost(big, 20_000.0) == pytest.approx(129_662 / 108_000)
    double = SimulationReport("benchmark", 0.0, None, plant,
                              DispatchResult(**{k: np.zeros(1) for k in FLOWS[:-1]}, m=np.array([216_000.0])), rep_costs)
    assert levelised_cost(double, 20_000.0) == pytest.approx(levelised_cost(big, 20_000.0) / 2)


def test_specific_emissions():
    rep, _ = grid_hour(50.0, 120.0)
    assert specific_emissions(rep) == pytest.approx(120.0 / 18.0)
    sl = make_slice(1, cf_wind=1.0)
    onsite = report_of({"g2": [1.0], "g4": [1.0], "gH2": [0.6], "m": [18.0]}, sl)
    assert specific_emissions(onsite) == 0.0


def test_zero_production_raises():
    rep = report_of({}, make_slice(2))
    with pytest.raises(ZeroProduction):
        levelised_cost(rep, 0.0)
    with pytest.raises(ZeroProduction):
        specific_emissions(rep)


def test_onsite_only_is_green():
    sl = make_slice(1, cf_wind=1.0, price=80.0, co2=300.0)
    g = classify_green(report_of({"g2": [1.0], "g4": [1.0], "gH2": [0.6], "m": [18.0]}, sl))
    assert g.h2_onsite_green_kg == pytest.approx(18.0) and g.h2_nongreen_kg == 0.0
    assert math.isnan(g.specific_co2_nongreen)


def test_price_threshold_is_strict():
    rep, sl = grid_hour(19.9, 300.0)
    assert classify_green(rep).h2_grid_green_kg == pytest.approx(18.0)
    rep, sl = grid_hour(20.0, 300.0)
    g = classify_green(rep)
    assert g.h2_grid_green_kg == 0.0 and g.h2_nongreen_kg == pytest.approx(18.0)
    assert g.specific_co2_nongreen == pytest.approx(300.0 / 18.0)


def test_hourly_intensity_rule():
    rep, sl = grid_hour(20.0, 60.0)
    # annual mode with the same single hour: mean 60 < 64.8 counts as annual green
    ann = classify_green(rep)
    assert ann.h2_grid_green_kg == 0.0 and ann.h2_grid_green_annual_kg == pytest.approx(18.0)
    hourly = classify_green(rep, rules=GreenRules(hourly_intensity_mode=True))
    assert hourly.h2_grid_green_kg == 0.0 and hourly.h2_grid_green_hourly_kg == pytest.approx(18.0)
    edge, _ = grid_hour(20.0, 64.8)
    assert classify_green(edge, rules=GreenRules(hourly_intensity_mode=True)).h2_nongreen_kg == pytest.approx(18.0)


def test_annual_re_share_rule():
    rep, _ = grid_hour(50.0, 300.0)
    assert classify_green(rep, rules=GreenRules(grid_re_share=0.95)).h2_grid_green_annual_kg == pytest.approx(18.0)
    assert classify_green(rep, rules=GreenRules(grid_re_share=0.90)).h2_nongreen_kg == pytest.approx(18.0)


def test_import_feeds_electrolyser_first():
    # half the electrolyser load comes from the grid while wind is exported
    sl = make_slice(1, cf_wind=1.0, price=50.0, co2=200.0)
    rep = report_of({"g2": [1.0], "g4": [1.0], "gH2": [0.6], "m": [18.0], "g5i": [0.5], "g5e": [0.5]}, sl)
    g = classify_green(rep)
    assert g.h2_onsite_green_kg == pytest.approx(9.0) and g.h2_nongreen_kg == pytest.approx(9.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.1, 10.0), hourly=st.booleans())
def test_green_partition_and_scaling(seed, lam, hourly):
    rng = np.random.default_rng(seed)
    n = 24
    sl = make_slice(n, price=rng.uniform(-10, 60, n), co2=rng.uniform(0, 200, n))
    g4 = rng.uniform(0, 1, n)
    g5i = rng.uniform(0, 1.2, n)
    flows = {"g4": g4, "g5i": g5i, "gH2": 0.6 * g4, "m": 18.0 * g4}
    rules = GreenRules(hourly_intensity_mode=hourly)
    g = classify_green(report_of(flows, sl), rules=rules)
    parts = (g.h2_onsite_green_kg + g.h2_grid_green_kg + g.h2_grid_green_hourly_kg
             + g.h2_grid_green_annual_kg + g.h2_nongreen_kg)
    assert parts == pytest.approx(g.total_h2_kg, abs=1e-6)
    scaled = classify_green(report_of({k: lam * v for k, v in flows.items()}, sl), rules=rules)
    assert scaled.green_share == pytest.approx(g.green_share, rel=1e-9, abs=1e-12)


def test_normalized_comparison():
    pts = [ParetoPoint(a, 2.0 + a, 3.0 - a, 1.0, 0.0, 0.0) for a in (0.0, 0.5, 1.0)]
    assert all(c.lcoh_ratio == 1.0 and c.co2_ratio == 1.0 for c in normalized_comparison(pts, pts))
    d2d = [ParetoPoint(1.0, 1.0, 3.2, 1.0, 0.0, 0.0)]
    bench = [ParetoPoint(1.0, 1.0, 2.0, 1.0, 0.0, 0.0)]
    assert normalized_comparison(d2d, bench)[0].co2_ratio == pytest.approx(1.6)
    with pytest.raises(MismatchedAlphas):
        normalized_comparison(pts, pts[:2])
    zero = [ParetoPoint(1.0, 1.0, 0.0, 1.0, 0.0, 0.0)]
    assert math.isnan(normalized_comparison(d2d, zero)[0].co2_ratio)


def test_cumulative_series():
    sl = make_slice(48, price=30.0)
    h2, rev = cumulative_series(report_of({}, sl))
    assert np.all(h2 == 0) and np.all(rev == 0)
    full = report_of({"g4": np.ones(48), "g5i": np.ones(48), "gH2": 0.6 * np.ones(48), "m": 18 * np.ones(48)}, sl)
    h2, rev = cumulative_series(full)
    np.testing.assert_allclose(h2, [432.0, 864.0])
    np.testing.assert_allclose(rev, [-720.0, -1440.0])
    exp = report_of({"g2": np.full(48, 0.5), "g5e": np.full(48, 0.5)}, make_slice(48, cf_wind=0.5, price=30.0))
    assert np.all(np.diff(cumulative_series(exp)[1]) >= 0)


def test_sweep_single_point_and_order(tmp_path):
    sc = synthetic_scenario(7, seed=9)
    plant = PlantConfig()
    c = DeliveryContract.standard("day")
    pts = pareto_sweep(sc, plant, c, [1.0, 0.0], "benchmark")
    assert [p.alpha for p in pts] == [0.0, 1.0]
    assert pts[1].specific_co2 <= pts[0].specific_co2
    one = pareto_sweep(sc, plant, c, [0.5], "benchmark")[0]
    direct = run_benchmark(sc, plant, c, 0.5)
    assert one.co2_kg == direct.costs.co2_kg and one.total_h2_kg == direct.total_h2_kg
    write_pareto_csv(pts, tmp_path / "pareto.csv")
    assert len((tmp_path / "pareto.csv").read_text().splitlines()) == 3
