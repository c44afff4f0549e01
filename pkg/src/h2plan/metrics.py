"""Headline metrics, Pareto sweeps, green-hydrogen accounting and cumulative diagnostics."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dispatch import PlantConfig
from .errors import MismatchedAlphas, ZeroProduction
from .simulator import (
    DeliveryContract,
    SimulationReport,
    run_benchmark,
    run_day_to_day,
    run_trading_only,
    write_rows,
)
from .timeseries import HOURS_PER_DAY, ScenarioData, ScenarioSlice

MODES = ("benchmark", "day2day")


def _require_h2(report: SimulationReport) -> float:
    h2 = report.total_h2_kg
    if not h2 > 0:
        raise ZeroProduction("no hydrogen produced")
    return h2


def levelised_cost(report: SimulationReport, trading_profit: float, plant: PlantConfig | None = None) -> float:
    """EUR/kg: electrolyser capital, operation, net electricity and forgone trading profit.

    ``C_e`` already credits exports, so only the counterfactual profit is added.
    """
    h2 = _require_h2(report)
    c = report.costs
    capital = c.C_c
    if plant is not None and plant != report.plant:
        capital = plant.annualised_capex() * plant.G4 * report.n_hours * plant.delta_t / 8760.0
    return (capital + c.C_o + c.C_e + float(trading_profit)) / h2


def specific_emissions(report: SimulationReport) -> float:
    """kg CO2 per kg H2."""
    return report.costs.co2_kg / _require_h2(report)


# --- green hydrogen --------------------------------------------------------------------

@dataclass(frozen=True)
class GreenRules:
    price_threshold: float = 20.0  # EUR/MWh
    intensity_threshold: float = 64.8  # kg/MWh
    re_share_threshold: float = 0.90
    hourly_intensity_mode: bool = False
    grid_re_share: float | None = None  # annual renewable share of the grid, when known

    def __post_init__(self):
        if min(self.price_threshold, self.intensity_threshold, self.re_share_threshold) < 0:
            raise ValueError("thresholds must be non-negative")


@dataclass(frozen=True)
class GreenBreakdown:
    """Partition of the produced hydrogen; the five masses add up to ``total_h2_kg``.

    Grid-powered hydrogen is first tested against the price rule. What fails it
    is tested against the hourly intensity rule (hourly mode) or the annual
    rules (otherwise); the remainder is non-green.
    """

    h2_onsite_green_kg: float
    h2_grid_green_kg: float
    h2_grid_green_hourly_kg: float
    h2_grid_green_annual_kg: float
    h2_nongreen_kg: float
    specific_co2_nongreen: float  # NaN when nothing is non-green
    total_h2_kg: float

    @property
    def green_kg(self) -> float:
        return self.total_h2_kg - self.h2_nongreen_kg

    @property
    def green_share(self) -> float:
        return self.green_kg / self.total_h2_kg if self.total_h2_kg > 0 else math.nan


@dataclass(frozen=True, eq=False)
class HourlyAttribution:
    onsite_kg: np.ndarray
    grid_kg: np.ndarray
    grid_co2_kg: np.ndarray  # emissions of the import feeding the electrolyser
    price_green: np.ndarray
    hourly_green: np.ndarray


def attribute_hours(report: SimulationReport, data: ScenarioSlice | ScenarioData | None = None,
                    rules: GreenRules = GreenRules()) -> HourlyAttribution:
    data = report.data if data is None else data
    r = report.result
    if data is None or data.n_hours != r.n_hours:
        raise ValueError("report and scenario hours do not align")
    g5i_used = np.minimum(r.g5i, r.g4)
    with np.errstate(invalid="ignore", divide="ignore"):
        grid_share = np.where(r.g4 > 0, g5i_used / np.where(r.g4 > 0, r.g4, 1.0), 0.0)
    grid_kg = r.m * grid_share
    return HourlyAttribution(
        onsite_kg=r.m - grid_kg,
        grid_kg=grid_kg,
        grid_co2_kg=g5i_used * report.plant.delta_t * np.asarray(data.co2_intensity),
        price_green=np.asarray(data.price) < rules.price_threshold,
        hourly_green=np.asarray(data.co2_intensity) < rules.intensity_threshold,
    )


def classify_green(report: SimulationReport, scenario: ScenarioSlice | ScenarioData | None = None,
                   rules: GreenRules = GreenRules()) -> GreenBreakdown:
    data = report.data if scenario is None else scenario
    h = attribute_hours(report, data, rules)
    rest = ~h.price_green
    if rules.hourly_intensity_mode:
        hourly = rest & h.hourly_green
        annual_ok = False
    else:
        hourly = np.zeros_like(rest)
        annual_ok = bool(np.mean(data.co2_intensity) < rules.intensity_threshold
                         or (rules.grid_re_share is not None and rules.grid_re_share > rules.re_share_threshold))
    nongreen = rest & ~hourly & (not annual_ok)
    annual = rest & ~hourly & annual_ok
    ng_kg = float(h.grid_kg[nongreen].sum())
    ng_co2 = float(h.grid_co2_kg[nongreen].sum())
    return GreenBreakdown(
        h2_onsite_green_kg=float(h.onsite_kg.sum()),
        h2_grid_green_kg=float(h.grid_kg[h.price_green].sum()),
        h2_grid_green_hourly_kg=float(h.grid_kg[hourly].sum()),
        h2_grid_green_annual_kg=float(h.grid_kg[annual].sum()),
        h2_nongreen_kg=ng_kg,
        specific_co2_nongreen=ng_co2 / ng_kg if ng_kg > 0 else math.nan,
        total_h2_kg=report.total_h2_kg,
    )


# --- Pareto sweep ---------------------------------------------------------------------

@dataclass(frozen=True)
class ParetoPoint:
    alpha: float
    lcoh: float  # EUR/kg
    specific_co2: float  # kg/kg
    total_h2_kg: float
    C_e: float
    co2_kg: float
    C_o: float = 0.0
    C_alpha: float = 0.0


def pareto_point(report: SimulationReport, trading_profit: float) -> ParetoPoint:
    c = report.costs
    h2 = report.total_h2_kg
    lcoh = levelised_cost(report, trading_profit) if h2 > 0 else math.nan
    sco2 = specific_emissions(report) if h2 > 0 else math.nan
    return ParetoPoint(report.alpha, lcoh, sco2, h2, c.C_e, c.co2_kg, c.C_o, c.C_alpha)


def run_mode(mode: str, scenario: ScenarioData, plant: PlantConfig, contract: DeliveryContract, alpha: float,
             backend: str | None = None) -> SimulationReport:
    if mode == "benchmark":
        return run_benchmark(scenario, plant, contract, alpha, backend)
    if mode in ("day2day", "day-to-day"):
        return run_day_to_day(scenario, plant, contract, alpha, backend)
    raise ValueError(f"unknown mode {mode!r}")


def _run_one(args):
    return run_mode(*args)


def sweep_workers() -> int:
    try:
        return max(1, int(os.environ.get("H2PLAN_THREADS", "1")))
    except ValueError:
        return 1


def sweep_reports(scenario: ScenarioData, plant: PlantConfig, contract: DeliveryContract, alphas, mode: str,
                  backend: str | None = None, workers: int | None = None) -> tuple[float, list[SimulationReport]]:
    """Trading-only profit and one report per alpha, in ascending alpha order."""
    alphas = sorted(float(a) for a in alphas)
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValueError("alphas must lie in [0, 1]")
    if mode not in MODES and mode != "day-to-day":
        raise ValueError(f"unknown mode {mode!r}")
    profit = run_trading_only(scenario, plant, backend)
    jobs = [(mode, scenario, plant, contract, a, backend) for a in alphas]
    workers = sweep_workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            reports = list(ex.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    return profit, reports


def pareto_sweep(scenario: ScenarioData, plant: PlantConfig, contract: DeliveryContract, alphas, mode: str,
                 backend: str | None = None, workers: int | None = None) -> list[ParetoPoint]:
    profit, reports = sweep_reports(scenario, plant, contract, alphas, mode, backend, workers)
    return [pareto_point(r, profit) for r in reports]


@dataclass(frozen=True)
class Comparison:
    alpha: float
    lcoh_ratio: float  # NaN when undefined
    co2_ratio: float


def _ratio(a: float, b: float) -> float:
    if b == 0 or not math.isfinite(a) or not math.isfinite(b):
        return 1.0 if a == b and math.isfinite(a) else math.nan
    return a / b


def normalized_comparison(day2day: list[ParetoPoint], benchmark: list[ParetoPoint]) -> list[Comparison]:
    """Day-to-day over benchmark, per alpha."""
    d = {p.alpha: p for p in day2day}
    b = {p.alpha: p for p in benchmark}
    if len(d) != len(day2day) or len(b) != len(benchmark) or set(d) != set(b):
        missing = sorted(set(d) ^ set(b))
        raise MismatchedAlphas(f"alphas differ between the two sweeps: {missing}")
    return [Comparison(a, _ratio(d[a].lcoh, b[a].lcoh), _ratio(d[a].specific_co2, b[a].specific_co2))
            for a in sorted(d)]


def cumulative_series(report: SimulationReport, data: ScenarioSlice | ScenarioData | None = None):
    """Daily prefix sums of hydrogen (kg) and net electricity revenue (EUR)."""
    data = report.data if data is None else data
    r = report.result
    revenue = -report.plant.delta_t * (r.g5i - r.g5e) * np.asarray(data.price)
    n_days = -(-r.n_hours // HOURS_PER_DAY)
    pad = n_days * HOURS_PER_DAY - r.n_hours
    daily_h2 = np.pad(r.m, (0, pad)).reshape(n_days, HOURS_PER_DAY).sum(axis=1)
    daily_rev = np.pad(revenue, (0, pad)).reshape(n_days, HOURS_PER_DAY).sum(axis=1)
    return np.cumsum(daily_h2), np.cumsum(daily_rev)


# --- CSV output ---------------------------------------------------------------------------

def write_pareto_csv(points: list[ParetoPoint], path) -> None:
    write_rows(path, ["alpha", "lcoh", "specific_co2", "total_h2_kg", "C_e", "C_o", "co2_kg", "C_alpha"],
               [[p.alpha, p.lcoh, p.specific_co2, p.total_h2_kg, p.C_e, p.C_o, p.co2_kg, p.C_alpha] for p in points])


def write_comparison_csv(rows: list[Comparison], path) -> None:
    write_rows(path, ["alpha", "lcoh_ratio", "co2_ratio"], [[c.alpha, c.lcoh_ratio, c.co2_ratio] for c in rows])


def write_green_csv(breakdowns: list[tuple[float, GreenBreakdown]], path) -> None:
    write_rows(path, ["alpha", "total_h2_kg", "onsite_green_kg", "grid_green_price_kg", "grid_green_hourly_kg",
                      "grid_green_annual_kg", "nongreen_kg", "specific_co2_nongreen"],
               [[a, g.total_h2_kg, g.h2_onsite_green_kg, g.h2_grid_green_kg, g.h2_grid_green_hourly_kg,
                 g.h2_grid_green_annual_kg, g.h2_nongreen_kg, g.specific_co2_nongreen] for a, g in breakdowns])


def write_cumulative_csv(report: SimulationReport, path) -> None:
    h2, rev = cumulative_series(report)
    write_rows(path, ["day", "cumulative_h2_kg", "cumulative_net_revenue_eur"],
               [[d, h2[d], rev[d]] for d in range(len(h2))])


def write_scatter_csv(report: SimulationReport, path, rules: GreenRules = GreenRules()) -> None:
    """Hours that produced hydrogen, with price, intensity and grid-attributed mass."""
    data = report.data
    h = attribute_hours(report, data, rules)
    rows = []
    for t in np.flatnonzero(report.result.m > 0):
        green_grid = bool(h.price_green[t] or (rules.hourly_intensity_mode and h.hourly_green[t]))
        rows.append([int(t), data.price[t], data.co2_intensity[t], report.result.m[t], h.grid_kg[t],
                     h.grid_kg[t] == 0 or green_grid])
    write_rows(path, ["hour", "price", "co2_intensity", "h2_kg", "grid_h2_kg", "green"], rows)
