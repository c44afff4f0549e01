"""Day-to-day control loop, full-foresight benchmark and trading-only counterfactual."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .dispatch import (
    FLOWS,
    CostBreakdown,
    DispatchResult,
    PlantConfig,
    cost_components,
    dispatch,
    period_targets,
    plan_follow,
)
from .errors import BenchmarkInfeasible, ContractBreach, ContractConfigError, PlanInfeasible, WindowInfeasible
from .planner import (
    PERIOD_KINDS,
    ContractState,
    DailyPlan,
    daily_plan,
    feasible_daily_mass_bounds,
    filter_mass,
    long_term_mass,
)
from .timeseries import FORECAST_HORIZON, HOURS_PER_DAY, ScenarioData, ScenarioSlice, window

# kg per delivery period for a 1 MW electrolyser at 6000 full-load hours a year
STANDARD_TARGETS_KG_PER_MW = {"day": 296.0, "week": 2071.0, "month": 8877.0, "year": 108_000.0}
MET_TOL_KG = 1e-3


def _add_months(t: datetime, k: int) -> datetime:
    y, m = divmod(t.month - 1 + k, 12)
    return t.replace(year=t.year + y, month=m + 1)


@dataclass(frozen=True)
class DeliveryContract:
    """Deliver ``target_kg`` by the end of every period.

    Days and weeks are 24 h and 168 h blocks from the scenario start; months
    and years follow the calendar, so the scenario must start on the first of
    a month (or on 1 January) at midnight UTC. A horizon that leaves a partial
    period at the end is rejected.
    """

    kind: str
    target_kg: float

    def __post_init__(self):
        if self.kind not in PERIOD_KINDS:
            raise ContractConfigError(f"unknown delivery period {self.kind!r}; choose from {', '.join(PERIOD_KINDS)}")
        if not self.target_kg >= 0:
            raise ContractConfigError("delivery target must be non-negative")

    @classmethod
    def standard(cls, kind: str, G4: float = 1.0) -> "DeliveryContract":
        if kind not in STANDARD_TARGETS_KG_PER_MW:
            raise ContractConfigError(f"unknown delivery period {kind!r}")
        return cls(kind, STANDARD_TARGETS_KG_PER_MW[kind] * G4)

    def periods(self, scenario: ScenarioData) -> list[tuple[int, int]]:
        n = scenario.n_hours
        st = scenario.start_time
        if st.hour:
            raise ContractConfigError("scenario must start at midnight for delivery periods to align with days")
        if n % HOURS_PER_DAY:
            raise ContractConfigError(f"scenario of {n} h does not cover whole days")
        if self.kind in ("day", "week"):
            step = HOURS_PER_DAY if self.kind == "day" else 7 * HOURS_PER_DAY
            if n % step:
                raise ContractConfigError(f"{n} h is not a whole number of {self.kind}s ({step} h)")
            return [(a, a + step) for a in range(0, n, step)]
        if st.day != 1 or (self.kind == "year" and st.month != 1):
            raise ContractConfigError(f"{self.kind}ly delivery needs a scenario starting at a {self.kind} boundary")
        months = 1 if self.kind == "month" else 12
        out, a, k = [], 0, 0
        while a < n:
            k += months
            b = int((_add_months(st, k) - st).total_seconds() // 3600)
            if b > n:
                raise ContractConfigError(f"scenario ends inside a {self.kind} (hour {n}, period ends at {b})")
            out.append((a, b))
            a = b
        return out


@dataclass(frozen=True)
class PeriodRecord:
    start_hour: int
    stop_hour: int
    target_kg: float
    produced_kg: float
    met: bool


@dataclass(frozen=True)
class DayRecord:
    day: int
    M_star: float  # long-term planner request
    M_hat: float  # after the feasibility filter
    produced_kg: float
    f4_init: float
    f4_end: float


@dataclass(frozen=True, eq=False)
class SimulationReport:
    mode: str
    alpha: float
    contract: DeliveryContract | None
    plant: PlantConfig
    result: DispatchResult
    costs: CostBreakdown
    periods: tuple = ()
    days: tuple = ()
    start_time: datetime | None = None
    data: ScenarioSlice | None = None  # hourly inputs the run saw
    meta: dict = field(default_factory=dict)

    @property
    def total_h2_kg(self) -> float:
        return self.result.total_h2_kg

    @property
    def f4(self) -> np.ndarray:
        return self.result.f4

    @property
    def n_hours(self) -> int:
        return self.result.n_hours

    @property
    def all_met(self) -> bool:
        return all(p.met for p in self.periods)

    @property
    def config_hash(self) -> str:
        return self.plant.digest()


def _period_records(result: DispatchResult, contract: DeliveryContract, periods, tol: float) -> tuple:
    recs = []
    for a, b in periods:
        produced = float(result.m[a:b].sum())
        recs.append(PeriodRecord(a, b, contract.target_kg, produced, produced >= contract.target_kg - tol))
    return tuple(recs)


def execute_day(plan: DailyPlan, actual_slice: ScenarioSlice, plant: PlantConfig, f4_init: float,
                alpha: float = 0.0, backend: str | None = None) -> DispatchResult:
    """Run the plant for one day so that every hour delivers its committed mass."""
    sl = actual_slice
    if sl.n_hours != len(plan.committed):
        raise ValueError(f"plan covers {len(plan.committed)} h, slice has {sl.n_hours}")
    sol, res = dispatch(sl, plant, f4_init, alpha, plan_follow(plan.committed), backend)
    if res is None:
        raise PlanInfeasible(f"committed plan cannot be executed ({sol.status.value})")
    return res


def run_day_to_day(scenario: ScenarioData, plant: PlantConfig, contract: DeliveryContract, alpha: float,
                   backend: str | None = None, forecast_horizon: int = FORECAST_HORIZON,
                   met_tol: float = MET_TOL_KG) -> SimulationReport:
    """Plan and execute one day at a time; the plant starts cold."""
    periods = contract.periods(scenario)
    f4 = 0.0
    parts, days = [], []
    for a, b in periods:
        state = ContractState(contract.kind, contract.target_kg, 0.0, b - a, 0, a)
        while state.remaining_hours_in_period:
            nds = state.next_day_start
            day = nds // HOURS_PER_DAY
            try:
                M_star = long_term_mass(scenario, state, plant, alpha, f4, forecast_horizon, backend)
            except WindowInfeasible as exc:
                raise ContractBreach(str(exc), day=day) from exc
            M_hat = filter_mass(M_star, feasible_daily_mass_bounds(plant, f4))
            T = min(forecast_horizon, scenario.n_hours - nds)
            plan = daily_plan(window(scenario, nds, T), plant, f4, alpha, M_hat, state, backend)
            res = execute_day(plan, window(scenario, nds, HOURS_PER_DAY), plant, f4, alpha, backend)
            f4_end = float(min(max(res.g4[-1] / plant.G4, 0.0), 1.0))
            days.append(DayRecord(day, M_star, M_hat, res.total_h2_kg, f4, f4_end))
            parts.append(res)
            f4 = f4_end
            state = state.after_day(res.total_h2_kg)
    result = DispatchResult.concat(parts)
    costs = cost_components(result, scenario.as_slice(), plant, alpha)
    return SimulationReport("day2day", float(alpha), contract, plant, result, costs,
                            _period_records(result, contract, periods, met_tol), tuple(days), scenario.start_time,
                            scenario.as_slice(), {"forecast_horizon": forecast_horizon})


def run_benchmark(scenario: ScenarioData, plant: PlantConfig, contract: DeliveryContract, alpha: float,
                  backend: str | None = None, met_tol: float = MET_TOL_KG) -> SimulationReport:
    """One LP over the whole horizon with a minimum mass per delivery period."""
    periods = contract.periods(scenario)
    spec = period_targets([(a, b, contract.target_kg) for a, b in periods])
    sl = scenario.as_slice()
    sol, result = dispatch(sl, plant, 0.0, alpha, spec, backend)
    if result is None:
        raise BenchmarkInfeasible(f"benchmark LP is {sol.status.value}: delivery targets exceed plant capability")
    costs = cost_components(result, sl, plant, alpha)
    return SimulationReport("benchmark", float(alpha), contract, plant, result, costs,
                            _period_records(result, contract, periods, met_tol), (), scenario.start_time, sl)


def trading_only_dispatch(scenario: ScenarioData, plant: PlantConfig, backend: str | None = None) -> SimulationReport:
    """Electrolyser idle, renewables sold to the grid at least cost."""
    sl = scenario.as_slice()
    sol, result = dispatch(sl, plant, 0.0, 0.0, plan_follow(np.zeros(sl.n_hours)), backend)
    if result is None:  # cannot happen: the all-zero electrolyser plan is always feasible
        raise PlanInfeasible(f"trading-only LP is {sol.status.value}")
    return SimulationReport("trading-only", 0.0, None, plant, result, cost_components(result, sl, plant, 0.0),
                            (), (), scenario.start_time, sl)


def run_trading_only(scenario: ScenarioData, plant: PlantConfig, backend: str | None = None) -> float:
    """Profit (EUR) of selling renewables only; the opportunity cost of making hydrogen."""
    return -trading_only_dispatch(scenario, plant, backend).costs.C_e


# --- CSV output --------------------------------------------------------------------------

def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_rows(path, header, rows) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([x if isinstance(x, str) else _num(x) for x in r])


def write_hourly_csv(report: SimulationReport, scenario: ScenarioData, path) -> None:
    r = report.result
    dt = report.plant.delta_t
    header = ["hour", "timestamp", *FLOWS, "f4", "price", "co2_intensity", "imports_mwh", "exports_mwh", "co2_kg"]
    rows = []
    for t in range(r.n_hours):
        rows.append([t, scenario.timestamp(t).strftime("%Y-%m-%dT%H:%M:%SZ"),
                     *(getattr(r, k)[t] for k in FLOWS), r.f4[t], scenario.price[t], scenario.co2_intensity[t],
                     r.g5i[t] * dt, r.g5e[t] * dt, r.g5i[t] * dt * scenario.co2_intensity[t]])
    write_rows(path, header, rows)


def write_periods_csv(report: SimulationReport, path) -> None:
    write_rows(path, ["period", "start_hour", "stop_hour", "target_kg", "produced_kg", "met"],
               [[i, p.start_hour, p.stop_hour, p.target_kg, p.produced_kg, p.met] for i, p in enumerate(report.periods)])


def write_days_csv(report: SimulationReport, path) -> None:
    write_rows(path, ["day", "M_star", "M_hat", "produced_kg", "f4_init", "f4_end"],
               [[d.day, d.M_star, d.M_hat, d.produced_kg, d.f4_init, d.f4_end] for d in report.days])
