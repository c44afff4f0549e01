"""Long-term shrinking-window planner, daily mass filter and 34-hour daily planner.

Every day the long-term planner asks how much hydrogen tomorrow should produce
so that the rest of the delivery period is covered at least weighted cost.
Its window runs from tomorrow to the end of the period: real forecasts for
the first 34 hours, recent history standing in for everything beyond. The
answer is clamped to what the electrolyser can ramp to, then the daily planner
turns it into an hourly schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .dispatch import DailySum, DispatchResult, PlantConfig, WindowTotal, build_dispatch, dispatch, extract_flows
from .errors import InsufficientHistory, PlanningError, WindowInfeasible
from .lp import LpProblem, Sense, Status, solve
from .timeseries import FORECAST_HORIZON, HOURS_PER_DAY, ScenarioData, ScenarioSlice, build_planning_window, window

PERIOD_KINDS = ("day", "week", "month", "year")
LOOKAHEAD_HOURS = FORECAST_HORIZON - HOURS_PER_DAY


@dataclass(frozen=True)
class ContractState:
    """Progress through the current delivery period, as seen when planning the
    day that starts at ``next_day_start``."""

    period_kind: str
    period_target_kg: float
    produced_so_far_kg: float
    remaining_hours_in_period: int
    day_index_in_period: int
    next_day_start: int = 0  # scenario hour of the day being planned

    def __post_init__(self):
        if self.period_kind not in PERIOD_KINDS:
            raise ValueError(f"unknown period kind {self.period_kind!r}")
        if self.produced_so_far_kg < 0 or self.period_target_kg < 0:
            raise ValueError("masses must be non-negative")
        if self.remaining_hours_in_period < 0 or self.remaining_hours_in_period % HOURS_PER_DAY:
            raise ValueError("remaining_hours_in_period must be a non-negative multiple of 24")

    @property
    def remaining_target_kg(self) -> float:
        return max(0.0, self.period_target_kg - self.produced_so_far_kg)

    def after_day(self, produced_kg: float) -> "ContractState":
        return replace(self, produced_so_far_kg=self.produced_so_far_kg + float(produced_kg),
                       remaining_hours_in_period=self.remaining_hours_in_period - HOURS_PER_DAY,
                       day_index_in_period=self.day_index_in_period + 1,
                       next_day_start=self.next_day_start + HOURS_PER_DAY)


@dataclass(frozen=True, eq=False)
class DailyPlan:
    committed: np.ndarray  # kg per hour, next day
    advisory: np.ndarray  # kg per hour, following morning
    f4_end: float
    f4_init: float
    M_hat: float
    extra_mass: float
    expected: DispatchResult  # planner's flows for the committed day

    @property
    def committed_total(self) -> float:
        return float(self.committed.sum())


# --- ramp-only auxiliary problems -----------------------------------------------------

def _ramp_problem(plant: PlantConfig, f4_init: float, T: int) -> tuple[LpProblem, np.ndarray]:
    """Electrolyser levels over ``T`` hours under ramp limits only."""
    p = LpProblem("ramp")
    g4 = p.add_variables(T, 0.0, plant.G4, "g4")
    start = f4_init * plant.G4
    p.add_constraint([(g4[0], 1.0)], Sense.LE, start + plant.ramp_up)
    p.add_constraint([(g4[0], 1.0)], Sense.GE, start - plant.ramp_down)
    if T > 1:
        pairs = np.column_stack([g4[1:], g4[:-1]])
        p.add_rows(pairs, [1.0, -1.0], Sense.LE, plant.ramp_up)
        p.add_rows(pairs, [-1.0, 1.0], Sense.LE, plant.ramp_down)
    return p, g4


def _extreme_energy(p: LpProblem, ids: np.ndarray, sign: float) -> float:
    p.set_objective((ids, np.full(len(ids), sign)))
    sol = solve(p)
    if sol.status is not Status.OPTIMAL:
        raise PlanningError(f"ramp-only auxiliary problem is {sol.status.value}")
    return float(sol.values[ids].sum())


@lru_cache(maxsize=4096)
def _daily_bounds(plant: PlantConfig, f4_init: float, hours: int) -> tuple[float, float]:
    p, g4 = _ramp_problem(plant, f4_init, hours)
    kg = plant.kg_per_mwh_input * plant.delta_t
    lo = _extreme_energy(p, g4, 1.0) * kg
    hi = _extreme_energy(p, g4, -1.0) * kg
    return max(lo, 0.0), hi


def feasible_daily_mass_bounds(plant: PlantConfig, f4_init: float, hours: int = HOURS_PER_DAY) -> tuple[float, float]:
    """(min, max) kg producible over the next ``hours`` from level ``f4_init``,
    assuming enough grid or renewable power is always available."""
    if not 0.0 <= f4_init <= 1.0:
        raise ValueError(f"f4_init={f4_init} outside [0, 1]")
    return _daily_bounds(plant, float(f4_init), int(hours))


@lru_cache(maxsize=4096)
def _lookahead_bounds(plant: PlantConfig, f4_init: float, day_mass: float, extra_hours: int,
                      f4_end_min: float) -> tuple[float, float]:
    T = HOURS_PER_DAY + extra_hours
    p, g4 = _ramp_problem(plant, f4_init, T)
    kg = plant.kg_per_mwh_input * plant.delta_t
    p.add_constraint([(j, kg) for j in g4[:HOURS_PER_DAY]], Sense.EQ, day_mass)
    if f4_end_min > 0:
        p.set_bounds(g4[HOURS_PER_DAY - 1], f4_end_min * plant.G4, plant.G4)
    tail = g4[HOURS_PER_DAY:]
    lo = _extreme_energy(p, tail, 1.0) * kg
    hi = _extreme_energy(p, tail, -1.0) * kg
    return max(lo, 0.0), hi


def lookahead_mass_bounds(plant: PlantConfig, f4_init: float, day_mass: float,
                          extra_hours: int = LOOKAHEAD_HOURS, f4_end_min: float = 0.0) -> tuple[float, float]:
    """Range of mass over the hours after the committed day, given that the
    day itself produces ``day_mass`` and ends at level ``f4_end_min`` or above."""
    return _lookahead_bounds(plant, float(f4_init), float(day_mass), int(extra_hours), float(f4_end_min))


def max_mass_from(plant: PlantConfig, f4: float, hours: int) -> float:
    """Most kg producible in ``hours`` starting from level ``f4`` (ramp-up limited)."""
    r = plant.ramp_up / plant.G4
    levels = np.minimum(1.0, f4 + r * np.arange(1, int(hours) + 1))
    return float(levels.sum() * plant.G4 * plant.kg_per_mwh_input * plant.delta_t)


def min_end_level(plant: PlantConfig, remaining_kg: float, hours: int) -> float:
    """Lowest electrolyser level from which ``remaining_kg`` can still be made in
    ``hours``; 1.0 when even full load at the start falls short."""
    if hours <= 0 or remaining_kg <= max_mass_from(plant, 0.0, hours):
        return 0.0
    if remaining_kg >= max_mass_from(plant, 1.0, hours):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if max_mass_from(plant, mid, hours) >= remaining_kg:
            hi = mid
        else:
            lo = mid
    return hi


def filter_mass(M_star: float, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    if lo > hi:
        raise ValueError(f"empty mass range [{lo}, {hi}]")
    return float(min(max(M_star, lo), hi))


# --- long-term planner -----------------------------------------------------------------

def planning_window(scenario: ScenarioData, state: ContractState,
                    forecast_horizon: int = FORECAST_HORIZON) -> tuple[ScenarioSlice, float]:
    """Window for the long-term planner and the mass it must deliver.

    The last two days of a period are covered by actual data. Early in the
    dataset, where the history block would reach before hour 0, the window is
    cut to the days that exist and the target is scaled by the kept fraction.
    """
    R = state.remaining_hours_in_period
    nds = state.next_day_start
    target = state.remaining_target_kg
    if R <= 2 * HOURS_PER_DAY:
        return window(scenario, nds, R), target
    try:
        return build_planning_window(scenario, nds, R, forecast_horizon), target
    except InsufficientHistory:
        sl = build_planning_window(scenario, nds, R, forecast_horizon, allow_partial_history=True)
        return sl, target * sl.n_hours / R


def long_term_mass(scenario: ScenarioData, state: ContractState, plant: PlantConfig, alpha: float,
                   f4_init: float, forecast_horizon: int = FORECAST_HORIZON, backend: str | None = None) -> float:
    """Mass (kg) the next day should produce, before filtering."""
    if state.remaining_hours_in_period < HOURS_PER_DAY:
        raise ValueError("no day left in the period")
    if state.period_kind == "day" or state.remaining_hours_in_period == HOURS_PER_DAY:
        return state.remaining_target_kg
    sl, target = planning_window(scenario, state, forecast_horizon)
    sol, res = dispatch(sl, plant, f4_init, alpha, WindowTotal(target, "="), backend)
    if res is None:
        raise WindowInfeasible(
            f"{target:.6g} kg cannot be produced in the {sl.n_hours} h window from hour {state.next_day_start} "
            f"({sol.status.value})")
    return float(res.m[:HOURS_PER_DAY].sum())


# --- daily planner ---------------------------------------------------------------------

def daily_plan(slice34: ScenarioSlice, plant: PlantConfig, f4_init: float, alpha: float, M_hat: float,
               state: ContractState | None = None, backend: str | None = None) -> DailyPlan:
    """Hourly schedule for the next day plus an advisory tail.

    The tail carries the daily rate ``M_hat / 24`` per hour, kept inside the
    range the ramp limits allow after the committed day. With ``state`` given,
    the day also ends high enough for the rest of the period to stay reachable.
    """
    T = slice34.n_hours
    if not HOURS_PER_DAY <= T <= FORECAST_HORIZON:
        raise ValueError(f"daily planner needs {HOURS_PER_DAY}..{FORECAST_HORIZON} hours, got {T}")
    f4_end_min = 0.0
    if state is not None:
        rest_hours = state.remaining_hours_in_period - HOURS_PER_DAY
        f4_end_min = min_end_level(plant, state.remaining_target_kg - M_hat, rest_hours)
        # never ask for more than the day can reach
        f4_end_min = min(f4_end_min, f4_init + HOURS_PER_DAY * plant.ramp_up / plant.G4, 1.0)
    extra_hours = T - HOURS_PER_DAY
    extra = 0.0
    if extra_hours:
        lo, hi = lookahead_mass_bounds(plant, f4_init, M_hat, extra_hours, f4_end_min)
        extra = filter_mass(M_hat * extra_hours / HOURS_PER_DAY, (lo, max(hi, lo)))
    problem, vmap = build_dispatch(slice34, plant, f4_init, alpha, DailySum(float(M_hat), extra, HOURS_PER_DAY))
    if f4_end_min > 0:
        problem.set_bounds(vmap["g4"][HOURS_PER_DAY - 1], f4_end_min * plant.G4, plant.G4)
    sol = solve(problem, backend)
    if sol.status is not Status.OPTIMAL:
        raise PlanningError(f"daily plan for {M_hat:.6g} kg is {sol.status.value} after filtering")
    res = extract_flows(sol, vmap, slice34, plant)
    f4_end = float(min(max(res.g4[HOURS_PER_DAY - 1] / plant.G4, 0.0), 1.0))
    return DailyPlan(committed=res.m[:HOURS_PER_DAY], advisory=res.m[HOURS_PER_DAY:], f4_end=f4_end,
                     f4_init=float(f4_init), M_hat=float(M_hat), extra_mass=extra,
                     expected=res.head(HOURS_PER_DAY))
