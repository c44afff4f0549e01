"""Hourly dispatch LP of the hybrid PV/wind/electrolyser plant.

Power flows per hour ``t`` (MW)::

    solar --g1--> DC bus --g3dc--> inverter --g3ac--> AC bus <--g2-- wind
                                                       |  ^
                                          g4 (electrolyser)  g5i / g5e (grid import / export)

Hydrogen power ``gH2 = eta_lhv * g4`` and mass ``m = 3600 * gH2 * dt / LHV``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Sequence, Union

import numpy as np

from .errors import InternalConsistency, InvalidMassSpec, NotOptimal
from .lp import LpProblem, LpSolution, Sense, Status, solve
from .timeseries import ScenarioSlice

HOURS_PER_YEAR = 8760.0
FLOWS = ("g1", "g1c", "g2", "g2c", "g3dc", "g3ac", "g4", "gH2", "g5i", "g5e", "m")


@dataclass(frozen=True)
class PlantConfig:
    """Capacities (MW), efficiencies, ramp rates (fraction of G4 per hour) and costs.

    Defaults reproduce the 1 MW reference plant. ``discount_rate``, ``c_fixed``,
    the operation costs and ``c_co2`` are not given by the reference case and
    carry neutral choices; override them for real studies.
    """

    G1: float = 1.0  # solar
    G2: float = 1.0  # wind
    G3: float = 1.0  # inverter (AC output)
    G4: float = 1.0  # electrolyser
    G5: float = 1.0  # grid connection
    eta_inverter: float = 0.9
    eta_lhv: float = 0.6
    lhv_h2: float = 120.0  # MJ/kg
    rru: float = 1.0
    rruc: float = 0.5
    rrd: float = 1.0
    c_e_capacity: float = 700_000.0  # EUR/MW electrolyser investment
    c_fixed: float = 0.0  # EUR/MW/yr
    lifetime_years: float = 10.0
    discount_rate: float = 0.07
    c_op_solar: float = 0.0  # EUR/MWh
    c_op_wind: float = 0.0
    c_op_inverter: float = 0.0
    c_op_electrolyser: float = 0.0
    c_co2: float = 1.0  # EUR/kg
    delta_t: float = 1.0  # h

    def __post_init__(self):
        for name in ("G1", "G2", "G3", "G4", "G5"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.eta_inverter <= 1 or not 0 < self.eta_lhv <= 1:
            raise ValueError("efficiencies must lie in (0, 1]")
        for name in ("rru", "rruc", "rrd"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.lifetime_years < 1 or self.discount_rate < 0 or self.c_co2 < 0:
            raise ValueError("lifetime >= 1, discount_rate >= 0 and c_co2 >= 0 required")
        if not self.lhv_h2 > 0 or not self.delta_t > 0:
            raise ValueError("lhv_h2 and delta_t must be positive")

    @property
    def kg_per_mwh_h2(self) -> float:
        """kg of hydrogen per MWh of hydrogen power (30 at LHV 120 MJ/kg)."""
        return 3600.0 / self.lhv_h2

    @property
    def kg_per_mwh_input(self) -> float:
        """kg of hydrogen per MWh of electrolyser input (18 at 60 %)."""
        return self.kg_per_mwh_h2 * self.eta_lhv

    @property
    def max_hourly_mass(self) -> float:
        return self.G4 * self.kg_per_mwh_input * self.delta_t

    @property
    def ramp_up(self) -> float:
        """Binding up-ramp in MW/h: both warm and cold limits always apply."""
        return self.G4 * min(self.rru, self.rruc)

    @property
    def ramp_down(self) -> float:
        return self.G4 * self.rrd

    def annualised_capex(self) -> float:
        """EUR/MW/yr: fixed O&M plus the annuity of the investment."""
        d, L = self.discount_rate, self.lifetime_years
        annuity = self.c_e_capacity / L if d == 0 else self.c_e_capacity * d / (1.0 - (1.0 + d) ** (-L))
        return self.c_fixed + annuity

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


# --- hydrogen mass requirements ---------------------------------------------------

@dataclass(frozen=True)
class PlanFollow:
    """Hourly masses fixed to a committed plan (kg)."""
    masses: tuple


@dataclass(frozen=True)
class DailySum:
    """Mass over hours ``[0, day_hours)`` equals ``day_mass``; the following
    hours produce ``extra_mass`` (the look-ahead allocation)."""
    day_mass: float
    extra_mass: float = 0.0
    day_hours: int = 24


@dataclass(frozen=True)
class WindowTotal:
    total: float
    sense: str = "="


@dataclass(frozen=True)
class PeriodTargets:
    """One ``>=`` row per delivery period: ``(start_hour, stop_hour, mass)``."""
    periods: tuple


MassSpec = Union[PlanFollow, DailySum, WindowTotal, PeriodTargets]


def plan_follow(masses: Sequence[float]) -> PlanFollow:
    return PlanFollow(tuple(float(v) for v in masses))


def period_targets(periods) -> PeriodTargets:
    return PeriodTargets(tuple((int(a), int(b), float(m)) for a, b, m in periods))


@dataclass(frozen=True)
class VariableMap:
    """Column ids, one array of length ``n_hours`` per flow."""
    n_hours: int
    ids: dict

    def __getitem__(self, name: str) -> np.ndarray:
        return self.ids[name]


# --- model construction -----------------------------------------------------------

def _add_mass_rows(p: LpProblem, m: np.ndarray, spec: MassSpec, T: int) -> None:
    if isinstance(spec, PlanFollow):
        if len(spec.masses) != T:
            raise InvalidMassSpec(f"plan has {len(spec.masses)} hours, horizon has {T}")
        p.add_rows(m[:, None], 1.0, Sense.EQ, np.asarray(spec.masses, dtype=float))
    elif isinstance(spec, DailySum):
        h = int(spec.day_hours)
        if not 0 < h <= T:
            raise InvalidMassSpec(f"day_hours={h} outside horizon of {T} hours")
        p.add_constraint([(j, 1.0) for j in m[:h]], Sense.EQ, spec.day_mass)
        if h < T:
            p.add_constraint([(j, 1.0) for j in m[h:]], Sense.EQ, spec.extra_mass)
        elif spec.extra_mass:
            raise InvalidMassSpec("extra_mass given but the horizon has no look-ahead hours")
    elif isinstance(spec, WindowTotal):
        p.add_constraint([(j, 1.0) for j in m], Sense.parse(spec.sense), spec.total)
    elif isinstance(spec, PeriodTargets):
        for a, b, mass in spec.periods:
            if not 0 <= a < b <= T:
                raise InvalidMassSpec(f"period [{a}, {b}) outside horizon of {T} hours")
            p.add_constraint([(j, 1.0) for j in m[a:b]], Sense.GE, mass)
    elif spec is not None:
        raise InvalidMassSpec(f"unknown mass specification {spec!r}")


def objective_coefficients(slice_: ScenarioSlice, plant: PlantConfig, alpha: float) -> dict:
    """Per-hour objective coefficient of every flow that carries one."""
    dt = plant.delta_t
    w_cost = 1.0 - alpha
    return {
        "g5i": alpha * plant.c_co2 * dt * slice_.co2_intensity + w_cost * dt * slice_.price,
        "g5e": -w_cost * dt * slice_.price,
        "g1": w_cost * dt * plant.c_op_solar * np.ones(slice_.n_hours),
        "g2": w_cost * dt * plant.c_op_wind * np.ones(slice_.n_hours),
        "g3ac": w_cost * dt * plant.c_op_inverter * np.ones(slice_.n_hours),
        "g4": w_cost * dt * plant.c_op_electrolyser * np.ones(slice_.n_hours),
    }


def build_dispatch(slice_: ScenarioSlice, plant: PlantConfig, f4_init: float, alpha: float,
                   mass_spec: MassSpec | None) -> tuple[LpProblem, VariableMap]:
    """Encode the plant over ``slice_`` as an LP minimising the alpha-weighted cost."""
    T = slice_.n_hours
    if T < 1:
        raise ValueError("slice must contain at least one hour")
    if not 0.0 <= f4_init <= 1.0:
        raise ValueError(f"f4_init={f4_init} outside [0, 1]")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    p = LpProblem("dispatch")
    inf = math.inf
    dc_cap = plant.G3 / plant.eta_inverter
    v = {
        "g1": p.add_variables(T, 0.0, inf, "g1"),
        "g1c": p.add_variables(T, 0.0, inf, "g1c"),
        "g2": p.add_variables(T, 0.0, inf, "g2"),
        "g2c": p.add_variables(T, 0.0, inf, "g2c"),
        "g3dc": p.add_variables(T, 0.0, dc_cap, "g3dc"),
        "g3ac": p.add_variables(T, 0.0, inf, "g3ac"),
        "g4": p.add_variables(T, 0.0, plant.G4, "g4"),
        "gH2": p.add_variables(T, 0.0, inf, "gH2"),
        "g5i": p.add_variables(T, 0.0, plant.G5, "g5i"),
        "g5e": p.add_variables(T, 0.0, plant.G5, "g5e"),
        "m": p.add_variables(T, 0.0, inf, "m"),
    }
    pair = lambda a, b: np.column_stack([v[a], v[b]])
    # solar and wind output net of curtailment
    p.add_rows(pair("g1", "g1c"), [1.0, 1.0], Sense.EQ, plant.G1 * slice_.cf_solar)
    p.add_rows(pair("g2", "g2c"), [1.0, 1.0], Sense.EQ, plant.G2 * slice_.cf_wind)
    # DC bus and inverter
    p.add_rows(pair("g1", "g3dc"), [1.0, -1.0], Sense.EQ, 0.0)
    p.add_rows(pair("g3ac", "g3dc"), [1.0, -plant.eta_inverter], Sense.EQ, 0.0)
    # AC bus
    ac = np.column_stack([v["g2"], v["g3ac"], v["g4"], v["g5i"], v["g5e"]])
    p.add_rows(ac, [1.0, 1.0, -1.0, 1.0, -1.0], Sense.EQ, 0.0)
    # electrolyser and hydrogen mass
    p.add_rows(pair("gH2", "g4"), [1.0, -plant.eta_lhv], Sense.EQ, 0.0)
    p.add_rows(pair("m", "gH2"), [1.0, -plant.kg_per_mwh_h2 * plant.delta_t], Sense.EQ, 0.0)
    # ramping, hour 0 linked to the initial level; warm and cold up-limits both apply
    g4 = v["g4"]
    start = f4_init * plant.G4
    p.add_rows(g4[:1, None], 1.0, Sense.LE, start + plant.G4 * plant.rru)
    p.add_rows(g4[:1, None], 1.0, Sense.LE, start + plant.G4 * plant.rruc)
    p.add_rows(g4[:1, None], 1.0, Sense.GE, start - plant.G4 * plant.rrd)
    if T > 1:
        up = np.column_stack([g4[1:], g4[:-1]])
        p.add_rows(up, [1.0, -1.0], Sense.LE, plant.G4 * plant.rru)
        p.add_rows(up, [1.0, -1.0], Sense.LE, plant.G4 * plant.rruc)
        p.add_rows(up, [-1.0, 1.0], Sense.LE, plant.G4 * plant.rrd)
    _add_mass_rows(p, v["m"], mass_spec, T)

    coefs = objective_coefficients(slice_, plant, alpha)
    ids = np.concatenate([v[k] for k in coefs])
    vals = np.concatenate([np.asarray(c, dtype=float) for c in coefs.values()])
    p.set_objective((ids, vals))
    return p, VariableMap(T, v)


# --- decoding -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DispatchResult:
    """Hourly optimal flows (MW) and hydrogen mass (kg per hour)."""

    g1: np.ndarray
    g1c: np.ndarray
    g2: np.ndarray
    g2c: np.ndarray
    g3dc: np.ndarray
    g3ac: np.ndarray
    g4: np.ndarray
    gH2: np.ndarray
    g5i: np.ndarray
    g5e: np.ndarray
    m: np.ndarray
    G4: float = 1.0

    @property
    def n_hours(self) -> int:
        return len(self.m)

    @property
    def f4(self) -> np.ndarray:
        return self.g4 / self.G4

    @property
    def total_h2_kg(self) -> float:
        return float(self.m.sum())

    def head(self, n: int) -> "DispatchResult":
        return DispatchResult(**{k: getattr(self, k)[:n] for k in FLOWS}, G4=self.G4)

    def tail(self, n: int) -> "DispatchResult":
        return DispatchResult(**{k: getattr(self, k)[n:] for k in FLOWS}, G4=self.G4)

    @classmethod
    def concat(cls, parts: Sequence["DispatchResult"]) -> "DispatchResult":
        if not parts:
            return cls(**{k: np.zeros(0) for k in FLOWS})
        return cls(**{k: np.concatenate([getattr(p, k) for p in parts]) for k in FLOWS}, G4=parts[0].G4)

    @classmethod
    def zeros(cls, n: int, G4: float = 1.0) -> "DispatchResult":
        return cls(**{k: np.zeros(n) for k in FLOWS}, G4=G4)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in FLOWS}


def balance_violations(result: DispatchResult, slice_: ScenarioSlice, plant: PlantConfig) -> dict:
    """Largest absolute residual of every hourly balance."""
    r = result
    checks = {
        "solar": r.g1 + r.g1c - plant.G1 * slice_.cf_solar,
        "wind": r.g2 + r.g2c - plant.G2 * slice_.cf_wind,
        "dc_bus": r.g1 - r.g3dc,
        "inverter": r.g3ac - plant.eta_inverter * r.g3dc,
        "ac_bus": r.g2 + r.g3ac - r.g4 + r.g5i - r.g5e,
        "electrolyser": r.gH2 - plant.eta_lhv * r.g4,
        "mass": r.m - plant.kg_per_mwh_h2 * plant.delta_t * r.gH2,
    }
    out = {k: float(np.max(np.abs(v), initial=0.0)) for k, v in checks.items()}
    # bound excursions count as violations too
    lows = [getattr(r, k).min(initial=0.0) for k in FLOWS]
    out["negative_flow"] = float(max(0.0, -min(lows)))
    out["g4_cap"] = float(max(0.0, r.g4.max(initial=0.0) - plant.G4))
    out["grid_cap"] = float(max(0.0, r.g5i.max(initial=0.0) - plant.G5, r.g5e.max(initial=0.0) - plant.G5))
    out["inverter_cap"] = float(max(0.0, r.g3dc.max(initial=0.0) - plant.G3 / plant.eta_inverter))
    return out


def extract_flows(solution: LpSolution, varmap: VariableMap, slice_: ScenarioSlice,
                  plant: PlantConfig, tol: float | None = None) -> DispatchResult:
    """Decode ``solution`` and re-verify every balance to ``1e-6 * G4`` MW.

    Simultaneous import and export is netted, which keeps every balance and
    the electricity cost and can only lower emissions.
    """
    if solution.status is not Status.OPTIMAL:
        raise NotOptimal(f"dispatch LP is {solution.status.value}", status=solution.status)
    x = solution.values
    flows = {k: np.array(x[varmap[k]], dtype=float) for k in FLOWS}
    # importing and exporting in the same hour trade at one price; when the
    # weights leave that tie open, net it out so no phantom import is reported
    both = np.minimum(flows["g5i"], flows["g5e"])
    flows["g5i"] -= both
    flows["g5e"] -= both
    for a in flows.values():
        a.flags.writeable = False
    result = DispatchResult(**flows, G4=plant.G4)
    tol = 1e-6 * plant.G4 if tol is None else tol
    viol = balance_violations(result, slice_, plant)
    # the mass row is in kg; scale its tolerance by kg per MWh
    viol["mass"] /= plant.kg_per_mwh_h2 * plant.delta_t
    worst = max(viol, key=viol.get)
    if viol[worst] > tol:
        raise InternalConsistency(f"{worst} balance violated by {viol[worst]:.3g}")
    return result


def dispatch(slice_: ScenarioSlice, plant: PlantConfig, f4_init: float, alpha: float,
             mass_spec: MassSpec | None, backend: str | None = None) -> tuple[LpSolution, DispatchResult | None]:
    """Build, solve and decode in one call; the result is ``None`` unless optimal."""
    problem, vmap = build_dispatch(slice_, plant, f4_init, alpha, mass_spec)
    sol = solve(problem, backend)
    if sol.status is not Status.OPTIMAL:
        return sol, None
    return sol, extract_flows(sol, vmap, slice_, plant)


# --- costs ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CostBreakdown:
    C_e: float  # EUR, net electricity (imports minus export revenue)
    C_o: float  # EUR, operation
    C_co2_eur: float  # EUR, monetised import emissions
    co2_kg: float
    C_c: float  # EUR, annualised electrolyser capital prorated to the horizon
    C_alpha: float  # EUR, weighted objective

    def __add__(self, other: "CostBreakdown") -> "CostBreakdown":
        return CostBreakdown(*(a + b for a, b in zip(astuple_(self), astuple_(other))))


def astuple_(c: CostBreakdown) -> tuple:
    return (c.C_e, c.C_o, c.C_co2_eur, c.co2_kg, c.C_c, c.C_alpha)


def cost_components(result: DispatchResult, slice_: ScenarioSlice, plant: PlantConfig, alpha: float) -> CostBreakdown:
    dt = plant.delta_t
    C_e = float(dt * np.sum((result.g5i - result.g5e) * slice_.price))
    co2_kg = float(dt * np.sum(result.g5i * slice_.co2_intensity))  # exports never offset
    C_co2 = plant.c_co2 * co2_kg
    C_o = float(dt * (plant.c_op_solar * result.g1.sum() + plant.c_op_wind * result.g2.sum()
                      + plant.c_op_inverter * result.g3ac.sum() + plant.c_op_electrolyser * result.g4.sum()))
    C_c = plant.annualised_capex() * plant.G4 * (result.n_hours * dt / HOURS_PER_YEAR)
    C_alpha = alpha * C_co2 + (1.0 - alpha) * (C_e + C_o)
    return CostBreakdown(C_e, C_o, C_co2, co2_kg, C_c, C_alpha)


# --- independent audit ---------------------------------------------------------------

def ramp_violations(g4: np.ndarray, plant: PlantConfig, f4_init: float, tol: float | None = None) -> np.ndarray:
    """Hours whose electrolyser step breaks a ramp limit (hour 0 against ``f4_init``)."""
    tol = 1e-6 * plant.G4 if tol is None else tol
    prev = np.concatenate([[f4_init * plant.G4], np.asarray(g4, dtype=float)[:-1]])
    step = np.asarray(g4, dtype=float) - prev
    bad = (step > plant.ramp_up + tol) | (-step > plant.ramp_down + tol)
    return np.flatnonzero(bad)
