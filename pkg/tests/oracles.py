"""Independent reference solvers used to check LP results.

They work on electrolyser levels directly with grid-only supply (no
renewables), where the hourly cost of running at level ``f`` is
``f * G4 * (alpha * c_co2 * I + (1 - alpha) * price)``.
"""

import itertools

import numpy as np


def grid_only_hour_cost(price, co2, plant, alpha):
    return plant.G4 * plant.delta_t * (alpha * plant.c_co2 * np.asarray(co2) + (1 - alpha) * np.asarray(price))


def ramp_ok(prev, nxt, plant):
    step = (nxt - prev) * plant.G4
    return step <= plant.ramp_up + 1e-12 and -step <= plant.ramp_down + 1e-12


def dp_day_plan(price, co2, plant, alpha, f4_init, day_kg, extra_kg, levels, day_hours=24):
    """Cheapest plan on a level grid with the day total and the tail total
    fixed, by dynamic programming over (level, accumulated mass units)."""
    T = len(price)
    cost = grid_only_hour_cost(price, co2, plant, alpha)
    unit = plant.max_hourly_mass * (levels[1] - levels[0])
    day_units = int(round(day_kg / unit))
    extra_units = int(round(extra_kg / unit))
    steps = [int(round(lv / (levels[1] - levels[0]))) for lv in levels]
    # state: (level index, units so far within the current block) -> cost
    frontier = {(None, 0): 0.0}
    for t in range(T):
        if t == day_hours:
            frontier = {(li, 0): c for (li, u), c in frontier.items() if u == day_units}
        cap = day_units if t < day_hours else extra_units
        nxt = {}
        for (li, u), c in frontier.items():
            prev_level = f4_init if li is None else levels[li]
            for lj, lv in enumerate(levels):
                if not ramp_ok(prev_level, lv, plant):
                    continue
                nu = u + steps[lj]
                if nu > cap:
                    continue
                key = (lj, nu)
                val = c + cost[t] * lv
                if val < nxt.get(key, np.inf):
                    nxt[key] = val
        frontier = nxt
    final = extra_units if T > day_hours else day_units
    best = [c for (li, u), c in frontier.items() if u == final]
    return min(best) if best else np.inf


def brute_force_levels(T, levels):
    return itertools.product(levels, repeat=T)
