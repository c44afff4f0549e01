"""Seeded synthetic scenarios with DK1-like structure for tests and experiments.

Solar follows a seasonal clear-sky bell scaled by daily cloudiness, wind a
logistic-transformed AR(1) process; price falls with wind output and carries
morning/evening peaks; CO2 intensity falls with wind but is only weakly tied to
price.
"""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np

from .timeseries import ScenarioData


def synthetic_scenario(n_days: int = 365, seed: int = 0,
                       start: datetime = datetime(2018, 1, 1, tzinfo=timezone.utc)) -> ScenarioData:
    rng = np.random.default_rng(seed)
    n = n_days * 24
    hour = np.arange(n) % 24
    day = np.arange(n) // 24
    doy = (start.timetuple().tm_yday - 1 + day) % 365

    season = 0.55 - 0.45 * np.cos(2 * np.pi * (doy + 10) / 365)  # 0.1 in winter, 1 in summer
    half_len = 4.0 + 4.5 * season  # hours from solar noon to sunset
    bell = np.clip(np.cos(np.pi / 2 * (hour + 0.5 - 12.5) / half_len), 0.0, None)
    bell[np.abs(hour + 0.5 - 12.5) > half_len] = 0.0
    cloud = rng.beta(2.0, 1.6, size=n_days)[day]
    cf_solar = np.clip(0.8 * bell ** 1.3 * (0.25 + 0.75 * season) * cloud, 0.0, 1.0)

    z = np.empty(n)
    z[0] = rng.normal()
    shocks = rng.normal(size=n)
    for t in range(1, n):
        z[t] = 0.97 * z[t - 1] + np.sqrt(1 - 0.97 ** 2) * shocks[t]
    winter = 0.3 * np.cos(2 * np.pi * (doy + 10) / 365)
    cf_wind = 1.0 / (1.0 + np.exp(-(1.6 * z - 0.6 + winter)))

    daily_shape = 8.0 * np.exp(-((hour - 8) / 2.0) ** 2) + 12.0 * np.exp(-((hour - 18) / 2.5) ** 2)
    price = 48.0 + daily_shape - 45.0 * cf_wind - 12.0 * cf_solar + 6.0 * rng.normal(size=n)
    price = np.round(price, 2)

    # slow, price-independent driver (interconnector mix, thermal dispatch)
    u = np.empty(n)
    u[0] = rng.normal()
    u_shocks = rng.normal(size=n)
    for t in range(1, n):
        u[t] = 0.99 * u[t - 1] + np.sqrt(1 - 0.99 ** 2) * u_shocks[t]
    co2 = 260.0 - 90.0 * cf_wind - 40.0 * cf_solar + 85.0 * u + 30.0 * rng.normal(size=n)
    co2 = np.round(np.clip(co2, 15.0, None), 1)

    return ScenarioData(start, np.round(cf_solar, 4), np.round(cf_wind, 4), price, co2)
