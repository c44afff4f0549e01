from datetime import datetime, timezone

import numpy as np
import pytest

from h2plan.dispatch import PlantConfig
from h2plan.timeseries import ScenarioData, ScenarioSlice

# filled by test_acceptance.py, printed at the end of the session; None marks a skip
ACCEPTANCE_RESULTS: dict = {}


def make_slice(n, cf_solar=0.0, cf_wind=0.0, price=50.0, co2=100.0) -> ScenarioSlice:
    arr = lambda v: np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
    return ScenarioSlice(0, arr(cf_solar), arr(cf_wind), arr(price), arr(co2), np.arange(n))


def make_scenario(n, cf_solar=0.0, cf_wind=0.0, price=50.0, co2=100.0,
                  start=datetime(2018, 1, 1, tzinfo=timezone.utc)) -> ScenarioData:
    s = make_slice(n, cf_solar, cf_wind, price, co2)
    return ScenarioData(start, s.cf_solar, s.cf_wind, s.price, s.co2_intensity)


@pytest.fixture
def plant():
    return PlantConfig()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        tag = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"[{tag}] criterion {key}: {detail}")
