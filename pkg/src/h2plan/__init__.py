"""Day-to-day planning and dispatch of a grid-connected hybrid renewable hydrogen plant."""

from .dispatch import PlantConfig, DispatchResult, CostBreakdown, build_dispatch, extract_flows, cost_components
from .lp import LpProblem, LpSolution, solve
from .simulator import DeliveryContract, SimulationReport, run_benchmark, run_day_to_day, run_trading_only
from .timeseries import ScenarioData, ScenarioSlice, load_scenario, window, build_planning_window

__version__ = "0.1.0"

__all__ = [
    "PlantConfig", "DispatchResult", "CostBreakdown", "build_dispatch", "extract_flows", "cost_components",
    "LpProblem", "LpSolution", "solve",
    "DeliveryContract", "SimulationReport", "run_benchmark", "run_day_to_day", "run_trading_only",
    "ScenarioData", "ScenarioSlice", "load_scenario", "window", "build_planning_window",
]
