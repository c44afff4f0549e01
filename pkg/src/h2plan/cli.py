"""``h2plan`` command line: run a mode, write CSV reports, print a summary.

Exit codes: 0 success, 1 usage or configuration error, 2 a delivery target
was missed or cannot be met.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .dispatch import PlantConfig
from .errors import BenchmarkInfeasible, ContractBreach, ContractConfigError, H2PlanError, ScenarioError
from .lp import available_backends
from .metrics import (
    GreenRules,
    classify_green,
    pareto_point,
    sweep_reports,
    write_cumulative_csv,
    write_green_csv,
    write_pareto_csv,
    write_scatter_csv,
)
from .simulator import (
    STANDARD_TARGETS_KG_PER_MW,
    DeliveryContract,
    SimulationReport,
    run_benchmark,
    run_day_to_day,
    run_trading_only,
    trading_only_dispatch,
    write_days_csv,
    write_hourly_csv,
    write_periods_csv,
    write_rows,
)
from .timeseries import FORECAST_HORIZON, load_scenario

EXIT_OK, EXIT_USAGE, EXIT_BREACH = 0, 1, 2
MODES = ("benchmark", "day2day", "trading-only", "sweep")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    data_path: str = ""
    mode: str = "benchmark"
    delivery: str = "year"
    alpha: float = 0.5
    alphas: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    sweep_mode: str = "benchmark"
    target_kg: float | None = None  # None: standard target scaled to G4
    out_dir: str = "."
    solver: str | None = None
    forecast_horizon: int = FORECAST_HORIZON
    plant: PlantConfig = field(default_factory=PlantConfig)
    green: GreenRules = field(default_factory=GreenRules)

    def __post_init__(self):
        for a in (self.alpha, *self.alphas):
            if not 0.0 <= a <= 1.0:
                raise UsageError(f"alpha {a} outside [0, 1]")
        if self.delivery not in STANDARD_TARGETS_KG_PER_MW:
            raise UsageError(f"unknown delivery {self.delivery!r}")

    def contract(self) -> DeliveryContract:
        if self.target_kg is None:
            return DeliveryContract.standard(self.delivery, self.plant.G4)
        return DeliveryContract(self.delivery, self.target_kg)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _alphas(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad alpha list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="scenario CSV (timestamp,cf_solar,cf_wind,price_eur_mwh,co2_kg_mwh)")
    common.add_argument("--config", help="INI file with [run], [plant] and [green] sections")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("--solver", help=f"LP backend ({', '.join(available_backends())})")
    common.add_argument("--plant", action="append", default=[], metavar="KEY=VALUE", help="plant parameter override")
    common.add_argument("--summary", action="store_true", help="print LCOH and specific CO2")

    contract = argparse.ArgumentParser(add_help=False)
    contract.add_argument("--delivery", choices=sorted(STANDARD_TARGETS_KG_PER_MW))
    contract.add_argument("--target", type=float, help="kg per delivery period (default: scaled standard target)")
    contract.add_argument("--green", action="append", default=[], metavar="KEY=VALUE", help="green-rule override")
    contract.add_argument("--forecast-horizon", type=int)

    p = _Parser(prog="h2plan", description="Plan and dispatch a grid-connected hybrid renewable hydrogen plant.")
    p.add_argument("--version", action="version", version=f"h2plan {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="{" + ",".join(MODES) + "}")
    for name, helptext in (("benchmark", "full-foresight LP over the whole horizon"),
                           ("day2day", "daily planning loop with the shrinking-window planner")):
        sp = sub.add_parser(name, parents=[common, contract], help=helptext)
        sp.add_argument("--alpha", type=float)
    sub.add_parser("trading-only", parents=[common], help="electricity trading without hydrogen production")
    sp = sub.add_parser("sweep", parents=[common, contract], help="Pareto sweep over CO2 weights")
    sp.add_argument("--alphas", type=_alphas, help="comma-separated weights in [0, 1]")
    sp.add_argument("--mode", choices=("benchmark", "day2day"))
    sp.add_argument("--workers", type=int, help="parallel runs (default: H2PLAN_THREADS or 1)")
    p.subcommands = sub.choices
    return p


def _coerce(cls, items: dict, what: str) -> dict:
    types = {f.name: f.type for f in fields(cls)}
    out = {}
    for key, value in items.items():
        if key not in types:
            raise UsageError(f"unknown {what} parameter {key!r}")
        kind = str(types[key])
        try:
            if "bool" in kind:
                if str(value).lower() not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                    raise ValueError(value)
                out[key] = str(value).lower() in ("1", "true", "yes", "on")
            elif "None" in kind and str(value).lower() in ("", "none"):
                out[key] = None
            else:
                out[key] = float(value)
        except ValueError:
            raise UsageError(f"bad value for {what} parameter {key}: {value!r}") from None
    return out


def _pairs(items: list[str], what: str) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--{what} expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _ini() -> configparser.ConfigParser:
    ini = configparser.ConfigParser(interpolation=None)
    ini.optionxform = str  # plant keys such as G4 are case-sensitive
    return ini


def resolve_config(args: argparse.Namespace) -> RunConfig:
    ini = _ini()
    if args.config:
        if not Path(args.config).is_file():
            raise UsageError(f"config file {args.config} not found")
        ini.read(args.config, encoding="utf-8")
    run = dict(ini["run"]) if ini.has_section("run") else {}
    plant_kv = dict(ini["plant"]) if ini.has_section("plant") else {}
    green_kv = dict(ini["green"]) if ini.has_section("green") else {}
    plant_kv.update(_pairs(args.plant, "plant"))
    green_kv.update(_pairs(getattr(args, "green", []), "green"))
    try:
        plant = PlantConfig(**_coerce(PlantConfig, plant_kv, "plant"))
        green = GreenRules(**_coerce(GreenRules, green_kv, "green"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def pick(flag, key, conv=str, default=None):
        if flag is not None:
            return flag
        if key in run and run[key].strip() != "":
            try:
                return conv(run[key])
            except ValueError:
                raise UsageError(f"bad value for [run] {key}: {run[key]!r}") from None
        return default

    # "command" is informational; it is written by write_resolved_config
    unknown = set(run) - {"command", "data", "delivery", "alpha", "alphas", "target", "out", "solver", "mode",
                          "forecast_horizon"}
    if unknown:
        raise UsageError(f"unknown [run] keys: {', '.join(sorted(unknown))}")
    defaults = RunConfig()
    data = pick(args.data, "data")
    if not data:
        raise UsageError("--data is required")
    return RunConfig(
        data_path=data,
        mode=args.command,
        delivery=pick(getattr(args, "delivery", None), "delivery", default=defaults.delivery),
        alpha=pick(getattr(args, "alpha", None), "alpha", float, defaults.alpha),
        alphas=pick(getattr(args, "alphas", None), "alphas", _alphas, defaults.alphas),
        sweep_mode=pick(getattr(args, "mode", None), "mode", default=defaults.sweep_mode),
        target_kg=pick(getattr(args, "target", None), "target", float),
        out_dir=pick(args.out, "out", default=defaults.out_dir),
        solver=pick(args.solver, "solver"),
        forecast_horizon=pick(getattr(args, "forecast_horizon", None), "forecast_horizon", int,
                              defaults.forecast_horizon),
        plant=plant,
        green=green,
    )


def write_resolved_config(cfg: RunConfig, path: Path) -> None:
    ini = _ini()
    ini["run"] = {
        "command": cfg.mode, "data": cfg.data_path, "delivery": cfg.delivery, "alpha": repr(cfg.alpha),
        "alphas": ",".join(repr(a) for a in cfg.alphas), "mode": cfg.sweep_mode,
        "target": repr(cfg.contract().target_kg), "out": cfg.out_dir,
        "solver": cfg.solver or "", "forecast_horizon": str(cfg.forecast_horizon),
    }
    ini["plant"] = {k: repr(v) for k, v in asdict(cfg.plant).items()}
    ini["green"] = {k: repr(v) for k, v in asdict(cfg.green).items()}
    with open(path, "w", encoding="utf-8") as fh:
        ini.write(fh)


def _stem(mode: str, delivery: str, alpha: float) -> str:
    return f"{mode}_{delivery}_{alpha!r}"


SUMMARY_HEADER = ["mode", "delivery", "alpha", "target_kg", "total_h2_kg", "C_e", "C_o", "C_co2_eur", "co2_kg",
                  "C_c", "C_alpha", "trading_profit", "lcoh", "specific_co2", "periods", "periods_met",
                  "config_hash"]


def _summary_row(report: SimulationReport, profit: float) -> list:
    pt = pareto_point(report, profit)
    c = report.costs
    return [report.mode, report.contract.kind, report.alpha, report.contract.target_kg, report.total_h2_kg,
            c.C_e, c.C_o, c.C_co2_eur, c.co2_kg, c.C_c, c.C_alpha, profit, pt.lcoh, pt.specific_co2,
            len(report.periods), sum(p.met for p in report.periods), report.config_hash]


def _write_run(report: SimulationReport, scenario, profit: float, out: Path, rules: GreenRules) -> None:
    stem = _stem(report.mode, report.contract.kind, report.alpha)
    write_hourly_csv(report, scenario, out / f"{stem}.csv")
    write_rows(out / f"{stem}_summary.csv", SUMMARY_HEADER, [_summary_row(report, profit)])
    write_periods_csv(report, out / f"{stem}_periods.csv")
    write_cumulative_csv(report, out / f"{stem}_cumulative.csv")
    write_scatter_csv(report, out / f"{stem}_scatter.csv", rules)
    write_green_csv([(report.alpha, classify_green(report, None, rules))], out / f"{stem}_green.csv")
    if report.days:
        write_days_csv(report, out / f"{stem}_days.csv")


def _fmt(v: float) -> str:
    return "nan" if not math.isfinite(v) else f"{v:.6f}"


def _print_summary(report: SimulationReport, profit: float, prefix: str = "") -> None:
    pt = pareto_point(report, profit)
    print(f"{prefix}LCOH: {_fmt(pt.lcoh)} EUR/kg")
    print(f"{prefix}Specific CO2: {_fmt(pt.specific_co2)} kg CO2/kg H2")


def _unmet(reports) -> list[str]:
    return [f"{r.mode} alpha={r.alpha!r}: period {i} produced {p.produced_kg:.6f} of {p.target_kg:.6f} kg"
            for r in reports for i, p in enumerate(r.periods) if not p.met]


def run(cfg: RunConfig, summary: bool = False, workers: int | None = None) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = load_scenario(cfg.data_path)
    write_resolved_config(cfg, out / "resolved_config.ini")

    if cfg.mode == "trading-only":
        report = trading_only_dispatch(scenario, cfg.plant, cfg.solver)
        write_hourly_csv(report, scenario, out / "trading-only.csv")
        write_rows(out / "trading-only_summary.csv", ["trading_profit", "C_e", "config_hash"],
                   [[-report.costs.C_e, report.costs.C_e, report.config_hash]])
        if summary:
            print(f"Trading profit: {-report.costs.C_e:.6f} EUR")
        return EXIT_OK

    contract = cfg.contract()
    if cfg.mode == "sweep":
        profit, reports = sweep_reports(scenario, cfg.plant, contract, cfg.alphas, cfg.sweep_mode,
                                        cfg.solver, workers)
        points = [pareto_point(r, profit) for r in reports]
        write_pareto_csv(points, out / "pareto.csv")
        write_green_csv([(r.alpha, classify_green(r, None, cfg.green)) for r in reports], out / "green.csv")
        write_rows(out / "summary.csv", SUMMARY_HEADER, [_summary_row(r, profit) for r in reports])
        for r in reports:
            _write_run(r, scenario, profit, out, cfg.green)
            if summary:
                _print_summary(r, profit, f"alpha={r.alpha!r} ")
    else:
        if cfg.mode == "benchmark":
            report = run_benchmark(scenario, cfg.plant, contract, cfg.alpha, cfg.solver)
        else:
            report = run_day_to_day(scenario, cfg.plant, contract, cfg.alpha, cfg.solver, cfg.forecast_horizon)
        profit = run_trading_only(scenario, cfg.plant, cfg.solver)
        reports = [report]
        _write_run(report, scenario, profit, out, cfg.green)
        if summary:
            _print_summary(report, profit)
    unmet = _unmet(reports)
    for line in unmet:
        print(f"h2plan: unmet delivery: {line}", file=sys.stderr)
    return EXIT_BREACH if unmet else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("a subcommand is required")
        cfg = resolve_config(args)
        return run(cfg, args.summary, getattr(args, "workers", None))
    except UsageError as exc:
        print(f"h2plan: error: {exc}", file=sys.stderr)
        if "--data" in str(exc):
            sub = parser.subcommands.get(getattr(args, "command", None), parser)
            sub.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ContractBreach, BenchmarkInfeasible) as exc:
        print(f"h2plan: delivery failure: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except (ScenarioError, ContractConfigError, FileNotFoundError, ValueError) as exc:
        print(f"h2plan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except H2PlanError as exc:
        print(f"h2plan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
