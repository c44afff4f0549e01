"""Benchmark and day-to-day alpha sweeps on one scenario, plus their ratio.

Writes pareto_benchmark.csv, pareto_day2day.csv, comparison.csv and
green.csv (day-to-day runs) into --out.
"""

import argparse
import time
from pathlib import Path

from h2plan.dispatch import PlantConfig
from h2plan.metrics import (
    classify_green,
    normalized_comparison,
    pareto_point,
    sweep_reports,
    write_comparison_csv,
    write_green_csv,
    write_pareto_csv,
)
from h2plan.simulator import DeliveryContract
from h2plan.synthetic import synthetic_scenario
from h2plan.timeseries import load_scenario


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", help="scenario CSV; a synthetic year is generated when omitted")
    p.add_argument("--seed", type=int, default=0, help="seed of the synthetic year")
    p.add_argument("--delivery", default="month", choices=["day", "week", "month", "year"])
    p.add_argument("--alphas", default="0,0.25,0.5,0.75,1")
    p.add_argument("--workers", type=int, default=None, help="parallel runs (default: H2PLAN_THREADS or 1)")
    p.add_argument("--out", default="pareto_out")
    args = p.parse_args()

    sc = load_scenario(args.data) if args.data else synthetic_scenario(365, seed=args.seed)
    plant = PlantConfig()
    contract = DeliveryContract.standard(args.delivery, plant.G4)
    alphas = [float(a) for a in args.alphas.split(",")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    points = {}
    for mode in ("benchmark", "day2day"):
        t0 = time.perf_counter()
        profit, reports = sweep_reports(sc, plant, contract, alphas, mode, workers=args.workers)
        points[mode] = [pareto_point(r, profit) for r in reports]
        write_pareto_csv(points[mode], out / f"pareto_{mode}.csv")
        if mode == "day2day":
            write_green_csv([(r.alpha, classify_green(r)) for r in reports], out / "green.csv")
        print(f"{mode}: {len(reports)} runs in {time.perf_counter() - t0:.1f} s")
        for pt in points[mode]:
            print(f"  alpha={pt.alpha:g}  LCOH {pt.lcoh:.3f} EUR/kg  specific CO2 {pt.specific_co2:.3f} kg/kg")
    cmp = normalized_comparison(points["day2day"], points["benchmark"])
    write_comparison_csv(cmp, out / "comparison.csv")
    for c in cmp:
        print(f"alpha={c.alpha:g}  day-to-day/benchmark  LCOH x{c.lcoh_ratio:.4f}  CO2 x{c.co2_ratio:.4f}")


if __name__ == "__main__":
    main()
