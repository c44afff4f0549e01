"""Benchmark yearly alpha sweep on user-supplied 2018 DK1 data.

The CSV must follow the package scenario format (timestamp, cf_solar, cf_wind,
price_eur_mwh, co2_kg_mwh) and start on 2018-01-01T00:00:00Z. Market
data is not shipped. The check of interest is alpha = 1 specific
emissions below 1 kg CO2 per kg H2.
"""

import argparse
import sys

from h2plan.dispatch import PlantConfig
from h2plan.errors import H2PlanError
from h2plan.metrics import classify_green, pareto_point, sweep_reports
from h2plan.simulator import DeliveryContract
from h2plan.timeseries import load_scenario


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("data")
    p.add_argument("--alphas", default="0,0.25,0.5,0.75,1")
    args = p.parse_args()
    plant = PlantConfig()
    alphas = [float(a) for a in args.alphas.split(",")]
    try:
        sc = load_scenario(args.data)
        profit, reports = sweep_reports(sc, plant, DeliveryContract.standard("year", plant.G4), alphas, "benchmark")
    except H2PlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for r in reports:
        pt, gb = pareto_point(r, profit), classify_green(r)
        print(f"alpha={r.alpha:g}  LCOH {pt.lcoh:.3f} EUR/kg  specific CO2 {pt.specific_co2:.3f} kg/kg  "
              f"green share {gb.green_share:.1%}")
    top = max(reports, key=lambda r: r.alpha)
    sco2 = pareto_point(top, profit).specific_co2
    ok = top.alpha == 1.0 and sco2 < 1.0
    print(f"alpha=1 specific emissions {sco2:.3f} kg CO2/kg H2: {'PASS' if ok else 'FAIL'} (< 1)")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
