"""Write a synthetic hourly scenario CSV (solar, wind, price, grid intensity)."""

import argparse
from datetime import datetime, timezone

from h2plan.synthetic import synthetic_scenario
from h2plan.timeseries import write_scenario


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out", help="output CSV path (.csv or .csv.gz)")
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="2018-01-01", help="first day, YYYY-MM-DD (UTC midnight)")
    args = p.parse_args()
    start = datetime.strptime(args.start, "%Y-%m-%d").replace(tzinfo=timezone.utc)
    write_scenario(synthetic_scenario(args.days, args.seed, start), args.out)
    print(f"wrote {args.days * 24} hours to {args.out}")


if __name__ == "__main__":
    main()
