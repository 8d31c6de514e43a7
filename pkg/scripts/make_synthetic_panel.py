"""Generate a synthetic panel CSV (plus GDP table) for trying the pipeline."""

import argparse
import csv
from pathlib import Path

from sdgpipe.panel import write_panel_csv
from sdgpipe.synthetic import synthetic_gdp, synthetic_panel


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("data"),
                        help="directory for panel.csv and gdp.csv")
    parser.add_argument("--countries", type=int, default=12)
    parser.add_argument("--groups", type=int, default=3)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    panel = synthetic_panel(
        n_countries=args.countries, n_groups=args.groups, seed=args.seed
    )
    write_panel_csv(panel, args.out / "panel.csv")
    gdp = synthetic_gdp(panel)
    with (args.out / "gdp.csv").open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["country", "gdp_per_capita"])
        for country in sorted(gdp):
            writer.writerow([country, f"{gdp[country]:.2f}"])
    print(f"wrote {args.out / 'panel.csv'} ({panel.n_observations} rows) and gdp.csv")


if __name__ == "__main__":
    main()
