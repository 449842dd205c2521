"""Write a synthetic monthly vintage in the source CSV layout.

Useful for exercising `dbits ingest` / `dbits eval` without network access:

    python scripts/make_synthetic_vintage.py --out /tmp/2024-06.csv
    dbits ingest --source /tmp/2024-06.csv --store /tmp/store
"""

import argparse
from datetime import date

import numpy as np

from dbits.ingest import SeriesPanel, serialize_fredmd


def month_range(n, start_year, start_month=1):
    out = []
    y, m = start_year, start_month
    for _ in range(n):
        out.append(date(y, m, 1))
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return tuple(out)


def build_panel(months, seed, start_year):
    rng = np.random.default_rng(seed)
    t = np.arange(months, dtype=float)
    series = {
        "LEVEL_CONST": (np.full(months, 7.5), 1),
        "TREND_SLOW": (100.0 + 0.3 * t + rng.normal(0, 0.4, months), 1),
        "TREND_FAST": (5.0 + 1.7 * t + rng.normal(0, 2.0, months), 1),
        # noise keeps the lag-12 diffs (the MASE scale) away from zero
        "SEASONAL12": (20.0 + 5.0 * np.sin(2 * np.pi * t / 12.0) + rng.normal(0, 0.3, months), 1),
        "WALK_LOG": (np.exp(np.cumsum(rng.normal(0.002, 0.01, months)) + 4.0), 5),
        "RATE_DIFF": (3.0 + np.cumsum(rng.normal(0, 0.05, months)), 2),
    }
    for k in range(4):
        y = np.empty(months)
        y[0] = 50.0
        eps = rng.normal(0, 1.0, months)
        for i in range(1, months):
            y[i] = 25.0 + 0.5 * y[i - 1] + eps[i]
        series[f"AR1_{k}"] = (y, 1)
    ids = sorted(series)
    return SeriesPanel(
        dates=month_range(months, start_year),
        series_ids=tuple(ids),
        values=np.column_stack([series[s][0] for s in ids]),
        tcodes={s: series[s][1] for s in ids},
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True, help="output CSV path")
    ap.add_argument("--months", type=int, default=180)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--start-year", type=int, default=2009)
    args = ap.parse_args()

    panel = build_panel(args.months, args.seed, args.start_year)
    raw = serialize_fredmd(panel)
    with open(args.out, "wb") as f:
        f.write(raw)
    print(f"wrote {len(panel.series_ids)} series x {args.months} months to {args.out}")


if __name__ == "__main__":
    main()
