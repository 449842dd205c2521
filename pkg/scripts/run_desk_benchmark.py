"""Run the six builtin models over a synthetic panel and print leaderboards.

End-to-end smoke run, no store, no network:

    python scripts/run_desk_benchmark.py --horizons 12,24 --seed 0
"""

import argparse
import sys
import time

from make_synthetic_vintage import build_panel

from dbits.config import EvalConfig
from dbits.engine import aggregate_leaderboard, run_evaluation
from dbits.forecasters import BUILTIN_MODELS
from dbits.ingest import build_transformed_panel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--months", type=int, default=180)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--horizons", default="12,24")
    ap.add_argument("--lookback", type=int, default=96)
    args = ap.parse_args()

    horizons = tuple(int(h) for h in args.horizons.split(","))
    cfg = EvalConfig(lookback=args.lookback, horizons=horizons)
    panel = build_transformed_panel(build_panel(args.months, args.seed, 2009), cfg.space)

    start = time.perf_counter()
    result = run_evaluation(panel, cfg, list(BUILTIN_MODELS.values()), vintage_id="desk")
    elapsed = time.perf_counter() - start
    print(
        f"{len(result.records)} records over {len(panel.series_ids)} series "
        f"in {elapsed:.2f}s ({len(result.incidents)} incidents)\n"
    )

    for metric in cfg.metrics:
        for h in cfg.horizons:
            rows = aggregate_leaderboard(result.records, metric, h, "desk")
            print(f"{metric} @ h={h}")
            for r in rows:
                print(f"  {r.rank}. {r.model_id:<20} {r.score:12.6f}  (n={r.n_records})")
            print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
