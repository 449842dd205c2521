"""Record HTTP response bodies from a live in-process service as fixtures.

The frontend test suite replays these instead of talking to a running
server. Re-run after any change to the API payload shapes:

    python scripts/record_ui_fixtures.py --out frontend/fixtures
"""

import argparse
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from fastapi.testclient import TestClient
from make_synthetic_vintage import build_panel

from dbits.config import EvalConfig
from dbits.engine import MetricRecord, run_evaluation
from dbits.forecasters import BUILTIN_MODELS
from dbits.ingest import Vintage, build_transformed_panel, content_hash, serialize_fredmd
from dbits.service import create_app
from dbits.store import RunManifest, Store

CFG = EvalConfig()
LEADERBOARD_MODELS = ("ar_least_squares", "historical_average", "linear_trend")


def commit_eval_run(store, vintage_id, seed):
    """Evaluate 3 builtins on a synthetic panel and commit the run."""
    panel = build_panel(150, seed, 2012)
    raw = serialize_fredmd(panel)
    vintage = Vintage(
        id=vintage_id,
        fetched_at=datetime(2024, 6, 1, tzinfo=timezone.utc),
        content_hash=content_hash(raw),
        source_url=f"fixture://{vintage_id}.csv",
    )
    models = [BUILTIN_MODELS[m] for m in LEADERBOARD_MODELS]
    result = run_evaluation(
        build_transformed_panel(panel, CFG.space), CFG, models, vintage_id=vintage.id
    )
    run = RunManifest.build(vintage.id, CFG, list(LEADERBOARD_MODELS), len(result.records))
    store.put_vintage(vintage, raw)
    store.put_records(run, result.records)


def commit_rank_flip_run(store, vintage_id, seed):
    """Commit crafted records where two models swap rank mid-history.

    ar_least_squares degrades linearly while linear_trend improves, so the
    trailing-window ranks cross; historical_average stays a flat rank 3.
    """
    panel = build_panel(150, seed, 2012)
    raw = serialize_fredmd(panel)
    vintage = Vintage(
        id=vintage_id,
        fetched_at=datetime(2024, 7, 1, tzinfo=timezone.utc),
        content_hash=content_hash(raw),
        source_url=f"fixture://{vintage_id}.csv",
    )
    records = []
    for i, origin in enumerate(range(96, 120)):
        per_model = {
            "ar_least_squares": 0.2 + 0.02 * i,
            "linear_trend": 0.6 - 0.02 * i,
            "historical_average": 1.0,
        }
        for model_id, value in per_model.items():
            records.append(
                MetricRecord(
                    vintage_id=vintage.id,
                    model_id=model_id,
                    series_id="AR1_0",
                    origin_index=origin,
                    horizon=12,
                    metric_name="MASE",
                    value=value,
                )
            )
    run = RunManifest.build(vintage.id, CFG, sorted({r.model_id for r in records}), len(records))
    store.put_vintage(vintage, raw)
    store.put_records(run, records)


FIXTURES = [
    ("health.json", "GET", "/api/health"),
    ("config.json", "GET", "/api/config"),
    ("models.json", "GET", "/api/models"),
    ("vintages.json", "GET", "/api/vintages"),
    ("leaderboard.json", "GET", "/api/leaderboard?metric=MASE&horizon=12&vintage=2024-06"),
    ("leaderboard_alt.json", "GET", "/api/leaderboard?metric=MAE&horizon=24&vintage=2024-06"),
    ("history_rank_flip.json", "GET", "/api/history?metric=MASE&horizon=12&window=6&vintage=2024-07"),
    ("records_page.json", "GET", "/api/records?vintage=2024-06&limit=10"),
    ("error_bad_metric.json", "GET", "/api/leaderboard?metric=WRONG&horizon=12"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="frontend/fixtures")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store = Store(tmp)
        commit_eval_run(store, "2024-06", seed=0)
        commit_rank_flip_run(store, "2024-07", seed=1)
        client = TestClient(create_app(store, CFG))
        for name, method, url in FIXTURES:
            resp = client.request(method, url)
            (out / name).write_bytes(resp.content)
            print(f"{name:<26} {resp.status_code}  {len(resp.content)} bytes  {url}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
