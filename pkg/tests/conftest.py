import sys
from pathlib import Path

import numpy as np
import pytest

from dbits.config import EvalConfig
from dbits.ingest import SeriesPanel, TransformedPanel

REPO_ROOT = Path(__file__).resolve().parents[1]
LAST_VALUE_ADAPTER_DIR = REPO_ROOT / "adapters" / "last_value"


def month_range(n, start_year=2000, start_month=1):
    from datetime import date

    dates = []
    y, m = start_year, start_month
    for _ in range(n):
        dates.append(date(y, m, 1))
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return tuple(dates)


def fredmd_bytes(series, tcodes, start="1/1/2020"):
    """Build FRED-MD CSV bytes from {series_id: [values]} (None = blank)."""
    ids = list(series)
    n = len(next(iter(series.values())))
    month, day, year = (int(p) for p in start.split("/"))
    lines = ["sasdate," + ",".join(ids)]
    lines.append("Transform:," + ",".join(str(tcodes[s]) for s in ids))
    for i in range(n):
        cells = [f"{month}/{day}/{year}"]
        for s in ids:
            v = series[s][i]
            cells.append("" if v is None else repr(float(v)))
        lines.append(",".join(cells))
        month, year = (1, year + 1) if month == 12 else (month + 1, year)
    return ("\n".join(lines) + "\n").encode("utf-8")


def make_panel(series, tcodes=None, transform_applied=False):
    """TransformedPanel straight from {series_id: array} columns."""
    ids = tuple(series)
    n = len(next(iter(series.values())))
    values = np.column_stack([np.asarray(series[s], dtype=float) for s in ids])
    return TransformedPanel(
        dates=month_range(n),
        series_ids=ids,
        values=values,
        tcodes=tcodes or {s: 1 for s in ids},
        transform_applied=transform_applied,
    )


def write_python_adapter(directory, body, model_id="stub", timeout_seconds=5, window_len=96):
    """Drop a python adapter script + manifest into a directory."""
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "adapter.py").write_text(body, encoding="utf-8")
    import json

    (directory / "manifest").write_text(
        json.dumps(
            {
                "model_id": model_id,
                "display_name": f"{model_id} (test)",
                "model_type": "stub",
                "command": [sys.executable, "adapter.py"],
                "input_window_len": window_len,
                "horizons_supported": "any",
                "timeout_seconds": timeout_seconds,
            }
        ),
        encoding="utf-8",
    )
    return directory


ECHO_LAST_VALUE_PY = """\
import json, sys
for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    last = req["window"][-1]
    print(json.dumps({"id": req["id"], "forecasts": {str(h): last for h in req["horizons"]}}))
    sys.stdout.flush()
"""


@pytest.fixture
def small_cfg():
    """Lookback shrunk so unit fixtures stay tiny; season 2 keeps L >= 2m."""
    return EvalConfig(lookback=8, horizons=(1, 2), season=2)


@pytest.fixture
def default_cfg():
    return EvalConfig()
