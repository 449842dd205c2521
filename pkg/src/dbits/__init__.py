"""dbits: rolling-origin forecasting benchmark and leaderboard for
macroeconomic indicator panels in the FRED-MD file format."""

from .config import EvalConfig
from .engine import (
    LeaderboardRow,
    MetricRecord,
    RankHistoryPoint,
    aggregate_leaderboard,
    make_rolling_splits,
    rolling_rank_history,
    run_evaluation,
)
from .forecasters import ForecastOutput, ForecastTask, ModelDescriptor
from .ingest import (
    SeriesPanel,
    TransformedPanel,
    Vintage,
    apply_tcode,
    build_transformed_panel,
    fetch_vintage,
    parse_fredmd,
)
from .store import RunManifest, Store

__version__ = "0.1.0"

__all__ = [
    "EvalConfig",
    "ForecastOutput",
    "ForecastTask",
    "LeaderboardRow",
    "MetricRecord",
    "ModelDescriptor",
    "RankHistoryPoint",
    "RunManifest",
    "SeriesPanel",
    "Store",
    "TransformedPanel",
    "Vintage",
    "aggregate_leaderboard",
    "apply_tcode",
    "build_transformed_panel",
    "fetch_vintage",
    "make_rolling_splits",
    "parse_fredmd",
    "rolling_rank_history",
    "run_evaluation",
]
