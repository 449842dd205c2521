"""Rolling-origin evaluation: splits, metrics, aggregation, rank history."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .adapter import AdapterError, AdapterManifest, invoke_adapter
from .config import EvalConfig
from .forecasters import (
    BUILTIN_MODELS,
    BuiltinModel,
    ForecastOutput,
    ForecastTask,
    ModelDescriptor,
    ModelInputError,
    historical_average,
    naive_last_value,
)
from .ingest import TransformedPanel

log = logging.getLogger("dbits.engine")

DEFAULT_TRAILING_ORIGINS = 24


class SeriesTooShort(ValueError):
    """No valid origin exists for any configured horizon."""


class NoEvaluableSeries(ValueError):
    pass


class EmptyGroup(ValueError):
    pass


class TooFewOrigins(ValueError):
    pass


class MaseUndefined(ValueError):
    """The in-window seasonal-naive scale is zero."""


@dataclass(frozen=True)
class MetricRecord:
    vintage_id: str
    model_id: str
    series_id: str
    origin_index: int
    horizon: int
    metric_name: str
    value: float
    substituted: str | None = None

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value >= 0):
            raise ValueError(
                f"metric value must be finite and >= 0, got {self.value!r} "
                f"for {self.metric_name} of {self.model_id}/{self.series_id}"
            )

    def sort_key(self):
        return (
            self.vintage_id,
            self.model_id,
            self.series_id,
            self.origin_index,
            self.horizon,
            self.metric_name,
        )

    def to_dict(self) -> dict:
        return {
            "vintage_id": self.vintage_id,
            "model_id": self.model_id,
            "series_id": self.series_id,
            "origin_index": self.origin_index,
            "horizon": self.horizon,
            "metric_name": self.metric_name,
            "value": self.value,
            "substituted": self.substituted,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricRecord":
        return cls(
            vintage_id=doc["vintage_id"],
            model_id=doc["model_id"],
            series_id=doc["series_id"],
            origin_index=int(doc["origin_index"]),
            horizon=int(doc["horizon"]),
            metric_name=doc["metric_name"],
            value=float(doc["value"]),
            substituted=doc.get("substituted"),
        )


@dataclass(frozen=True)
class LeaderboardRow:
    model_id: str
    metric_name: str
    horizon: int
    score: float
    n_records: int
    rank: int

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "metric_name": self.metric_name,
            "horizon": self.horizon,
            "score": self.score,
            "n_records": self.n_records,
            "rank": self.rank,
        }


@dataclass(frozen=True)
class RankHistoryPoint:
    model_id: str
    metric_name: str
    horizon: int
    window_end_origin: int
    trailing_score: float
    trailing_rank: int

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "metric_name": self.metric_name,
            "horizon": self.horizon,
            "window_end_origin": self.window_end_origin,
            "trailing_score": self.trailing_score,
            "trailing_rank": self.trailing_rank,
        }


@dataclass(frozen=True)
class Incident:
    model_id: str | None
    series_id: str | None
    stage: str
    message: str

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "series_id": self.series_id,
            "stage": self.stage,
            "message": self.message,
        }


@dataclass
class EvalResult:
    records: list[MetricRecord]
    incidents: list[Incident]
    mase_dropped: dict[str, int]


# ---------------------------------------------------------------------------
# Splits


def usable_range(column: np.ndarray) -> tuple[int, int] | None:
    """Longest contiguous fully observed index range [s, e]; latest wins ties."""
    observed = ~np.isnan(np.asarray(column, dtype=float))
    best: tuple[int, int] | None = None
    start = None
    for i, ok in enumerate([*observed, False]):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if best is None or (i - 1 - start) >= (best[1] - best[0]):
                best = (start, i - 1)
            start = None
    return best


def make_rolling_splits(
    panel: TransformedPanel, cfg: EvalConfig, series_id: str
) -> list[tuple[int, int]]:
    """All (origin_index, horizon) pairs for one series under the config.

    Origins step by ``cfg.stride`` from the earliest index with a full
    look-back window inside the series' usable observed range; a pair
    exists for each configured horizon whose target stays in range.
    """
    rng = usable_range(panel.column(series_id))
    if rng is None:
        raise SeriesTooShort(f"{series_id}: no observed values")
    s, e = rng
    first_origin = s + cfg.lookback - 1
    splits = [
        (t, h)
        for t in range(first_origin, e + 1, cfg.stride)
        for h in cfg.horizons
        if t + h <= e
    ]
    if not splits:
        raise SeriesTooShort(
            f"{series_id}: usable range [{s}, {e}] leaves no room for "
            f"lookback {cfg.lookback} plus any horizon in {list(cfg.horizons)}"
        )
    return splits


# ---------------------------------------------------------------------------
# Metrics


def seasonal_naive_scale(window: Sequence[float], m: int) -> float:
    """In-window MAE of the one-step seasonal-naive reference."""
    w = np.asarray(window, dtype=float)
    if w.size <= m:
        raise MaseUndefined(f"window of {w.size} has no {m}-apart pairs")
    return float(np.mean(np.abs(w[m:] - w[:-m])))


def compute_metrics(
    forecast: float, actual: float, window: Sequence[float], cfg: EvalConfig
) -> dict[str, float]:
    """Per-record values for each configured metric.

    RMSE is stored per-record as the absolute error; aggregation squares
    then roots. MASE is omitted (left to the caller's diagnostics) when
    the in-window seasonal-naive scale is zero.
    """
    err = abs(float(forecast) - float(actual))
    out: dict[str, float] = {}
    for name in cfg.metrics:
        if name in ("MAE", "RMSE"):
            out[name] = err
        elif name == "sMAPE":
            denom = abs(forecast) + abs(actual)
            out[name] = 0.0 if denom == 0 else 200.0 * err / denom
        elif name == "MASE":
            try:
                scale = seasonal_naive_scale(window, cfg.season)
            except MaseUndefined:
                continue
            if scale == 0.0:
                continue
            out[name] = err / scale
    return out


# ---------------------------------------------------------------------------
# Execution


def _fallback_chain(model: BuiltinModel, task: ForecastTask, history: np.ndarray, cfg: EvalConfig):
    """model -> historical_average -> naive last value; reports the substitute."""
    try:
        if model.needs_history:
            return model.fit_predict(task, history), None
        if model.needs_season:
            return model.fit_predict(task, m=cfg.season), None
        return model.fit_predict(task), None
    except ModelInputError:
        pass
    try:
        out = historical_average(task)
        return replace(out, model_id=model.descriptor.model_id), "historical_average"
    except ModelInputError:
        out = naive_last_value(task)
        return replace(out, model_id=model.descriptor.model_id), "naive_last_value"


def _series_tasks(
    panel: TransformedPanel, cfg: EvalConfig, series_id: str
) -> list[tuple[ForecastTask, dict[int, float], int]]:
    """Group splits by origin: (task, actuals per horizon, range start)."""
    splits = make_rolling_splits(panel, cfg, series_id)
    column = panel.column(series_id)
    by_origin: dict[int, list[int]] = {}
    for t, h in splits:
        by_origin.setdefault(t, []).append(h)
    out = []
    s, _e = usable_range(column)  # type: ignore[misc]
    for t in sorted(by_origin):
        horizons = tuple(sorted(by_origin[t]))
        window = column[t - cfg.lookback + 1 : t + 1]
        task = ForecastTask(
            series_id=series_id, origin_index=t, window=window, horizons=horizons
        )
        actuals = {h: float(column[t + h]) for h in horizons}
        out.append((task, actuals, s))
    return out


def run_evaluation(
    panel: TransformedPanel,
    cfg: EvalConfig,
    models: Sequence[BuiltinModel | ModelDescriptor | AdapterManifest],
    vintage_id: str = "adhoc",
) -> EvalResult:
    """Evaluate every model over every rolling split of every series.

    Builtin failures on degenerate windows fall back per the documented
    chain and mark the record; adapter failures produce no records but
    an incident. Deterministic given (panel, cfg, models, seed).
    """
    resolved = _resolve_models(models)
    if not resolved:
        raise NoEvaluableSeries("no models to evaluate")

    incidents: list[Incident] = []
    mase_dropped: dict[str, int] = {}
    per_series: dict[str, list[tuple[ForecastTask, dict[int, float], int]]] = {}
    for sid in panel.series_ids:
        try:
            per_series[sid] = _series_tasks(panel, cfg, sid)
        except SeriesTooShort as e:
            incidents.append(Incident(None, sid, "split", str(e)))
            log.info("skipping series %s: %s", sid, e)
    if not per_series:
        raise NoEvaluableSeries("no series admits a single rolling split")

    records: list[MetricRecord] = []

    def emit(output: ForecastOutput, actuals, window, substituted):
        for h in sorted(output.forecasts):
            metrics = compute_metrics(output.forecasts[h], actuals[h], window, cfg)
            if "MASE" in cfg.metrics and "MASE" not in metrics:
                mase_dropped[output.series_id] = mase_dropped.get(output.series_id, 0) + 1
            for name, value in metrics.items():
                records.append(
                    MetricRecord(
                        vintage_id=vintage_id,
                        model_id=output.model_id,
                        series_id=output.series_id,
                        origin_index=output.origin_index,
                        horizon=h,
                        metric_name=name,
                        value=value,
                        substituted=substituted,
                    )
                )

    for model in resolved:
        if isinstance(model, BuiltinModel):
            for sid, tasks in per_series.items():
                column = panel.column(sid)
                for task, actuals, s in tasks:
                    history = column[s : task.origin_index + 1]
                    output, substituted = _fallback_chain(model, task, history, cfg)
                    emit(output, actuals, task.window, substituted)
        else:
            batch = [task for tasks in per_series.values() for task, _, _ in tasks]
            try:
                outputs = invoke_adapter(model, batch)
            except AdapterError as e:
                incidents.append(Incident(model.model_id, None, "adapter", str(e)))
                log.warning("adapter %s failed, no records: %s", model.model_id, e)
                continue
            actual_lookup = {
                (t.series_id, t.origin_index): (a, t.window)
                for tasks in per_series.values()
                for t, a, _ in tasks
            }
            for output in outputs:
                actuals, window = actual_lookup[(output.series_id, output.origin_index)]
                emit(output, actuals, window, None)

    records.sort(key=MetricRecord.sort_key)
    return EvalResult(records=records, incidents=incidents, mase_dropped=mase_dropped)


def _resolve_models(
    models: Sequence[BuiltinModel | ModelDescriptor | AdapterManifest],
) -> list[BuiltinModel | AdapterManifest]:
    resolved: list[BuiltinModel | AdapterManifest] = []
    seen = set()
    for m in models:
        if isinstance(m, ModelDescriptor):
            if m.kind != "builtin":
                raise ValueError(f"descriptor {m.model_id!r} is not builtin; pass its manifest")
            m = BUILTIN_MODELS[m.model_id]
        mid = m.descriptor.model_id if isinstance(m, BuiltinModel) else m.model_id
        if mid in seen:
            raise ValueError(f"duplicate model_id {mid!r}")
        seen.add(mid)
        resolved.append(m)
    return resolved


# ---------------------------------------------------------------------------
# Aggregation


def _group_scores(records: Iterable[MetricRecord], metric_name: str) -> dict[str, tuple[float, int]]:
    by_model: dict[str, list[float]] = {}
    for r in records:
        by_model.setdefault(r.model_id, []).append(r.value)
    out = {}
    for mid, values in by_model.items():
        arr = np.asarray(values)
        if metric_name == "RMSE":
            score = float(np.sqrt(np.mean(arr * arr)))
        else:
            score = float(np.mean(arr))
        out[mid] = (score, len(values))
    return out


def aggregate_leaderboard(
    records: Sequence[MetricRecord],
    metric_name: str,
    horizon: int,
    vintage_id: str | None = None,
) -> list[LeaderboardRow]:
    """Mean score per model over series x origins; rank 1 = smallest.

    Ties are broken by ascending model_id. RMSE aggregates as the root
    of the mean squared per-record error.
    """
    group = [
        r
        for r in records
        if r.metric_name == metric_name
        and r.horizon == horizon
        and (vintage_id is None or r.vintage_id == vintage_id)
    ]
    if not group:
        raise EmptyGroup(
            f"no records for metric={metric_name} horizon={horizon} vintage={vintage_id}"
        )
    scores = _group_scores(group, metric_name)
    ordered = sorted(scores.items(), key=lambda kv: (kv[1][0], kv[0]))
    return [
        LeaderboardRow(
            model_id=mid,
            metric_name=metric_name,
            horizon=horizon,
            score=score,
            n_records=n,
            rank=i + 1,
        )
        for i, (mid, (score, n)) in enumerate(ordered)
    ]


def rolling_rank_history(
    records: Sequence[MetricRecord],
    metric_name: str,
    horizon: int,
    trailing_origins: int = DEFAULT_TRAILING_ORIGINS,
) -> list[RankHistoryPoint]:
    """Re-rank over a trailing window of origins, one point per (model, origin)."""
    if trailing_origins < 1:
        raise ValueError(f"trailing window must be >= 1, got {trailing_origins}")
    group = [r for r in records if r.metric_name == metric_name and r.horizon == horizon]
    origins = sorted({r.origin_index for r in group})
    if len(origins) < trailing_origins:
        raise TooFewOrigins(
            f"need >= {trailing_origins} distinct origins, got {len(origins)}"
        )
    by_origin: dict[int, list[MetricRecord]] = {}
    for r in group:
        by_origin.setdefault(r.origin_index, []).append(r)

    points: list[RankHistoryPoint] = []
    for i in range(trailing_origins - 1, len(origins)):
        window = origins[i - trailing_origins + 1 : i + 1]
        window_records = [r for o in window for r in by_origin[o]]
        scores = _group_scores(window_records, metric_name)
        ordered = sorted(scores.items(), key=lambda kv: (kv[1][0], kv[0]))
        for rank, (mid, (score, _n)) in enumerate(ordered, start=1):
            points.append(
                RankHistoryPoint(
                    model_id=mid,
                    metric_name=metric_name,
                    horizon=horizon,
                    window_end_origin=origins[i],
                    trailing_score=score,
                    trailing_rank=rank,
                )
            )
    return points
