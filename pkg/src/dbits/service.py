"""Leaderboard HTTP service and the vintage-refresh cycle.

All responses are canonical JSON (sorted keys, compact separators) so
that a leaderboard body is byte-identical to the serialization of the
engine's aggregation on the same filters.
"""

from __future__ import annotations

import json
import logging
import socket
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request, Response

from .adapter import AdapterManifest
from .config import EvalConfig
from .engine import (
    EmptyGroup,
    Incident,
    NoEvaluableSeries,
    TooFewOrigins,
    aggregate_leaderboard,
    rolling_rank_history,
    run_evaluation,
)
from .forecasters import BUILTIN_MODELS, BuiltinModel, ModelDescriptor
from .ingest import (
    FetchError,
    NoNewVintage,
    ParseError,
    build_transformed_panel,
    fetch_vintage,
    parse_fredmd,
)
from .store import RunManifest, Store

log = logging.getLogger("dbits.service")

DEFAULT_REFRESH_INTERVAL_SECONDS = 6 * 3600


class StoreUnreadable(Exception):
    pass


class PortInUse(Exception):
    pass


@dataclass
class RefreshResult:
    refreshed: bool
    run_id: str | None
    incidents: list[Incident]

    def to_dict(self) -> dict:
        return {
            "result": "refreshed" if self.refreshed else "no_change",
            "run_id": self.run_id,
            "incidents": [i.to_dict() for i in self.incidents],
        }


def resolve_models(
    store: Store, include_builtins: bool = True
) -> list[BuiltinModel | AdapterManifest]:
    """Registered models plus (optionally) every builtin, deduplicated by id."""
    by_id: dict[str, BuiltinModel | AdapterManifest] = {}
    if include_builtins:
        by_id.update(BUILTIN_MODELS)
    for entry in store.list_models():
        if isinstance(entry, ModelDescriptor):
            by_id[entry.model_id] = BUILTIN_MODELS[entry.model_id]
        else:
            by_id[entry.model_id] = entry
    return [by_id[k] for k in sorted(by_id)]


def model_descriptors(models: list[BuiltinModel | AdapterManifest]) -> list[ModelDescriptor]:
    out = []
    for m in models:
        if isinstance(m, BuiltinModel):
            out.append(m.descriptor)
        else:
            out.append(
                ModelDescriptor(
                    model_id=m.model_id,
                    kind="adapter",
                    display_name=m.display_name,
                    model_type=m.model_type,
                )
            )
    return out


def refresh_cycle(
    store: Store,
    cfg: EvalConfig,
    source_url: str,
    include_builtins: bool = True,
) -> RefreshResult:
    """Fetch the source; on new content, evaluate everything and commit a run.

    Any failure is captured as an incident and leaves previously committed
    runs untouched; the cycle itself never raises.
    """
    previous = store.latest_vintage()
    try:
        fetched = fetch_vintage(source_url, previous.content_hash if previous else None)
    except FetchError as e:
        incident = Incident(None, None, "fetch", f"{type(e).__name__}: {e}")
        log.warning("refresh: %s", incident.message)
        return RefreshResult(False, None, [incident])
    if isinstance(fetched, NoNewVintage):
        return RefreshResult(False, None, [])
    raw, vintage = fetched
    try:
        panel = parse_fredmd(raw)
        transformed = build_transformed_panel(panel, cfg.space)
        models = resolve_models(store, include_builtins=include_builtins)
        result = run_evaluation(transformed, cfg, models, vintage_id=vintage.id)
        model_ids = [d.model_id for d in model_descriptors(models)]
        run = RunManifest.build(vintage.id, cfg, model_ids, len(result.records))
        store.put_vintage(vintage, raw)
        store.put_records(run, result.records)
        return RefreshResult(True, run.run_id, result.incidents)
    except (ParseError, NoEvaluableSeries, ValueError, OSError) as e:
        incident = Incident(None, None, "refresh", f"{type(e).__name__}: {e}")
        log.error("refresh failed, previous leaderboard intact: %s", incident.message)
        return RefreshResult(False, None, [incident])


# ---------------------------------------------------------------------------
# HTTP API


def canonical_json(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status_code,
        media_type="application/json",
    )


def _error(status_code: int, message: str) -> Response:
    return _json_response({"error": message}, status_code=status_code)


_LOOPBACK = {"127.0.0.1", "::1", "localhost", "testclient"}


def create_app(
    store: Store,
    cfg: EvalConfig,
    source_url: str | None = None,
    include_builtins: bool = True,
    allow_remote_refresh: bool = False,
) -> FastAPI:
    app = FastAPI(title="dbits leaderboard", docs_url=None, redoc_url=None)
    refresh_lock = threading.Lock()

    def current_models():
        return resolve_models(store, include_builtins=include_builtins)

    def checked_metric_horizon(metric: str | None, horizon) -> tuple[str, int] | Response:
        metric = metric or cfg.primary_metric
        if metric not in cfg.metrics:
            return _error(400, f"metric must be one of {list(cfg.metrics)}, got {metric!r}")
        if horizon is None:
            return _error(400, "horizon query parameter is required")
        try:
            h = int(horizon)
        except (TypeError, ValueError):
            return _error(400, f"horizon must be an integer, got {horizon!r}")
        if h not in cfg.horizons:
            return _error(400, f"horizon must be one of {list(cfg.horizons)}, got {h}")
        return metric, h

    @app.get("/api/health")
    def health():
        latest = store.latest_vintage()
        return _json_response({"status": "ok", "latest_vintage": latest.id if latest else None})

    @app.get("/api/vintages")
    def vintages():
        return _json_response({"vintages": [v.to_dict() for v in store.list_vintages()]})

    @app.get("/api/models")
    def models():
        return _json_response({"models": [d.to_dict() for d in model_descriptors(current_models())]})

    @app.get("/api/config")
    def config():
        return _json_response({"config": cfg.to_dict()})

    @app.get("/api/leaderboard")
    def leaderboard(metric: str | None = None, horizon: str | None = None, vintage: str | None = None):
        checked = checked_metric_horizon(metric, horizon)
        if isinstance(checked, Response):
            return checked
        metric_name, h = checked
        if vintage is None:
            latest = store.latest_vintage()
            vintage = latest.id if latest else None
        records = store.query_records(vintage=vintage, horizon=h, metric=metric_name)
        try:
            rows = aggregate_leaderboard(records, metric_name, h, vintage)
        except EmptyGroup:
            rows = []
        return _json_response(
            {
                "metric": metric_name,
                "horizon": h,
                "vintage": vintage,
                "rows": [r.to_dict() for r in rows],
            }
        )

    @app.get("/api/history")
    def history(
        metric: str | None = None,
        horizon: str | None = None,
        window: int = 24,
        vintage: str | None = None,
        model: str | None = None,
    ):
        checked = checked_metric_horizon(metric, horizon)
        if isinstance(checked, Response):
            return checked
        metric_name, h = checked
        if window < 1:
            return _error(400, f"window must be >= 1, got {window}")
        if model is not None:
            known = {d.model_id for d in model_descriptors(current_models())}
            if model not in known:
                return _error(404, f"unknown model {model!r}")
        if vintage is None:
            latest = store.latest_vintage()
            vintage = latest.id if latest else None
        records = store.query_records(vintage=vintage, horizon=h, metric=metric_name, model=model)
        payload = {
            "metric": metric_name,
            "horizon": h,
            "vintage": vintage,
            "window": window,
            "points": [],
        }
        try:
            points = rolling_rank_history(records, metric_name, h, window)
            payload["points"] = [p.to_dict() for p in points]
        except TooFewOrigins as e:
            payload["warning"] = f"TooFewOrigins: {e}"
        return _json_response(payload)

    @app.get("/api/records")
    def records(
        model: str | None = None,
        series: str | None = None,
        horizon: int | None = None,
        metric: str | None = None,
        vintage: str | None = None,
        limit: int = 100,
        offset: int = 0,
    ):
        if limit < 1 or limit > 10000:
            return _error(400, f"limit must be in 1..10000, got {limit}")
        if offset < 0:
            return _error(400, f"offset must be >= 0, got {offset}")
        matched = store.query_records(
            vintage=vintage, model=model, series=series, horizon=horizon, metric=metric
        )
        page = matched[offset : offset + limit]
        return _json_response(
            {
                "total": len(matched),
                "limit": limit,
                "offset": offset,
                "records": [r.to_dict() for r in page],
            }
        )

    @app.post("/api/refresh")
    def refresh(request: Request):
        client = request.client.host if request.client else None
        if not allow_remote_refresh and client is not None and client not in _LOOPBACK:
            return _error(403, "refresh is localhost-only")
        if source_url is None:
            return _error(400, "no source_url configured")
        with refresh_lock:
            result = refresh_cycle(store, cfg, source_url, include_builtins=include_builtins)
        return _json_response(result.to_dict())

    return app


class RefreshLoop:
    """Background poller calling refresh_cycle at a fixed interval."""

    def __init__(self, store, cfg, source_url, interval_seconds, include_builtins=True):
        self._stop = threading.Event()
        self._args = (store, cfg, source_url)
        self._include_builtins = include_builtins
        self._interval = interval_seconds
        self._thread = threading.Thread(target=self._run, daemon=True, name="dbits-refresh")

    def _run(self):
        store, cfg, source_url = self._args
        while not self._stop.is_set():
            try:
                refresh_cycle(store, cfg, source_url, include_builtins=self._include_builtins)
            except Exception:  # pragma: no cover - refresh_cycle already shields
                log.exception("refresh loop iteration failed")
            self._stop.wait(self._interval)

    def start(self):
        self._thread.start()

    def stop(self):
        self._stop.set()


def serve(
    store_root: str,
    cfg: EvalConfig,
    source_url: str | None,
    host: str = "127.0.0.1",
    port: int = 8080,
    refresh_interval_seconds: int = DEFAULT_REFRESH_INTERVAL_SECONDS,
    include_builtins: bool = True,
) -> None:
    """Run the API server plus the background refresh loop (blocking)."""
    import uvicorn

    try:
        store = Store(store_root)
        store.list_runs()
    except OSError as e:
        raise StoreUnreadable(f"cannot open store at {store_root}: {e}") from e
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            probe.bind((host, port))
        except OSError as e:
            raise PortInUse(f"cannot bind {host}:{port}: {e}") from e
    app = create_app(store, cfg, source_url, include_builtins=include_builtins)
    loop = None
    if source_url is not None:
        loop = RefreshLoop(store, cfg, source_url, refresh_interval_seconds, include_builtins)
        loop.start()
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        if loop is not None:
            loop.stop()
