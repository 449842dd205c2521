"""Command-line interface: ingest, eval, rank, adapter-test, register, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .adapter import ManifestError, conformance_check, load_manifest
from .config import ConfigInvalid, EvalConfig, load_config, override_config
from .engine import EmptyGroup, aggregate_leaderboard, run_evaluation
from .forecasters import BUILTIN_MODELS
from .ingest import (
    FetchError,
    NoNewVintage,
    ParseError,
    build_transformed_panel,
    fetch_vintage,
    parse_fredmd,
)
from .service import model_descriptors, resolve_models, serve as run_server
from .store import DuplicateModelId, RunManifest, Store


def _config_options(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True), help="JSON config file."),
        click.option("--lookback", type=int, default=None),
        click.option("--horizons", default=None, help="Comma-separated, e.g. 12,24,36."),
        click.option("--stride", type=int, default=None),
        click.option("--metrics", default=None, help="Comma-separated subset of MAE,RMSE,sMAPE,MASE."),
        click.option("--primary-metric", default=None),
        click.option("--season", type=int, default=None),
        click.option("--space", type=click.Choice(["transformed", "raw"]), default=None),
        click.option("--seed", type=int, default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _build_config(config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed) -> EvalConfig:
    try:
        cfg = load_config(config_path) if config_path else EvalConfig()
        return override_config(
            cfg,
            lookback=lookback,
            horizons=tuple(int(h) for h in horizons.split(",")) if horizons else None,
            stride=stride,
            metrics=tuple(m.strip() for m in metrics.split(",")) if metrics else None,
            primary_metric=primary_metric,
            season=season,
            space=space,
            seed=seed,
        )
    except ConfigInvalid as e:
        raise click.ClickException(str(e))


store_option = click.option(
    "--store",
    "store_root",
    envvar="DBITS_STORE",
    default="./dbits_store",
    show_default=True,
    help="Store root directory (env: DBITS_STORE).",
)


@click.group()
def main():
    """Rolling-origin forecasting benchmark over FRED-MD-format panels."""


@main.command()
@click.option("--source", required=True, help="Vintage URL or local file path.")
@store_option
def ingest(source, store_root):
    """Fetch a vintage, validate it parses, and store it."""
    store = Store(store_root)
    previous = store.latest_vintage()
    try:
        fetched = fetch_vintage(source, previous.content_hash if previous else None)
    except FetchError as e:
        raise click.ClickException(f"fetch failed: {e}")
    if isinstance(fetched, NoNewVintage):
        click.echo(f"no new vintage (hash {fetched.content_hash[:12]} unchanged)")
        return
    raw, vintage = fetched
    try:
        panel = parse_fredmd(raw)
    except ParseError as e:
        raise click.ClickException(f"vintage does not parse: {type(e).__name__}: {e}")
    store.put_vintage(vintage, raw)
    click.echo(
        f"stored vintage {vintage.id} ({len(panel.dates)} months x "
        f"{len(panel.series_ids)} series, hash {vintage.content_hash[:12]})"
    )


@main.command("eval")
@_config_options
@store_option
@click.option("--vintage", "vintage_id", default=None, help="Vintage id (default: latest stored).")
@click.option("--builtins/--no-builtins", default=True, show_default=True, help="Include builtin models.")
def eval_cmd(config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed, store_root, vintage_id, builtins):
    """Run the full evaluation on a stored vintage and commit the records."""
    cfg = _build_config(config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed)
    store = Store(store_root)
    if vintage_id is None:
        latest = store.latest_vintage()
        if latest is None:
            raise click.ClickException("no stored vintage; run `dbits ingest` first")
        vintage_id = latest.id
    raw = store.vintage_bytes(vintage_id)
    panel = build_transformed_panel(parse_fredmd(raw), cfg.space)
    models = resolve_models(store, include_builtins=builtins)
    if not models:
        raise click.ClickException("no models (pass --builtins or register some)")
    result = run_evaluation(panel, cfg, models, vintage_id=vintage_id)
    run = RunManifest.build(
        vintage_id, cfg, [d.model_id for d in model_descriptors(models)], len(result.records)
    )
    fresh = store.put_records(run, result.records)
    click.echo(
        f"run {run.run_id[:12]} {'committed' if fresh else 'already present'} "
        f"({len(result.records)} records, {len(result.incidents)} incidents)"
    )
    for incident in result.incidents:
        click.echo(f"  incident [{incident.stage}] {incident.model_id or incident.series_id}: {incident.message}")


@main.command()
@click.option("--metric", default="MASE", show_default=True)
@click.option("--horizon", type=int, required=True)
@click.option("--vintage", "vintage_id", default=None)
@store_option
def rank(metric, horizon, vintage_id, store_root):
    """Print the leaderboard for one (metric, horizon, vintage) context."""
    store = Store(store_root)
    if vintage_id is None:
        latest = store.latest_vintage()
        vintage_id = latest.id if latest else None
    records = store.query_records(vintage=vintage_id, horizon=horizon, metric=metric)
    try:
        rows = aggregate_leaderboard(records, metric, horizon, vintage_id)
    except EmptyGroup as e:
        raise click.ClickException(str(e))
    click.echo(f"{'rank':>4}  {'model':<24} {'score':>14}  {'n':>6}")
    for row in rows:
        click.echo(f"{row.rank:>4}  {row.model_id:<24} {row.score:>14.6g}  {row.n_records:>6}")


@main.command("adapter-test")
@click.argument("manifest_dir", type=click.Path(exists=True, file_okay=False))
@_config_options
def adapter_test(manifest_dir, config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed):
    """Validate an adapter manifest and run the conformance suite."""
    cfg = _build_config(config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed)
    try:
        manifest = load_manifest(manifest_dir, cfg)
    except ManifestError as e:
        raise click.ClickException(f"manifest invalid: {type(e).__name__}: {e}")
    report = conformance_check(manifest, cfg)
    for entry in report.entries:
        status = "PASS" if entry.ok else f"FAIL ({entry.error})"
        click.echo(f"  {entry.task_name:<14} {status}")
    if not report.passed:
        raise click.ClickException(f"adapter {manifest.model_id!r} failed conformance")
    click.echo(f"adapter {manifest.model_id!r} passed {len(report.entries)}/{len(report.entries)}")


@main.command()
@click.argument("manifest_dir", type=click.Path(exists=True, file_okay=False), required=False)
@click.option("--builtin", "builtin_id", default=None, help="Register a builtin by id, or 'all'.")
@_config_options
@store_option
def register(manifest_dir, builtin_id, config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed, store_root):
    """Register an adapter (from its manifest directory) or a builtin model."""
    cfg = _build_config(config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed)
    store = Store(store_root)
    if (manifest_dir is None) == (builtin_id is None):
        raise click.ClickException("pass exactly one of MANIFEST_DIR or --builtin")
    if builtin_id is not None:
        ids = sorted(BUILTIN_MODELS) if builtin_id == "all" else [builtin_id]
        for mid in ids:
            if mid not in BUILTIN_MODELS:
                raise click.ClickException(f"unknown builtin {mid!r}; have {sorted(BUILTIN_MODELS)}")
            try:
                store.register_model(BUILTIN_MODELS[mid].descriptor)
                click.echo(f"registered builtin {mid}")
            except DuplicateModelId as e:
                raise click.ClickException(str(e))
        return
    try:
        manifest = load_manifest(manifest_dir, cfg)
    except ManifestError as e:
        raise click.ClickException(f"manifest invalid: {type(e).__name__}: {e}")
    report = conformance_check(manifest, cfg)
    if not report.passed:
        for entry in report.entries:
            if not entry.ok:
                click.echo(f"  {entry.task_name}: {entry.error}", err=True)
        raise click.ClickException(f"adapter {manifest.model_id!r} failed conformance; not registered")
    try:
        store.register_model(manifest, conformance=report)
    except DuplicateModelId as e:
        raise click.ClickException(str(e))
    click.echo(f"registered adapter {manifest.model_id} (conformance 3/3)")


@main.command("serve")
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@store_option
@click.option("--source", default=None, help="Vintage source URL for the refresh loop.")
@click.option("--refresh-interval", type=int, default=21600, show_default=True, help="Seconds between refresh polls.")
@click.option("--builtins/--no-builtins", default=True, show_default=True)
@_config_options
def serve_cmd(port, host, store_root, source, refresh_interval, builtins, config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed):
    """Serve the leaderboard API (and poll the source when given)."""
    cfg = _build_config(config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed)
    try:
        run_server(
            store_root,
            cfg,
            source,
            host=host,
            port=port,
            refresh_interval_seconds=refresh_interval,
            include_builtins=builtins,
        )
    except Exception as e:
        raise click.ClickException(str(e))


@main.command("show-config")
@_config_options
def show_config(config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed):
    """Print the effective configuration as JSON."""
    cfg = _build_config(config_path, lookback, horizons, stride, metrics, primary_metric, season, space, seed)
    click.echo(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))


if __name__ == "__main__":
    sys.exit(main())
