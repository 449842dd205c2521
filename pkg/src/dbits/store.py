"""Append-oriented on-disk store for vintages, models, and metric records.

Layout under the store root:

    runs/<run_id>/manifest    JSON run manifest
    runs/<run_id>/records     one canonical JSON record per line, LF
    runs/<run_id>/COMMIT      marker; presence defines visibility
    models/<model_id>/manifest
    vintages/<id>/manifest + data.csv + COMMIT

Writers hold an advisory lock on the root; readers never see a run
without its COMMIT marker, so interrupted commits are invisible.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from filelock import FileLock

from .adapter import AdapterManifest, ConformanceReport
from .config import EvalConfig
from .engine import MetricRecord
from .forecasters import ModelDescriptor
from .ingest import Vintage


class StoreError(Exception):
    pass


class DuplicateRun(StoreError):
    pass


class DuplicateModelId(StoreError):
    pass


class ConformanceFailed(StoreError):
    pass


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    vintage_id: str
    config: dict
    model_ids: tuple[str, ...]
    created_at: str
    record_count: int

    @classmethod
    def build(
        cls,
        vintage_id: str,
        cfg: EvalConfig,
        model_ids: Sequence[str],
        record_count: int,
        created_at: datetime | None = None,
    ) -> "RunManifest":
        ids = tuple(sorted(model_ids))
        digest = hashlib.sha256(
            json.dumps(
                {"vintage_id": vintage_id, "config": cfg.to_dict(), "model_ids": list(ids)},
                sort_keys=True,
                separators=(",", ":"),
            ).encode("utf-8")
        ).hexdigest()
        stamp = (created_at or datetime.now(timezone.utc)).isoformat()
        return cls(
            run_id=digest,
            vintage_id=vintage_id,
            config=cfg.to_dict(),
            model_ids=ids,
            created_at=stamp,
            record_count=record_count,
        )

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "vintage_id": self.vintage_id,
            "config": self.config,
            "model_ids": list(self.model_ids),
            "created_at": self.created_at,
            "record_count": self.record_count,
        }


def record_line(record: MetricRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True, separators=(",", ":"))


def records_digest(records: Sequence[MetricRecord]) -> str:
    h = hashlib.sha256()
    for r in records:
        h.update(record_line(r).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


class Store:
    """Filesystem-backed store; one writer at a time, many readers."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("runs", "models", "vintages"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.root / ".lock"))
        # Test seam: called with a label before every durable mutation so
        # crash-consistency tests can interrupt a commit at any point.
        self.failpoint: Callable[[str], None] | None = None

    # -- low-level fs ops, all routed through the failpoint ---------------

    def _op(self, label: str):
        if self.failpoint is not None:
            self.failpoint(label)

    def _write_file(self, path: Path, data: bytes, label: str):
        self._op(f"write:{label}")
        path.write_bytes(data)

    def _rename(self, src: Path, dst: Path, label: str):
        self._op(f"rename:{label}")
        os.replace(src, dst)

    def _commit_marker(self, directory: Path, label: str):
        tmp = directory / ".COMMIT.tmp"
        self._write_file(tmp, b"", f"{label}-marker-tmp")
        self._rename(tmp, directory / "COMMIT", f"{label}-marker")

    def _atomic_dir(self, final_dir: Path, files: dict[str, bytes], label: str):
        tmp_dir = final_dir.parent / f".tmp-{final_dir.name}-{os.getpid()}"
        if tmp_dir.exists():
            shutil.rmtree(tmp_dir)
        self._op(f"mkdir:{label}")
        tmp_dir.mkdir(parents=True)
        try:
            for name, data in files.items():
                self._write_file(tmp_dir / name, data, f"{label}/{name}")
            if final_dir.exists():
                shutil.rmtree(final_dir)
            self._rename(tmp_dir, final_dir, f"{label}-dir")
        except BaseException:
            shutil.rmtree(tmp_dir, ignore_errors=True)
            raise
        self._commit_marker(final_dir, label)

    # -- runs --------------------------------------------------------------

    def put_records(self, run: RunManifest, records: Sequence[MetricRecord]) -> bool:
        """Atomically commit one run; returns False for an identical re-commit.

        A run directory is visible only once its COMMIT marker exists, so
        interruption at any point leaves it either fully present or absent.
        """
        records = sorted(records, key=MetricRecord.sort_key)
        if len(records) != run.record_count:
            raise StoreError(
                f"run {run.run_id}: manifest record_count {run.record_count} "
                f"!= {len(records)} records"
            )
        digest = records_digest(records)
        manifest_doc = dict(run.to_dict(), content_hash=digest)
        with self._lock:
            run_dir = self.root / "runs" / run.run_id
            if (run_dir / "COMMIT").exists():
                existing = json.loads((run_dir / "manifest").read_text(encoding="utf-8"))
                if existing.get("content_hash") == digest:
                    return False
                raise DuplicateRun(
                    f"run {run.run_id} already committed with different content"
                )
            if run_dir.exists():
                shutil.rmtree(run_dir)  # stale uncommitted leftovers
            lines = "".join(record_line(r) + "\n" for r in records)
            self._atomic_dir(
                run_dir,
                {
                    "manifest": json.dumps(manifest_doc, sort_keys=True, indent=1).encode("utf-8"),
                    "records": lines.encode("utf-8"),
                },
                f"run-{run.run_id[:12]}",
            )
        return True

    def _committed_run_dirs(self) -> list[Path]:
        runs = self.root / "runs"
        return sorted(
            d for d in runs.iterdir() if d.is_dir() and (d / "COMMIT").exists()
        )

    def list_runs(self) -> list[RunManifest]:
        out = []
        for d in self._committed_run_dirs():
            doc = json.loads((d / "manifest").read_text(encoding="utf-8"))
            out.append(
                RunManifest(
                    run_id=doc["run_id"],
                    vintage_id=doc["vintage_id"],
                    config=doc["config"],
                    model_ids=tuple(doc["model_ids"]),
                    created_at=doc["created_at"],
                    record_count=doc["record_count"],
                )
            )
        return out

    def query_records(
        self,
        vintage: str | None = None,
        model: str | None = None,
        series: str | None = None,
        horizon: int | None = None,
        metric: str | None = None,
    ) -> list[MetricRecord]:
        """Exact filter conjunction over all committed runs, canonical order."""
        out: list[MetricRecord] = []
        for d in self._committed_run_dirs():
            with (d / "records").open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    r = MetricRecord.from_dict(json.loads(line))
                    if vintage is not None and r.vintage_id != vintage:
                        continue
                    if model is not None and r.model_id != model:
                        continue
                    if series is not None and r.series_id != series:
                        continue
                    if horizon is not None and r.horizon != horizon:
                        continue
                    if metric is not None and r.metric_name != metric:
                        continue
                    out.append(r)
        out.sort(key=MetricRecord.sort_key)
        return out

    # -- vintages ------------------------------------------------------...

    def put_vintage(self, vintage: Vintage, raw: bytes) -> bool:
        """Persist a vintage snapshot; same id + same hash is a no-op."""
        with self._lock:
            vdir = self.root / "vintages" / vintage.id
            if (vdir / "COMMIT").exists():
                existing = json.loads((vdir / "manifest").read_text(encoding="utf-8"))
                if existing.get("content_hash") == vintage.content_hash:
                    return False
                # Same month re-published with new content: latest wins.
            self._atomic_dir(
                vdir,
                {
                    "manifest": json.dumps(vintage.to_dict(), sort_keys=True, indent=1).encode(
                        "utf-8"
                    ),
                    "data.csv": raw,
                },
                f"vintage-{vintage.id}",
            )
        return True

    def list_vintages(self) -> list[Vintage]:
        out = []
        vroot = self.root / "vintages"
        for d in sorted(vroot.iterdir()):
            if d.is_dir() and (d / "COMMIT").exists():
                out.append(Vintage.from_dict(json.loads((d / "manifest").read_text("utf-8"))))
        return out

    def latest_vintage(self) -> Vintage | None:
        vintages = self.list_vintages()
        return vintages[-1] if vintages else None

    def vintage_bytes(self, vintage_id: str) -> bytes:
        path = self.root / "vintages" / vintage_id / "data.csv"
        if not path.is_file():
            raise StoreError(f"no stored vintage {vintage_id!r}")
        return path.read_bytes()

    # -- model registry ----------------------------------------------------

    def register_model(
        self,
        entry: ModelDescriptor | AdapterManifest,
        conformance: ConformanceReport | None = None,
    ) -> None:
        """Durably register a model; adapters need a passing conformance report."""
        if isinstance(entry, AdapterManifest):
            if conformance is None or not conformance.passed:
                failed = (
                    [e.task_name for e in conformance.entries if not e.ok]
                    if conformance
                    else ["no conformance report"]
                )
                raise ConformanceFailed(
                    f"adapter {entry.model_id!r} failed conformance: {failed}"
                )
            doc = dict(entry.to_dict(), kind="adapter")
            model_id = entry.model_id
        else:
            doc = entry.to_dict()
            model_id = entry.model_id
        with self._lock:
            mdir = self.root / "models" / model_id
            if (mdir / "COMMIT").exists():
                raise DuplicateModelId(f"model {model_id!r} is already registered")
            self._atomic_dir(
                mdir,
                {"manifest": json.dumps(doc, sort_keys=True, indent=1).encode("utf-8")},
                f"model-{model_id}",
            )

    def list_models(self) -> list[ModelDescriptor | AdapterManifest]:
        out: list[ModelDescriptor | AdapterManifest] = []
        mroot = self.root / "models"
        for d in sorted(mroot.iterdir()):
            if not (d.is_dir() and (d / "COMMIT").exists()):
                continue
            doc = json.loads((d / "manifest").read_text(encoding="utf-8"))
            if doc.get("kind") == "adapter":
                out.append(
                    AdapterManifest(
                        model_id=doc["model_id"],
                        display_name=doc["display_name"],
                        model_type=doc["model_type"],
                        command=tuple(doc["command"]),
                        input_window_len=int(doc["input_window_len"]),
                        horizons_supported="any"
                        if doc["horizons_supported"] == "any"
                        else tuple(doc["horizons_supported"]),
                        timeout_seconds=int(doc["timeout_seconds"]),
                        workdir=Path(doc["workdir"]) if doc.get("workdir") else None,
                    )
                )
            else:
                out.append(
                    ModelDescriptor(
                        model_id=doc["model_id"],
                        kind=doc["kind"],
                        display_name=doc["display_name"],
                        model_type=doc["model_type"],
                    )
                )
        return out
