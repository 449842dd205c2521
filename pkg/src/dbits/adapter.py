"""External model scripts run as child processes over a line protocol.

One request per line on the child's stdin, one response per line on its
stdout, UTF-8 JSON:

    request:  {"id": 7, "series_id": "INDPRO", "window": [...], "horizons": [12, 24]}
    response: {"id": 7, "forecasts": {"12": 1.5, "24": 1.9}}

Responses may arrive in any order; pairing is by id. The child sees EOF
on stdin once the batch is written and is expected to exit; it is killed
after the manifest timeout plus a short grace period.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import EvalConfig
from .forecasters import MODEL_ID_RE, ForecastOutput, ForecastTask, InvalidModelId

DEFAULT_TIMEOUT_SECONDS = 60
KILL_GRACE_SECONDS = 5.0

MANIFEST_FILENAME = "manifest"


class ManifestError(ValueError):
    pass


class MissingField(ManifestError):
    def __init__(self, name: str):
        super().__init__(f"manifest is missing required field {name!r}")
        self.name = name


class BadCommand(ManifestError):
    pass


class AdapterError(Exception):
    pass


class AdapterTimeout(AdapterError):
    pass


class AdapterCrash(AdapterError):
    pass


class BadResponse(AdapterError):
    pass


class DimensionMismatch(ManifestError, AdapterError):
    """Window length or forecast horizons disagree with the configuration."""


@dataclass(frozen=True)
class AdapterManifest:
    model_id: str
    display_name: str
    model_type: str
    command: tuple[str, ...]
    input_window_len: int
    horizons_supported: tuple[int, ...] | str
    timeout_seconds: int = DEFAULT_TIMEOUT_SECONDS
    workdir: Path | None = None

    def __post_init__(self):
        if not MODEL_ID_RE.fullmatch(self.model_id):
            raise InvalidModelId(f"model_id must match [a-z0-9_-]+, got {self.model_id!r}")
        if not self.command:
            raise BadCommand("command must be a nonempty list of strings")
        if self.timeout_seconds <= 0:
            raise ManifestError(f"timeout_seconds must be positive, got {self.timeout_seconds}")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "display_name": self.display_name,
            "model_type": self.model_type,
            "command": list(self.command),
            "input_window_len": self.input_window_len,
            "horizons_supported": "any"
            if self.horizons_supported == "any"
            else list(self.horizons_supported),
            "timeout_seconds": self.timeout_seconds,
            "workdir": str(self.workdir) if self.workdir else None,
        }


def validate_manifest(doc: dict, cfg: EvalConfig, workdir: Path | None = None) -> AdapterManifest:
    """Check a parsed manifest document against the platform configuration."""
    required = ("model_id", "display_name", "model_type", "command", "input_window_len")
    for name in required:
        if name not in doc:
            raise MissingField(name)
    command = doc["command"]
    if not isinstance(command, list) or not command or not all(isinstance(c, str) for c in command):
        raise BadCommand(f"command must be a nonempty list of strings, got {command!r}")
    window_len = int(doc["input_window_len"])
    if window_len != cfg.lookback:
        raise DimensionMismatch(
            f"input_window_len {window_len} != configured look-back {cfg.lookback}"
        )
    horizons = doc.get("horizons_supported", "any")
    if horizons != "any":
        if not isinstance(horizons, list) or not all(isinstance(h, int) for h in horizons):
            raise ManifestError(f"horizons_supported must be 'any' or a list of ints, got {horizons!r}")
        unsupported = sorted(set(cfg.horizons) - set(horizons))
        if unsupported:
            raise DimensionMismatch(
                f"configured horizons {unsupported} not in horizons_supported {horizons}"
            )
        horizons = tuple(sorted(horizons))
    return AdapterManifest(
        model_id=doc["model_id"],
        display_name=doc["display_name"],
        model_type=doc["model_type"],
        command=tuple(command),
        input_window_len=window_len,
        horizons_supported=horizons,
        timeout_seconds=int(doc.get("timeout_seconds", DEFAULT_TIMEOUT_SECONDS)),
        workdir=workdir,
    )


def load_manifest(manifest_dir: str | Path, cfg: EvalConfig) -> AdapterManifest:
    """Read and validate ``<dir>/manifest`` (a JSON key/value document)."""
    manifest_dir = Path(manifest_dir)
    path = manifest_dir / MANIFEST_FILENAME
    if not path.is_file():
        raise MissingField(MANIFEST_FILENAME)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"cannot parse {path}: {e}") from e
    if not isinstance(doc, dict):
        raise ManifestError(f"{path} must hold a JSON object")
    return validate_manifest(doc, cfg, workdir=manifest_dir)


# ---------------------------------------------------------------------------
# Invocation


def _request_line(task_id: int, task: ForecastTask) -> str:
    return json.dumps(
        {
            "id": task_id,
            "series_id": task.series_id,
            "window": [float(v) for v in task.window],
            "horizons": list(task.horizons),
        },
        separators=(",", ":"),
    )


def _parse_response(line: str) -> tuple[int, dict[int, float]]:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as e:
        raise BadResponse(f"unparsable response line {line!r}: {e}") from None
    if not isinstance(doc, dict) or "id" not in doc:
        raise BadResponse(f"response line lacks an id: {line!r}")
    if not isinstance(doc["id"], int):
        raise BadResponse(f"response id must be an int: {line!r}")
    raw = doc.get("forecasts")
    if not isinstance(raw, dict):
        raise BadResponse(f"response {doc['id']} lacks a forecasts object")
    forecasts: dict[int, float] = {}
    for key, value in raw.items():
        try:
            h = int(key)
        except (TypeError, ValueError):
            raise BadResponse(f"response {doc['id']}: bad horizon key {key!r}") from None
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not np.isfinite(value):
            raise BadResponse(f"response {doc['id']}: non-numeric forecast {value!r} at h={h}")
        forecasts[h] = float(value)
    return doc["id"], forecasts


def invoke_adapter(manifest: AdapterManifest, batch: list[ForecastTask]) -> list[ForecastOutput]:
    """Run one child process for the batch and pair responses to tasks by id."""
    if not batch:
        return []
    payload = "\n".join(_request_line(i, t) for i, t in enumerate(batch)) + "\n"
    try:
        proc = subprocess.Popen(
            list(manifest.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            cwd=str(manifest.workdir) if manifest.workdir else None,
            text=True,
        )
    except OSError as e:
        raise AdapterCrash(f"{manifest.model_id}: cannot spawn {manifest.command}: {e}") from e
    try:
        stdout, stderr = proc.communicate(payload, timeout=manifest.timeout_seconds)
    except subprocess.TimeoutExpired:
        proc.kill()
        try:
            proc.communicate(timeout=KILL_GRACE_SECONDS)
        except subprocess.TimeoutExpired:
            pass
        raise AdapterTimeout(
            f"{manifest.model_id}: no complete response within {manifest.timeout_seconds}s"
        ) from None
    except BrokenPipeError:
        proc.kill()
        proc.communicate()
        raise AdapterCrash(f"{manifest.model_id}: child closed its pipes mid-batch") from None
    if proc.returncode != 0:
        raise AdapterCrash(
            f"{manifest.model_id}: exit status {proc.returncode}"
            + (f"; stderr: {stderr.strip()[:500]}" if stderr.strip() else "")
        )

    responses: dict[int, dict[int, float]] = {}
    for line in stdout.splitlines():
        if not line.strip():
            continue
        rid, forecasts = _parse_response(line)
        if rid in responses:
            raise BadResponse(f"{manifest.model_id}: duplicate response id {rid}")
        responses[rid] = forecasts

    outputs: list[ForecastOutput] = []
    for i, task in enumerate(batch):
        if i not in responses:
            raise BadResponse(f"{manifest.model_id}: no response for request id {i}")
        forecasts = responses[i]
        if set(forecasts) != set(task.horizons):
            raise DimensionMismatch(
                f"{manifest.model_id}: response {i} horizons {sorted(forecasts)} "
                f"!= requested {list(task.horizons)}"
            )
        outputs.append(
            ForecastOutput(
                model_id=manifest.model_id,
                series_id=task.series_id,
                origin_index=task.origin_index,
                forecasts=forecasts,
            )
        )
    unknown = set(responses) - set(range(len(batch)))
    if unknown:
        raise BadResponse(f"{manifest.model_id}: responses for unknown ids {sorted(unknown)}")
    return outputs


# ---------------------------------------------------------------------------
# Conformance


@dataclass(frozen=True)
class ConformanceEntry:
    task_name: str
    ok: bool
    error: str | None

    def to_dict(self) -> dict:
        return {"task_name": self.task_name, "ok": self.ok, "error": self.error}


@dataclass(frozen=True)
class ConformanceReport:
    model_id: str
    entries: tuple[ConformanceEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries],
        }


def _synthetic_tasks(manifest: AdapterManifest, cfg: EvalConfig) -> list[tuple[str, ForecastTask]]:
    L = manifest.input_window_len
    horizons = tuple(cfg.horizons)
    rng = np.random.default_rng(cfg.seed)
    walk = np.cumsum(rng.standard_normal(L))
    return [
        ("constant", ForecastTask("conformance_constant", L - 1, np.full(L, 5.0), horizons)),
        (
            "linear_ramp",
            ForecastTask("conformance_ramp", L - 1, 3.0 + 0.5 * np.arange(L), horizons),
        ),
        ("random_walk", ForecastTask("conformance_walk", L - 1, walk, horizons)),
    ]


def conformance_check(manifest: AdapterManifest, cfg: EvalConfig) -> ConformanceReport:
    """Exercise the adapter on three synthetic tasks; all must produce
    structurally valid outputs before registration."""
    entries = []
    for name, task in _synthetic_tasks(manifest, cfg):
        try:
            outputs = invoke_adapter(manifest, [task])
            outputs[0].check_matches(task)
            entries.append(ConformanceEntry(name, True, None))
        except (AdapterError, ValueError) as e:
            entries.append(ConformanceEntry(name, False, f"{type(e).__name__}: {e}"))
    return ConformanceReport(model_id=manifest.model_id, entries=tuple(entries))
