"""Evaluation configuration shared by the splitter, engine, service, and CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

METRIC_NAMES = ("MAE", "RMSE", "sMAPE", "MASE")

DEFAULT_LOOKBACK = 96
DEFAULT_HORIZONS = (12, 24, 36, 48, 60)


class ConfigInvalid(ValueError):
    """The configuration violates one of its invariants."""


@dataclass(frozen=True)
class EvalConfig:
    """Knobs for one evaluation run.

    ``lookback`` is the fixed history window handed to every model,
    ``horizons`` the months-ahead offsets at which forecasts are scored.
    ``space`` selects whether models see tcode-transformed series or raw
    levels.
    """

    lookback: int = DEFAULT_LOOKBACK
    horizons: tuple[int, ...] = DEFAULT_HORIZONS
    stride: int = 1
    metrics: tuple[str, ...] = METRIC_NAMES
    primary_metric: str = "MASE"
    season: int = 12
    space: str = "transformed"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(int(h) for h in self.horizons))
        object.__setattr__(self, "metrics", tuple(str(m) for m in self.metrics))
        if self.season < 1:
            raise ConfigInvalid(f"season must be >= 1, got {self.season}")
        if self.lookback < 2 * self.season:
            raise ConfigInvalid(
                f"lookback must be >= 2*season ({2 * self.season}), got {self.lookback}"
            )
        if self.stride < 1:
            raise ConfigInvalid(f"stride must be >= 1, got {self.stride}")
        if not self.horizons:
            raise ConfigInvalid("horizons must be nonempty")
        if any(h < 1 for h in self.horizons):
            raise ConfigInvalid(f"horizons must all be >= 1, got {self.horizons}")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ConfigInvalid(f"horizons must be strictly ascending, got {self.horizons}")
        if not self.metrics:
            raise ConfigInvalid("metrics must be nonempty")
        unknown = [m for m in self.metrics if m not in METRIC_NAMES]
        if unknown:
            raise ConfigInvalid(f"unknown metrics {unknown}; allowed: {METRIC_NAMES}")
        if self.primary_metric not in self.metrics:
            raise ConfigInvalid(
                f"primary_metric {self.primary_metric!r} not among metrics {self.metrics}"
            )
        if self.space not in ("transformed", "raw"):
            raise ConfigInvalid(f"space must be 'transformed' or 'raw', got {self.space!r}")

    def to_dict(self) -> dict:
        return {
            "lookback": self.lookback,
            "horizons": list(self.horizons),
            "stride": self.stride,
            "metrics": list(self.metrics),
            "primary_metric": self.primary_metric,
            "season": self.season,
            "space": self.space,
            "seed": self.seed,
        }

    def canonical_json(self) -> str:
        """Stable serialization used for run identity."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def load_config(path: str | Path) -> EvalConfig:
    """Read an EvalConfig from a JSON key/value file; unknown keys are rejected."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ConfigInvalid(f"config file must hold a JSON object, got {type(doc).__name__}")
    known = {f.name for f in fields(EvalConfig)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigInvalid(f"unknown config keys {unknown}; allowed: {sorted(known)}")
    return EvalConfig(**doc)


def override_config(cfg: EvalConfig, **overrides) -> EvalConfig:
    """Apply non-None overrides (CLI flags) on top of an existing config."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **changes) if changes else cfg
