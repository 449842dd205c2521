"""In-process baseline forecasters behind a single uniform contract.

Every builtin takes a ForecastTask (fixed look-back window + requested
horizons) and returns a ForecastOutput mapping each horizon to a point
forecast. All of them are deterministic pure functions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MODEL_ID_RE = re.compile(r"[a-z0-9_-]+")

AR_DEFAULT_LAGS = 12
SEASON_DEFAULT = 12
AR_RIDGE_LAMBDA = 1e-6
NLINEAR_RIDGE_LAMBDA = 1e-3
ETS_GRID = tuple(round(0.05 + 0.1 * k, 2) for k in range(10))


class ModelInputError(ValueError):
    """The task cannot be served by this model; the engine may substitute."""


class EmptyWindow(ModelInputError):
    pass


class WindowTooShort(ModelInputError):
    pass


class InsufficientTraining(ModelInputError):
    pass


class InvalidModelId(ValueError):
    pass


@dataclass(frozen=True)
class ForecastTask:
    """One forecasting request: the look-back window ending at the origin."""

    series_id: str
    origin_index: int
    window: np.ndarray
    horizons: tuple[int, ...]

    def __post_init__(self):
        w = np.asarray(self.window, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "window", w)
        object.__setattr__(self, "horizons", tuple(int(h) for h in self.horizons))
        if w.ndim != 1:
            raise ValueError(f"window must be 1-D, got ndim={w.ndim}")
        if np.isnan(w).any():
            raise ValueError("window must not contain missing values")
        if not self.horizons:
            raise ValueError("horizons must be nonempty")
        if any(h < 1 for h in self.horizons):
            raise ValueError(f"horizons must all be >= 1, got {self.horizons}")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ValueError(f"horizons must be strictly ascending, got {self.horizons}")


@dataclass(frozen=True)
class ForecastOutput:
    model_id: str
    series_id: str
    origin_index: int
    forecasts: dict[int, float]

    def __post_init__(self):
        clean = {int(h): float(v) for h, v in self.forecasts.items()}
        object.__setattr__(self, "forecasts", clean)
        bad = {h: v for h, v in clean.items() if not np.isfinite(v)}
        if bad:
            raise ValueError(f"non-finite forecasts from {self.model_id!r}: {bad}")

    def check_matches(self, task: ForecastTask) -> None:
        if tuple(sorted(self.forecasts)) != task.horizons:
            raise ValueError(
                f"forecast horizons {sorted(self.forecasts)} != task horizons {list(task.horizons)}"
            )


@dataclass(frozen=True)
class ModelDescriptor:
    model_id: str
    kind: str
    display_name: str
    model_type: str

    def __post_init__(self):
        if not MODEL_ID_RE.fullmatch(self.model_id):
            raise InvalidModelId(f"model_id must match [a-z0-9_-]+, got {self.model_id!r}")
        if self.kind not in ("builtin", "adapter"):
            raise ValueError(f"kind must be 'builtin' or 'adapter', got {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "kind": self.kind,
            "display_name": self.display_name,
            "model_type": self.model_type,
        }


def _output(model_id: str, task: ForecastTask, values: dict[int, float]) -> ForecastOutput:
    return ForecastOutput(
        model_id=model_id,
        series_id=task.series_id,
        origin_index=task.origin_index,
        forecasts=values,
    )


# ---------------------------------------------------------------------------
# Models


def historical_average(task: ForecastTask) -> ForecastOutput:
    """Arithmetic mean of the window at every horizon."""
    if task.window.size == 0:
        raise EmptyWindow("historical_average needs a nonempty window")
    mean = float(np.mean(task.window))
    return _output("historical_average", task, {h: mean for h in task.horizons})


def linear_trend(task: ForecastTask) -> ForecastOutput:
    """OLS of value on time index, extrapolated to origin + h.

    Centered closed form: slope = S_ty / S_tt, intercept = ybar - slope*tbar,
    forecast(h) = intercept + slope*(L-1+h).
    """
    w = task.window
    L = w.size
    if L < 2:
        raise WindowTooShort(f"linear_trend needs >= 2 points, got {L}")
    t = np.arange(L, dtype=float)
    tbar = (L - 1) / 2.0
    ybar = float(np.mean(w))
    dt = t - tbar
    slope = float(np.sum(dt * (w - ybar)) / np.sum(dt * dt))
    intercept = ybar - slope * tbar
    return _output(
        "linear_trend", task, {h: intercept + slope * (L - 1 + h) for h in task.horizons}
    )


def _solve_normal_equations(xtx: np.ndarray, xty: np.ndarray, ridge: float) -> np.ndarray:
    # Rank-deficient (or numerically near-singular) systems fall back to a
    # small ridge penalty instead of producing unbounded coefficients.
    try:
        cond = np.linalg.cond(xtx)
    except np.linalg.LinAlgError:
        cond = np.inf
    if np.isfinite(cond) and cond < 1e12:
        try:
            return np.linalg.solve(xtx, xty)
        except np.linalg.LinAlgError:
            pass
    return np.linalg.solve(xtx + ridge * np.eye(xtx.shape[0]), xty)


def ar_least_squares(task: ForecastTask, p: int = AR_DEFAULT_LAGS) -> ForecastOutput:
    """Autoregression y_t ~ [1, y_{t-1}, ..., y_{t-p}] fit by least squares.

    Multi-step forecasts are produced recursively, feeding predictions
    back in as lags.
    """
    w = np.asarray(task.window, dtype=float)
    L = w.size
    if L < 2 * p + 1:
        raise WindowTooShort(f"ar_least_squares needs >= {2 * p + 1} points, got {L}")
    rows = L - p
    X = np.empty((rows, p + 1))
    X[:, 0] = 1.0
    for k in range(1, p + 1):
        X[:, k] = w[p - k : L - k]
    y = w[p:]
    beta = _solve_normal_equations(X.T @ X, X.T @ y, AR_RIDGE_LAMBDA)

    history = list(w)
    forecasts: dict[int, float] = {}
    for step in range(1, max(task.horizons) + 1):
        lags = history[-p:][::-1]
        yhat = float(beta[0] + np.dot(beta[1:], lags))
        history.append(yhat)
        if step in task.horizons:
            forecasts[step] = yhat
    return _output("ar_least_squares", task, forecasts)


def nlinear(task: ForecastTask, training_segment: np.ndarray) -> ForecastOutput:
    """Last-value-normalized linear map, one weight vector per horizon.

    Each training window has its final value subtracted from both the
    inputs and the targets; the map is fit by ridge regression and the
    current window's last value is added back at prediction time.
    """
    w = np.asarray(task.window, dtype=float)
    L = w.size
    if L == 0:
        raise EmptyWindow("nlinear needs a nonempty window")
    seg = np.asarray(training_segment, dtype=float)
    max_h = max(task.horizons)
    n_pairs = seg.size - L - max_h + 1
    if n_pairs < 1 or np.isnan(seg).any():
        raise InsufficientTraining(
            f"need >= {L + max_h} contiguous observed training values, got {seg.size}"
        )

    ends = np.arange(L - 1, L - 1 + n_pairs)
    X = np.empty((n_pairs, L + 1))
    T = np.empty((n_pairs, len(task.horizons)))
    for i, e in enumerate(ends):
        anchor = seg[e]
        X[i, :L] = seg[e - L + 1 : e + 1] - anchor
        X[i, L] = 1.0
        for j, h in enumerate(task.horizons):
            T[i, j] = seg[e + h] - anchor
    G = X.T @ X + NLINEAR_RIDGE_LAMBDA * np.eye(L + 1)
    B = np.linalg.solve(G, X.T @ T)

    anchor = w[-1]
    x = np.append(w - anchor, 1.0)
    preds = x @ B + anchor
    return _output("nlinear", task, {h: float(preds[j]) for j, h in enumerate(task.horizons)})


def ets_holt(
    task: ForecastTask, alpha: float | None = None, beta: float | None = None
) -> ForecastOutput:
    """Additive-trend exponential smoothing (Holt).

        l_t = alpha*y_t + (1-alpha)*(l_{t-1} + b_{t-1})
        b_t = beta*(l_t - l_{t-1}) + (1-beta)*b_{t-1}
        l_0 = y_0, b_0 = 0, forecast(h) = l_T + h*b_T

    When alpha/beta are not pinned, they are picked from the grid
    {0.05, 0.15, ..., 0.95}^2 by minimum in-sample one-step squared
    error, ties broken by smaller alpha then smaller beta.
    """
    w = np.asarray(task.window, dtype=float)
    L = w.size
    if L < 2:
        raise WindowTooShort(f"ets_holt needs >= 2 points, got {L}")
    if (alpha is None) != (beta is None):
        raise ValueError("alpha and beta must be pinned together or not at all")

    if alpha is None:
        alpha, beta = ets_grid_search(w)
    l_T, b_T, _ = _holt_recursion(w, float(alpha), float(beta))
    return _output("ets_holt", task, {h: l_T + h * b_T for h in task.horizons})


def _holt_recursion(w: np.ndarray, alpha: float, beta: float) -> tuple[float, float, float]:
    """Run the smoothing recursion; returns (final level, final trend, one-step SSE)."""
    level, trend, sse = float(w[0]), 0.0, 0.0
    for t in range(1, w.size):
        pred = level + trend
        err = w[t] - pred
        sse += err * err
        new_level = alpha * w[t] + (1.0 - alpha) * pred
        trend = beta * (new_level - level) + (1.0 - beta) * trend
        level = new_level
    return level, trend, sse


def ets_grid_search(window: np.ndarray) -> tuple[float, float]:
    """Pick (alpha, beta) from the grid by minimum one-step SSE.

    Exact ties keep the smaller alpha, then the smaller beta; the scan
    order plus a strict < comparison implements that.
    """
    w = np.asarray(window, dtype=float)
    pairs = [(a, b) for a in ETS_GRID for b in ETS_GRID]
    alphas = np.array([p[0] for p in pairs])
    betas = np.array([p[1] for p in pairs])
    level = np.full(len(pairs), w[0])
    trend = np.zeros(len(pairs))
    sse = np.zeros(len(pairs))
    for t in range(1, w.size):
        pred = level + trend
        err = w[t] - pred
        sse += err * err
        new_level = alphas * w[t] + (1.0 - alphas) * pred
        trend = betas * (new_level - level) + (1.0 - betas) * trend
        level = new_level
    best = 0
    for i in range(1, len(pairs)):
        if sse[i] < sse[best]:
            best = i
    return pairs[best]


def seasonal_naive(task: ForecastTask, m: int = SEASON_DEFAULT) -> ForecastOutput:
    """Repeat the last full season: forecast(h) = window[L - m + ((h-1) mod m)]."""
    w = task.window
    L = w.size
    if L < m:
        raise WindowTooShort(f"seasonal_naive needs >= {m} points, got {L}")
    return _output(
        "seasonal_naive", task, {h: float(w[L - m + ((h - 1) % m)]) for h in task.horizons}
    )


def naive_last_value(task: ForecastTask) -> ForecastOutput:
    """Terminal fallback: every horizon maps to the window's last value."""
    if task.window.size == 0:
        raise EmptyWindow("naive_last_value needs a nonempty window")
    last = float(task.window[-1])
    return _output("naive_last_value", task, {h: last for h in task.horizons})


# ---------------------------------------------------------------------------
# Registry


@dataclass(frozen=True)
class BuiltinModel:
    descriptor: ModelDescriptor
    fit_predict: Callable[..., ForecastOutput] = field(repr=False)
    needs_history: bool = False
    needs_season: bool = False


def _builtin(
    model_id, display_name, model_type, fn, needs_history=False, needs_season=False
) -> BuiltinModel:
    return BuiltinModel(
        descriptor=ModelDescriptor(
            model_id=model_id, kind="builtin", display_name=display_name, model_type=model_type
        ),
        fit_predict=fn,
        needs_history=needs_history,
        needs_season=needs_season,
    )


BUILTIN_MODELS: dict[str, BuiltinModel] = {
    m.descriptor.model_id: m
    for m in (
        _builtin("historical_average", "Historical average", "statistical", historical_average),
        _builtin("linear_trend", "Linear trend", "statistical", linear_trend),
        _builtin(
            "ar_least_squares", "Autoregressive least squares", "statistical", ar_least_squares
        ),
        _builtin("nlinear", "NLinear", "ML", nlinear, needs_history=True),
        _builtin("ets_holt", "ETS additive trend", "statistical", ets_holt),
        _builtin(
            "seasonal_naive", "Seasonal naive", "statistical", seasonal_naive, needs_season=True
        ),
    )
}
