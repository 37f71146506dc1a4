"""Exponential smoothing: simple, trend (Holt), and seasonal (Holt-Winters)
models with additive or multiplicative seasonality.

One-step recursions (additive seasonal shown; the multiplicative variant
replaces the seasonal subtractions/additions with divisions/multiplications):

    yhat[t] = level + trend + seasonal[t-m]
    level'  = alpha * (y[t] - seasonal[t-m]) + (1-alpha) * (level + trend)
    trend'  = beta * (level' - level) + (1-beta) * trend
    seas'   = gamma * (y[t] - level - trend) + (1-gamma) * seasonal[t-m]

Smoothing parameters and initial states are optimized jointly by
Nelder-Mead with the smoothing parameters projected onto [0, 1]; initial
states are seeded from per-period averages. Prediction intervals use the
additive-error state-space variance recursion with sigma^2 = SSE / n.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DataError, FitFailureError, SelectionError
from .forecast import Forecast
from .optim import nelder_mead
from .series import Horizon, TimeSeries
from .stats import normal_quantile

SSE_FLOOR = 1e-300
TRENDS = ("none", "additive")
SEASONALS = ("none", "additive", "multiplicative")


@dataclass(frozen=True)
class EtsSpec:
    trend: str = "none"
    seasonal: str = "none"
    period: int = 0

    def __post_init__(self):
        if self.trend not in TRENDS:
            raise ArgumentError(f"trend must be one of {TRENDS}, got {self.trend!r}")
        if self.seasonal not in SEASONALS:
            raise ArgumentError(f"seasonal must be one of {SEASONALS}, got {self.seasonal!r}")
        if self.seasonal != "none" and self.period < 2:
            raise ArgumentError(f"seasonal specs need a period >= 2, got {self.period}")

    @property
    def has_trend(self) -> bool:
        return self.trend == "additive"

    @property
    def has_seasonal(self) -> bool:
        return self.seasonal != "none"

    @property
    def n_free_params(self) -> int:
        k = 2  # alpha + initial level
        if self.has_trend:
            k += 2  # beta + initial trend
        if self.has_seasonal:
            k += 1 + (self.period - 1)  # gamma + constrained initial seasonals
        return k

    def label(self) -> str:
        parts = ["ets", f"trend={self.trend}", f"seasonal={self.seasonal}"]
        if self.has_seasonal:
            parts.append(f"m={self.period}")
        return ",".join(parts)


@dataclass
class EtsParams:
    alpha: float
    beta: float | None
    gamma: float | None
    initial_level: float
    initial_trend: float | None
    initial_seasonals: np.ndarray | None  # s[1-m] .. s[0]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
            "initial_level": self.initial_level, "initial_trend": self.initial_trend,
            "initial_seasonals": None if self.initial_seasonals is None
            else [float(v) for v in self.initial_seasonals],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EtsParams":
        seas = doc.get("initial_seasonals")
        return cls(alpha=doc["alpha"], beta=doc.get("beta"), gamma=doc.get("gamma"),
                   initial_level=doc["initial_level"], initial_trend=doc.get("initial_trend"),
                   initial_seasonals=None if seas is None else np.asarray(seas, dtype=float))


@dataclass
class FittedEts:
    spec: EtsSpec
    params: EtsParams
    sse: float
    aic: float
    n: int
    residuals: np.ndarray
    fitted_values: np.ndarray
    final_level: float
    final_trend: float
    final_seasonals: np.ndarray | None  # oldest first: s[n-m+1] .. s[n]
    origin_timestamp: int
    frequency: int

    @property
    def sigma2(self) -> float:
        return self.sse / self.n

    def to_dict(self) -> dict:
        return {
            "spec": {"trend": self.spec.trend, "seasonal": self.spec.seasonal,
                     "period": self.spec.period},
            "params": self.params.to_dict(),
            "sse": float(self.sse), "aic": float(self.aic), "n": self.n,
            "residuals": [float(v) for v in self.residuals],
            "fitted_values": [float(v) for v in self.fitted_values],
            "final_level": float(self.final_level),
            "final_trend": float(self.final_trend),
            "final_seasonals": None if self.final_seasonals is None
            else [float(v) for v in self.final_seasonals],
            "origin_timestamp": self.origin_timestamp,
            "frequency": self.frequency,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FittedEts":
        spec = EtsSpec(**doc["spec"])
        seas = doc.get("final_seasonals")
        return cls(spec=spec, params=EtsParams.from_dict(doc["params"]),
                   sse=float(doc["sse"]), aic=float(doc["aic"]), n=int(doc["n"]),
                   residuals=np.asarray(doc["residuals"], dtype=float),
                   fitted_values=np.asarray(doc["fitted_values"], dtype=float),
                   final_level=float(doc["final_level"]),
                   final_trend=float(doc["final_trend"]),
                   final_seasonals=None if seas is None else np.asarray(seas, dtype=float),
                   origin_timestamp=int(doc["origin_timestamp"]),
                   frequency=int(doc["frequency"]))


# ---------------------------------------------------------------------------
# Filtering


def ets_filter(values: np.ndarray, spec: EtsSpec, params: EtsParams):
    """Run the smoothing recursion over ``values``.

    Returns (fitted, residuals, sse, final_level, final_trend,
    final_seasonals). Non-finite states simply propagate; callers treat a
    non-finite SSE as an infeasible parameter point.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    multiplicative = spec.seasonal == "multiplicative"
    level = float(params.initial_level)
    trend = float(params.initial_trend) if spec.has_trend else 0.0
    alpha = float(params.alpha)
    beta = float(params.beta) if spec.has_trend else 0.0
    gamma = float(params.gamma) if spec.has_seasonal else 0.0
    if spec.has_seasonal:
        seas = deque(float(v) for v in params.initial_seasonals)
    else:
        seas = None

    fitted = np.empty(n)
    for t in range(n):
        base = level + trend
        if seas is not None:
            s_tm = seas[0]
            yhat = base * s_tm if multiplicative else base + s_tm
        else:
            yhat = base
        fitted[t] = yhat
        obs = y[t]
        if seas is not None:
            if multiplicative:
                deseason = obs / s_tm if s_tm != 0.0 else math.inf
                ratio_base = obs / base if base != 0.0 else math.inf
                new_s = gamma * ratio_base + (1.0 - gamma) * s_tm
            else:
                deseason = obs - s_tm
                new_s = gamma * (obs - base) + (1.0 - gamma) * s_tm
        else:
            deseason = obs
        new_level = alpha * deseason + (1.0 - alpha) * base
        if spec.has_trend:
            trend = beta * (new_level - level) + (1.0 - beta) * trend
        level = new_level
        if seas is not None:
            seas.popleft()
            seas.append(new_s)

    residuals = y - fitted
    sse = float(residuals @ residuals)
    final_seasonals = np.array(seas) if seas is not None else None
    return fitted, residuals, sse, level, trend, final_seasonals


# ---------------------------------------------------------------------------
# Parameter packing


def _pack_names(spec: EtsSpec) -> list[str]:
    names = ["alpha"]
    if spec.has_trend:
        names.append("beta")
    if spec.has_seasonal:
        names.append("gamma")
    names.append("level0")
    if spec.has_trend:
        names.append("trend0")
    if spec.has_seasonal:
        names.extend(f"seas{i}" for i in range(spec.period - 1))
    return names


def _unpack(vector: np.ndarray, spec: EtsSpec) -> EtsParams:
    pos = 0
    alpha = float(vector[pos]); pos += 1
    beta = gamma = None
    if spec.has_trend:
        beta = float(vector[pos]); pos += 1
    if spec.has_seasonal:
        gamma = float(vector[pos]); pos += 1
    level0 = float(vector[pos]); pos += 1
    trend0 = None
    if spec.has_trend:
        trend0 = float(vector[pos]); pos += 1
    seasonals = None
    if spec.has_seasonal:
        free = np.asarray(vector[pos:pos + spec.period - 1], dtype=float)
        if spec.seasonal == "additive":
            last = -float(np.sum(free))
        else:
            last = spec.period - float(np.sum(free))
        seasonals = np.concatenate([free, [last]])
    return EtsParams(alpha=alpha, beta=beta, gamma=gamma, initial_level=level0,
                     initial_trend=trend0, initial_seasonals=seasonals)


def _pack(params: EtsParams, spec: EtsSpec) -> np.ndarray:
    vec = [params.alpha]
    if spec.has_trend:
        vec.append(params.beta)
    if spec.has_seasonal:
        vec.append(params.gamma)
    vec.append(params.initial_level)
    if spec.has_trend:
        vec.append(params.initial_trend)
    if spec.has_seasonal:
        vec.extend(params.initial_seasonals[:-1])
    return np.asarray(vec, dtype=float)


def _initial_params(y: np.ndarray, spec: EtsSpec) -> EtsParams:
    """Textbook seed: level/trend from per-period means, seasonals from
    detrended per-phase averages over the first two periods."""
    n = len(y)
    m = spec.period if spec.has_seasonal else 4
    level0 = float(np.mean(y[:min(m, n)]))
    trend0 = None
    if spec.has_trend:
        if n >= 2 * m:
            trend0 = float((np.mean(y[m:2 * m]) - np.mean(y[:m])) / m)
        else:
            trend0 = float((y[-1] - y[0]) / max(n - 1, 1))
    seasonals = None
    if spec.has_seasonal:
        m = spec.period
        span = y[:2 * m]
        t = np.arange(len(span), dtype=float)
        slope, intercept = np.polyfit(t, span, 1)
        baseline = intercept + slope * t
        if spec.seasonal == "multiplicative":
            safe = np.where(np.abs(baseline) > 1e-12, baseline, 1.0)
            detrended = span / safe
        else:
            detrended = span - baseline
        seasonals = np.array([float(np.mean(detrended[phase::m])) for phase in range(m)])
        if spec.seasonal == "additive":
            seasonals = seasonals - np.mean(seasonals)
        else:
            total = float(np.sum(seasonals))
            seasonals = seasonals * (m / total) if total > 0 else np.ones(m)
    return EtsParams(alpha=0.3, beta=0.1 if spec.has_trend else None,
                     gamma=0.1 if spec.has_seasonal else None,
                     initial_level=level0, initial_trend=trend0,
                     initial_seasonals=seasonals)


# ---------------------------------------------------------------------------
# Fitting


def fit_ets(series: TimeSeries, spec: EtsSpec, params: EtsParams | None = None) -> FittedEts:
    """Fit by minimizing the one-step squared errors; passing ``params``
    skips optimization and just filters (useful for pinned parameters)."""
    if series.has_missing:
        raise DataError("series contains missing values; impute before fitting")
    y = series.values
    n = len(y)
    min_len = 2 * spec.period + 2 if spec.has_seasonal else 4
    if n < min_len:
        raise DataError(f"series of length {n} too short for {spec.label()}: need {min_len}")
    if spec.seasonal == "multiplicative" and np.any(y <= 0):
        idx = int(np.argmax(y <= 0))
        raise DataError(f"multiplicative seasonality needs positive data; index {idx} holds {y[idx]}")

    if params is None:
        seed_params = _initial_params(y, spec)
        x0 = _pack(seed_params, spec)
        names = _pack_names(spec)
        scale = max(0.1, float(np.std(y)) * 0.1)
        steps = np.array([0.1 if name in ("alpha", "beta", "gamma")
                          else (0.1 if (name.startswith("seas") and spec.seasonal == "multiplicative")
                                else scale)
                          for name in names])
        lo = np.array([0.0 if name in ("alpha", "beta", "gamma") else -np.inf for name in names])
        hi = np.array([1.0 if name in ("alpha", "beta", "gamma") else np.inf for name in names])

        def objective(vector: np.ndarray) -> float:
            candidate = _unpack(vector, spec)
            if spec.seasonal == "multiplicative" and np.any(candidate.initial_seasonals <= 0):
                return math.inf
            _, _, sse, *_ = ets_filter(y, spec, candidate)
            return sse if math.isfinite(sse) else math.inf

        result = nelder_mead(objective, x0, bounds=(lo, hi), initial_step=steps)
        # One polish pass from the optimum with a fresh simplex.
        result = nelder_mead(objective, result.x, bounds=(lo, hi), initial_step=steps)
        if not math.isfinite(result.fun):
            raise FitFailureError(f"no finite SSE found for {spec.label()}")
        params = _unpack(result.x, spec)

    fitted, residuals, sse, level, trend, seasonals = ets_filter(y, spec, params)
    if not math.isfinite(sse):
        raise FitFailureError(f"non-finite SSE for {spec.label()} with the given parameters")
    k = spec.n_free_params
    aic = n * math.log(max(sse, SSE_FLOOR) / n) + 2.0 * k
    return FittedEts(spec=spec, params=params, sse=sse, aic=aic, n=n,
                     residuals=residuals, fitted_values=fitted,
                     final_level=level, final_trend=trend, final_seasonals=seasonals,
                     origin_timestamp=int(series.timestamps[-1]),
                     frequency=series.frequency)


# ---------------------------------------------------------------------------
# Forecasting


def _variance_factors(fitted: FittedEts, horizon: int) -> np.ndarray:
    """v_h from the additive-error state-space recursion: v_h = 1 +
    sum_{j<h} (w F^{j-1} g)^2."""
    spec = fitted.spec
    m = spec.period if spec.has_seasonal else 0
    dim = 1 + (1 if spec.has_trend else 0) + m
    w = np.zeros(dim)
    w[0] = 1.0
    pos = 1
    if spec.has_trend:
        w[1] = 1.0
        pos = 2
    if m:
        w[dim - 1] = 1.0  # seasonal lag m
    F = np.zeros((dim, dim))
    F[0, 0] = 1.0
    if spec.has_trend:
        F[0, 1] = 1.0
        F[1, 1] = 1.0
    if m:
        F[pos, dim - 1] = 1.0      # newest seasonal comes from lag m
        for i in range(1, m):
            F[pos + i, pos + i - 1] = 1.0
    g = np.zeros(dim)
    alpha = fitted.params.alpha
    g[0] = alpha
    if spec.has_trend:
        g[1] = alpha * (fitted.params.beta or 0.0)
    if m:
        g[pos] = fitted.params.gamma or 0.0

    v = np.empty(horizon)
    v[0] = 1.0
    c_sq_sum = 0.0
    vec = g.copy()
    for h in range(1, horizon):
        c = float(w @ vec)
        c_sq_sum += c * c
        v[h] = 1.0 + c_sq_sum
        vec = F @ vec
    return v


def forecast_ets(fitted: FittedEts, horizon: Horizon | int, confidence: float = 0.95) -> Forecast:
    steps = horizon.steps if isinstance(horizon, Horizon) else int(horizon)
    if steps < 1:
        raise ArgumentError("horizon must be at least 1")
    if not 0.0 < confidence < 1.0:
        raise ArgumentError(f"confidence must lie in (0, 1), got {confidence}")
    spec = fitted.spec
    level, trend = fitted.final_level, fitted.final_trend
    points = np.empty(steps)
    for h in range(1, steps + 1):
        base = level + h * trend
        if spec.has_seasonal:
            s = fitted.final_seasonals[(h - 1) % spec.period]
            points[h - 1] = base * s if spec.seasonal == "multiplicative" else base + s
        else:
            points[h - 1] = base
    z = normal_quantile((1.0 + confidence) / 2.0)
    half = z * np.sqrt(fitted.sigma2 * _variance_factors(fitted, steps))
    ts = fitted.origin_timestamp + fitted.frequency * np.arange(1, steps + 1, dtype=np.int64)
    return Forecast(origin_timestamp=fitted.origin_timestamp, frequency=fitted.frequency,
                    timestamps=ts, points=points, lower=points - half, upper=points + half,
                    confidence=confidence)


# ---------------------------------------------------------------------------
# Component selection


@dataclass
class EtsSelectionEntry:
    spec: EtsSpec
    aic: float
    fitted: FittedEts | None = None
    error: str | None = None


def default_candidates(period: int | None = None) -> list[EtsSpec]:
    """Service default candidate set; seasonal specs included when a period
    is known."""
    specs = [EtsSpec(), EtsSpec(trend="additive")]
    if period and period >= 2:
        specs.append(EtsSpec(trend="additive", seasonal="additive", period=period))
        specs.append(EtsSpec(trend="additive", seasonal="multiplicative", period=period))
    return specs


def select_ets(series: TimeSeries, candidate_specs: list[EtsSpec]) -> list[EtsSelectionEntry]:
    """Fit every candidate and rank by AIC ascending.

    Ties prefer fewer parameters, then lexicographic spec order. Candidates
    that cannot be fitted stay in the ranking with an infinite score."""
    if not candidate_specs:
        raise ArgumentError("candidate list must not be empty")
    entries: list[EtsSelectionEntry] = []
    for spec in candidate_specs:
        try:
            fitted = fit_ets(series, spec)
            entries.append(EtsSelectionEntry(spec, fitted.aic, fitted))
        except (DataError, FitFailureError) as exc:
            entries.append(EtsSelectionEntry(spec, math.inf, None, str(exc)))
    entries.sort(key=lambda e: (e.aic, e.spec.n_free_params,
                                (e.spec.trend, e.spec.seasonal, e.spec.period)))
    if all(e.fitted is None for e in entries):
        raise SelectionError("no candidate specification is feasible for this series: "
                             + "; ".join(f"{e.spec.label()}: {e.error}" for e in entries))
    return entries
