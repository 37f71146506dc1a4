"""Series preparation: imputation, outlier handling, stationarity transforms,
feature construction, and normalization.

Each value-changing transform returns a :class:`TransformRecord` holding the
constants needed to invert it exactly; records serialize to plain dicts so a
forecast service can undo fit-time transforms. Imputation and outlier
replacement are recorded too but have no inverse (they are identity on the
forecast scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ImputeError, NumericalError, TransformError
from .series import TimeSeries
from .stats import ols

ZSCORE_THRESHOLD_DEFAULT = 3.0
IQR_MULTIPLIER_DEFAULT = 1.5
ADF_CRITICAL_5PCT = -2.86


@dataclass(frozen=True)
class TransformRecord:
    """One applied transform plus everything needed to invert or replay it."""

    kind: str  # impute | replace_outliers | log | difference | normalize
    params: dict = field(default_factory=dict)

    KINDS = ("impute", "replace_outliers", "log", "difference", "normalize")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ArgumentError(f"unknown transform kind {self.kind!r}")

    @property
    def invertible(self) -> bool:
        return self.kind in ("log", "difference", "normalize")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": _jsonable(self.params)}

    @classmethod
    def from_dict(cls, doc: dict) -> "TransformRecord":
        return cls(kind=doc["kind"], params=dict(doc.get("params", {})))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


# ---------------------------------------------------------------------------
# Imputation and outliers


def impute_missing(series: TimeSeries, method: str = "linear_interpolation") -> TimeSeries:
    """Fill missing values; non-missing entries are never altered."""
    values = series.values.copy()
    missing = np.isnan(values)
    if not missing.any():
        return series
    if missing.all():
        raise ImputeError("cannot impute an all-missing series")
    present = np.flatnonzero(~missing)
    if method == "forward_fill":
        if missing[0]:
            raise ImputeError("leading value is missing; forward_fill has no predecessor")
        idx = np.arange(len(values))
        last_seen = np.maximum.accumulate(np.where(~missing, idx, 0))
        values = values[last_seen]
    elif method == "linear_interpolation":
        if missing[0] or missing[-1]:
            raise ImputeError("linear_interpolation requires the first and last values present")
        values[missing] = np.interp(np.flatnonzero(missing), present, values[present])
    else:
        raise ArgumentError(f"unknown imputation method {method!r}")
    return series.with_values(values)


def detect_outliers(series: TimeSeries, method: str = "zscore", *,
                    threshold: float = ZSCORE_THRESHOLD_DEFAULT,
                    multiplier: float = IQR_MULTIPLIER_DEFAULT) -> list[int]:
    """Indices of outlying values, ascending.

    ``zscore`` flags |x - mean| > threshold * std (population std); ``iqr``
    flags values strictly outside [Q1 - m*IQR, Q3 + m*IQR]. A constant
    series yields no outliers under either method.
    """
    if series.has_missing:
        raise ArgumentError("impute missing values before outlier detection")
    x = series.values
    if len(x) < 4:
        raise ArgumentError(f"outlier detection needs at least 4 points, got {len(x)}")
    if method == "zscore":
        std = float(np.std(x))
        if std == 0.0:
            return []
        mask = np.abs(x - np.mean(x)) > threshold * std
    elif method == "iqr":
        q1, q3 = np.percentile(x, [25.0, 75.0])
        iqr = q3 - q1
        mask = (x < q1 - multiplier * iqr) | (x > q3 + multiplier * iqr)
    else:
        raise ArgumentError(f"unknown outlier method {method!r}")
    return [int(i) for i in np.flatnonzero(mask)]


def replace_outliers(series: TimeSeries, indices: list[int], strategy: str = "interpolate", *,
                     multiplier: float = IQR_MULTIPLIER_DEFAULT) -> TimeSeries:
    """Replace flagged positions; every other value is unchanged.

    ``interpolate`` rebuilds flagged points linearly from surviving
    neighbours (nearest survivor at the edges); ``clip_to_bound`` clips them
    to the IQR fences computed from the surviving points.
    """
    n = len(series)
    indices = sorted(set(int(i) for i in indices))
    if any(i < 0 or i >= n for i in indices):
        raise ArgumentError(f"outlier index out of range for series of length {n}")
    if not indices:
        return series
    values = series.values.copy()
    keep = np.ones(n, dtype=bool)
    keep[indices] = False
    if not keep.any():
        raise ArgumentError("cannot replace every point of the series")
    survivors = np.flatnonzero(keep)
    if strategy == "interpolate":
        values[indices] = np.interp(indices, survivors, values[survivors])
    elif strategy == "clip_to_bound":
        q1, q3 = np.percentile(values[survivors], [25.0, 75.0])
        iqr = q3 - q1
        lo, hi = q1 - multiplier * iqr, q3 + multiplier * iqr
        values[indices] = np.clip(values[indices], lo, hi)
    else:
        raise ArgumentError(f"unknown replacement strategy {strategy!r}")
    return series.with_values(values)


# ---------------------------------------------------------------------------
# Invertible transforms


def difference(series: TimeSeries, lag: int = 1) -> tuple[TimeSeries, TransformRecord]:
    """Lagged difference x[t] - x[t-lag], stored against the later timestamp."""
    if lag < 1:
        raise ArgumentError(f"difference lag must be positive, got {lag}")
    n = len(series)
    if lag >= n:
        raise ArgumentError(f"difference lag {lag} must be smaller than the series length {n}")
    x = series.values
    diffed = TimeSeries(series.timestamps[lag:].copy(), x[lag:] - x[:-lag],
                        series.frequency, series.name)
    record = TransformRecord("difference", {
        "lag": lag,
        "initial_values": [float(v) for v in x[:lag]],
        "initial_timestamps": [int(t) for t in series.timestamps[:lag]],
    })
    return diffed, record


def undifference(diffed: TimeSeries, record: TransformRecord) -> TimeSeries:
    """Exact inverse of :func:`difference`; also accepts a diffed series with
    forecast values appended, in which case the reconstruction continues past
    the original sample."""
    if record.kind != "difference":
        raise ArgumentError(f"record of kind {record.kind!r} does not invert a difference")
    lag = int(record.params["lag"])
    init = np.asarray(record.params["initial_values"], dtype=float)
    init_ts = np.asarray(record.params["initial_timestamps"], dtype=np.int64)
    if len(init) != lag or len(init_ts) != lag:
        raise ArgumentError("difference record is inconsistent with its lag")
    if init_ts[-1] + diffed.frequency != diffed.timestamps[0]:
        raise ArgumentError("record does not match the differenced series grid")
    d = diffed.values
    out = np.concatenate([init, np.empty(len(d))])
    for t in range(len(d)):
        out[lag + t] = d[t] + out[t]
    ts = np.concatenate([init_ts, diffed.timestamps])
    return TimeSeries(ts, out, diffed.frequency, diffed.name)


def log_transform(series: TimeSeries) -> tuple[TimeSeries, TransformRecord]:
    """Natural log elementwise; requires strictly positive values."""
    x = series.values
    nonpos = np.flatnonzero(~(x > 0))
    if len(nonpos):
        raise TransformError(f"log transform needs positive values; index {int(nonpos[0])} "
                             f"holds {x[nonpos[0]]}")
    return series.with_values(np.log(x)), TransformRecord("log")


def normalize(series: TimeSeries, method: str = "minmax") -> tuple[TimeSeries, TransformRecord]:
    """Scale to [0, 1] (minmax) or mean 0 / population std 1 (zscore)."""
    x = series.values
    if len(x) < 2:
        raise ArgumentError(f"normalization needs at least 2 points, got {len(x)}")
    if np.isnan(x).any():
        raise ArgumentError("impute missing values before normalization")
    if method == "minmax":
        lo, hi = float(np.min(x)), float(np.max(x))
        if hi == lo:
            raise TransformError(f"degenerate range: constant series at {lo} cannot be minmax scaled")
        scaled = (x - lo) / (hi - lo)
        record = TransformRecord("normalize", {"method": "minmax", "min": lo, "max": hi})
    elif method == "zscore":
        mu, sd = float(np.mean(x)), float(np.std(x))
        if sd == 0.0:
            raise TransformError(f"degenerate range: constant series at {mu} cannot be z-scored")
        scaled = (x - mu) / sd
        record = TransformRecord("normalize", {"method": "zscore", "mean": mu, "std": sd})
    else:
        raise ArgumentError(f"unknown normalization method {method!r}")
    return series.with_values(scaled), record


def invert_values(values: np.ndarray, record: TransformRecord) -> np.ndarray:
    """Elementwise inverse for transforms that have one (log, normalize)."""
    values = np.asarray(values, dtype=float)
    if record.kind == "log":
        return np.exp(values)
    if record.kind == "normalize":
        p = record.params
        if p["method"] == "minmax":
            return values * (p["max"] - p["min"]) + p["min"]
        return values * p["std"] + p["mean"]
    if record.kind in ("impute", "replace_outliers"):
        return values
    raise ArgumentError(f"transform {record.kind!r} has no elementwise inverse")


def invert_transform(series: TimeSeries, record: TransformRecord) -> TimeSeries:
    """Invert one recorded transform over a whole series."""
    if record.kind == "difference":
        return undifference(series, record)
    return series.with_values(invert_values(series.values, record))


def denormalize(series: TimeSeries, record: TransformRecord) -> TimeSeries:
    if record.kind != "normalize":
        raise ArgumentError(f"record of kind {record.kind!r} does not invert a normalization")
    return invert_transform(series, record)


# ---------------------------------------------------------------------------
# Feature construction


@dataclass(frozen=True)
class FeatureMatrix:
    """Strictly causal lag/rolling-mean design matrix with aligned targets."""

    columns: list[str]
    X: np.ndarray        # (rows, len(columns))
    y: np.ndarray        # (rows,)
    time_indices: np.ndarray  # series index of each row's target

    def __len__(self) -> int:
        return len(self.y)


def make_features(series: TimeSeries, lags: list[int] | None = None,
                  rolling_windows: list[int] | None = None) -> FeatureMatrix:
    """Lagged values and past-only rolling means.

    Column ``lag_k`` at row t holds x[t-k]; ``rollmean_w`` holds
    mean(x[t-w] .. x[t-1]). Rows whose features would reach before the
    series start are dropped.
    """
    lags = sorted(set(int(k) for k in (lags or [])))
    windows = sorted(set(int(w) for w in (rolling_windows or [])))
    if not lags and not windows:
        raise ArgumentError("need at least one lag or rolling window")
    if any(k < 1 for k in lags) or any(w < 1 for w in windows):
        raise ArgumentError("lags and rolling windows must be positive")
    if series.has_missing:
        raise ArgumentError("impute missing values before feature construction")
    x = series.values
    n = len(x)
    start = max(lags + windows)
    if start >= n:
        raise ArgumentError(f"max lag/window {start} must be smaller than the series length {n}")
    rows = np.arange(start, n)
    columns: list[str] = []
    feats: list[np.ndarray] = []
    for k in lags:
        columns.append(f"lag_{k}")
        feats.append(x[rows - k])
    csum = np.concatenate([[0.0], np.cumsum(x)])
    for w in windows:
        columns.append(f"rollmean_{w}")
        feats.append((csum[rows] - csum[rows - w]) / w)
    X = np.column_stack(feats)
    return FeatureMatrix(columns=columns, X=X, y=x[rows].copy(), time_indices=rows)


# ---------------------------------------------------------------------------
# Stationarity check


def adf_statistic(series: TimeSeries, max_lag: int | None = None) -> tuple[float, bool]:
    """Augmented Dickey-Fuller t-ratio with constant, and the 5% verdict.

    Regresses dy_t on [1, y_{t-1}, dy_{t-1} .. dy_{t-max_lag}]; the statistic
    is the t-ratio of the y_{t-1} coefficient, compared against the
    constant-only 5% critical value of -2.86.
    """
    if series.has_missing:
        raise ArgumentError("impute missing values before the stationarity test")
    y = series.values
    n = len(y)
    if max_lag is None:
        max_lag = int(math.floor(n ** (1.0 / 3.0)))
    if max_lag < 0:
        raise ArgumentError("max_lag must be nonnegative")
    if n < max_lag + 10:
        raise ArgumentError(f"series of length {n} too short for max_lag {max_lag} "
                            f"(need at least {max_lag + 10})")
    dy = np.diff(y)
    rows = np.arange(max_lag, len(dy))
    X = [np.ones(len(rows)), y[rows]]
    for i in range(1, max_lag + 1):
        X.append(dy[rows - i])
    X = np.column_stack(X)
    target = dy[rows]
    beta, se, _ = ols(X, target)
    if se[1] == 0.0:
        raise NumericalError("zero standard error in the unit-root regression")
    stat = float(beta[1] / se[1])
    return stat, stat < ADF_CRITICAL_5PCT


# ---------------------------------------------------------------------------
# Pipelines (ordered transform steps, as used by the service and CLI)


def apply_pipeline_step(series: TimeSeries, step: dict) -> tuple[TimeSeries, TransformRecord]:
    """Apply one pipeline step described as a plain dict.

    Supported ops: ``impute`` (method), ``replace_outliers`` (method,
    threshold/multiplier, strategy), ``log``, ``difference`` (lag),
    ``normalize`` (method).
    """
    op = step.get("op")
    if op == "impute":
        method = step.get("method", "linear_interpolation")
        out = impute_missing(series, method)
        return out, TransformRecord("impute", {"method": method})
    if op == "replace_outliers":
        method = step.get("method", "zscore")
        strategy = step.get("strategy", "interpolate")
        threshold = float(step.get("threshold", ZSCORE_THRESHOLD_DEFAULT))
        multiplier = float(step.get("multiplier", IQR_MULTIPLIER_DEFAULT))
        indices = detect_outliers(series, method, threshold=threshold, multiplier=multiplier)
        out = replace_outliers(series, indices, strategy, multiplier=multiplier)
        return out, TransformRecord("replace_outliers", {
            "method": method, "strategy": strategy, "threshold": threshold,
            "multiplier": multiplier, "indices": indices,
        })
    if op == "log":
        return log_transform(series)
    if op == "difference":
        return difference(series, int(step.get("lag", 1)))
    if op == "normalize":
        return normalize(series, step.get("method", "minmax"))
    raise ArgumentError(f"unknown pipeline op {step.get('op')!r}")


def apply_pipeline(series: TimeSeries, steps: list[dict]) -> tuple[TimeSeries, list[TransformRecord]]:
    """Apply steps in order, returning the transformed series and records."""
    if not steps:
        raise ArgumentError("pipeline must contain at least one step")
    records: list[TransformRecord] = []
    current = series
    for i, step in enumerate(steps):
        try:
            current, record = apply_pipeline_step(current, step)
        except (ArgumentError, ImputeError, TransformError) as exc:
            raise type(exc)(f"step {i}: {exc}") from exc
        records.append(record)
    return current, records


def replay_records(series: TimeSeries, records: list[TransformRecord]) -> list[TimeSeries]:
    """Re-apply stored records to the source, returning the input of each stage.

    Element i is the series *before* records[i]; one extra trailing element
    holds the final output.
    """
    stages = [series]
    current = series
    for record in records:
        if record.kind == "impute":
            current = impute_missing(current, record.params["method"])
        elif record.kind == "replace_outliers":
            current = replace_outliers(current, record.params["indices"],
                                       record.params["strategy"],
                                       multiplier=record.params.get("multiplier", IQR_MULTIPLIER_DEFAULT))
        elif record.kind == "log":
            current, _ = log_transform(current)
        elif record.kind == "difference":
            current, _ = difference(current, int(record.params["lag"]))
        elif record.kind == "normalize":
            p = record.params
            if p["method"] == "minmax":
                current = current.with_values((current.values - p["min"]) / (p["max"] - p["min"]))
            else:
                current = current.with_values((current.values - p["mean"]) / p["std"])
        stages.append(current)
    return stages


def invert_forecast_path(source: TimeSeries, records: list[TransformRecord],
                         values: np.ndarray) -> np.ndarray:
    """Map forecast values from the transformed scale back to the source scale.

    Elementwise transforms invert directly; differencing is continued past
    the sample using the stage input recovered by replaying the records.
    """
    stages = replay_records(source, records)
    out = np.asarray(values, dtype=float).copy()
    for i in range(len(records) - 1, -1, -1):
        record = records[i]
        if record.kind == "difference":
            stage_in = stages[i]
            lag = int(record.params["lag"])
            base = list(stage_in.values)
            rebuilt = []
            for k, d in enumerate(out):
                nxt = d + base[len(base) - lag]
                base.append(nxt)
                rebuilt.append(nxt)
            out = np.asarray(rebuilt)
        else:
            out = invert_values(out, record)
    return out
