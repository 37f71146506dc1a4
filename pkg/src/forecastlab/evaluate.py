"""Uniform forecast metrics, rolling-origin cross-validation, the model
comparison leaderboard, and residual-based anomaly detection.

Cross-validation is chronological: expanding training windows with
fixed-horizon test windows spaced so the last test window ends at the
series end. Shuffled folds leak future data into training and are not
offered.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ComparisonError
from .modelspec import ModelSpec, forecaster_for
from .series import TimeSeries, format_timestamp

MAD_TO_SIGMA = 1.4826
DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class MetricSet:
    mae: float
    mse: float
    rmse: float
    mape: float | None  # None when every actual is zero
    n: int
    mape_excluded: int = 0

    def to_dict(self) -> dict:
        return {"mae": self.mae, "mse": self.mse, "rmse": self.rmse,
                "mape": self.mape, "n": self.n, "mape_excluded": self.mape_excluded}


def metrics(actual: np.ndarray, predicted: np.ndarray) -> MetricSet:
    """MAE / MSE / RMSE / MAPE between aligned vectors.

    MAPE skips points whose actual value is zero and counts them in
    ``mape_excluded``; when every actual is zero the MAPE is None.
    """
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.ndim != 1:
        raise ArgumentError(f"actual and predicted must be equal-length vectors, "
                            f"got {a.shape} and {p.shape}")
    if len(a) == 0:
        raise ArgumentError("cannot compute metrics on empty vectors")
    err = a - p
    mae = float(np.mean(np.abs(err)))
    mse = float(np.mean(err ** 2))
    rmse = math.sqrt(mse)
    nonzero = a != 0.0
    excluded = int(np.sum(~nonzero))
    if excluded == len(a):
        mape = None
    else:
        mape = float(100.0 * np.mean(np.abs(err[nonzero] / a[nonzero])))
    return MetricSet(mae=mae, mse=mse, rmse=rmse, mape=mape, n=len(a), mape_excluded=excluded)


@dataclass(frozen=True)
class FoldResult:
    index: int
    train_length: int
    test_start: int  # epoch seconds
    test_end: int
    metric_set: MetricSet

    def to_dict(self) -> dict:
        return {"index": self.index, "train_length": self.train_length,
                "test_start": format_timestamp(self.test_start),
                "test_end": format_timestamp(self.test_end),
                "metrics": self.metric_set.to_dict()}


@dataclass
class EvaluationReport:
    model_id: str
    spec_digest: str
    folds: list[FoldResult]
    aggregate: MetricSet
    fit_seconds: float
    error: str | None = None

    def to_dict(self) -> dict:
        return {"model_id": self.model_id, "spec_digest": self.spec_digest,
                "folds": [f.to_dict() for f in self.folds],
                "aggregate": self.aggregate.to_dict() if self.aggregate else None,
                "fit_seconds": self.fit_seconds, "error": self.error}


def fold_geometry(n: int, folds: int, horizon: int, min_train: int = 1) -> list[int]:
    """Training lengths of each expanding-window fold.

    Fold i trains on the first n - (folds - i) * horizon points and is
    evaluated on the next ``horizon``; the last test window ends at the
    series end."""
    if folds < 2:
        raise ArgumentError("need at least 2 folds")
    if horizon < 1:
        raise ArgumentError("fold horizon must be at least 1")
    first_train = n - folds * horizon
    if first_train < max(min_train, 1):
        minimum = folds * horizon + max(min_train, 1)
        raise ArgumentError(
            f"series of length {n} cannot host {folds} folds of horizon {horizon}; "
            f"need at least {minimum} points")
    return [n - (folds - i) * horizon for i in range(folds)]


def rolling_origin_cv(series: TimeSeries, fit_forecast, folds: int, horizon: int, *,
                      min_train: int = 1, model_id: str = "", spec_digest: str = "") -> EvaluationReport:
    """Evaluate ``fit_forecast(train_series, horizon) -> points`` over
    expanding-window folds; every fold is an independent fit."""
    if series.has_missing:
        raise ArgumentError("impute missing values before cross-validation")
    train_lengths = fold_geometry(len(series), folds, horizon, min_train)
    fold_results: list[FoldResult] = []
    pooled_actual: list[np.ndarray] = []
    pooled_pred: list[np.ndarray] = []
    started = time.perf_counter()
    for i, train_len in enumerate(train_lengths):
        train = series.slice(0, train_len)
        test = series.slice(train_len, train_len + horizon)
        points = np.asarray(fit_forecast(train, horizon), dtype=float)
        if points.shape != (horizon,):
            raise ArgumentError(f"fold {i}: forecaster returned shape {points.shape}, "
                                f"expected ({horizon},)")
        fold_results.append(FoldResult(
            index=i, train_length=train_len,
            test_start=int(test.timestamps[0]), test_end=int(test.timestamps[-1]),
            metric_set=metrics(test.values, points)))
        pooled_actual.append(test.values)
        pooled_pred.append(points)
    aggregate = metrics(np.concatenate(pooled_actual), np.concatenate(pooled_pred))
    return EvaluationReport(model_id=model_id, spec_digest=spec_digest,
                            folds=fold_results, aggregate=aggregate,
                            fit_seconds=time.perf_counter() - started)


def _rank_key(report: EvaluationReport) -> tuple:
    if report.error is not None or report.aggregate is None:
        return (1, math.inf, math.inf, report.spec_digest)
    mape = report.aggregate.mape if report.aggregate.mape is not None else math.inf
    return (0, mape, report.aggregate.rmse, report.spec_digest)


def compare_models(series: TimeSeries, specs: list[ModelSpec], folds: int = DEFAULT_FOLDS,
                   horizon: int = 1) -> list[EvaluationReport]:
    """Evaluate every spec under identical folds and rank by pooled MAPE
    ascending (ties: pooled RMSE, then spec digest). Failed specs stay in
    the list, ranked last, with the error retained."""
    if not specs:
        raise ArgumentError("need at least one model spec to compare")
    fold_geometry(len(series), folds, horizon)  # validate once up front
    reports: list[EvaluationReport] = []
    for spec in specs:
        digest = spec.digest()
        try:
            report = rolling_origin_cv(series, forecaster_for(spec), folds, horizon,
                                       model_id=spec.label(), spec_digest=digest)
        except ArgumentError:
            raise
        except Exception as exc:  # noqa: BLE001 - per-model failures belong in the ranking
            report = EvaluationReport(model_id=spec.label(), spec_digest=digest,
                                      folds=[], aggregate=None, fit_seconds=0.0,
                                      error=f"{type(exc).__name__}: {exc}")
        reports.append(report)
    reports.sort(key=_rank_key)
    if all(r.error is not None for r in reports):
        causes = {r.model_id: r.error for r in reports}
        raise ComparisonError("every model failed to evaluate", causes)
    return reports


def leaderboard_table(reports: list[EvaluationReport]) -> str:
    """Aligned plain-text table: model, MAE, MSE, RMSE, MAPE."""
    headers = ["Model", "MAE", "MSE", "RMSE", "MAPE"]
    rows = []
    for r in reports:
        if r.error is not None or r.aggregate is None:
            rows.append([r.model_id, "failed", "-", "-", "-"])
            continue
        agg = r.aggregate
        mape = "n/a" if agg.mape is None else f"{agg.mape:.4f}"
        rows.append([r.model_id, f"{agg.mae:.4f}", f"{agg.mse:.4f}",
                     f"{agg.rmse:.4f}", mape])
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * widths[i] for i in range(len(headers))))
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(headers))))
    return "\n".join(lines)


@dataclass(frozen=True)
class AnomalyEvent:
    timestamp: int
    observed: float
    expected: float
    score: float
    direction: str  # spike | drop

    def to_dict(self) -> dict:
        return {"timestamp": format_timestamp(self.timestamp), "epoch": self.timestamp,
                "observed": self.observed, "expected": self.expected,
                "score": self.score, "direction": self.direction}


def detect_anomalies(series: TimeSeries, expected: np.ndarray, threshold: float) -> list[AnomalyEvent]:
    """Flag points whose standardized residual exceeds ``threshold``.

    ``expected`` holds one-step in-sample predictions aligned with the
    series (NaN where the model has no prediction). The residual scale is
    the median absolute deviation times 1.4826, so one huge anomaly cannot
    mask itself; a perfectly fitting model yields no events.
    """
    if threshold <= 0:
        raise ArgumentError("threshold must be positive")
    expected = np.asarray(expected, dtype=float)
    if expected.shape != series.values.shape:
        raise ArgumentError("expected values must align with the series")
    defined = ~np.isnan(expected) & ~np.isnan(series.values)
    residuals = series.values[defined] - expected[defined]
    if len(residuals) == 0:
        return []
    med = float(np.median(residuals))
    scale = MAD_TO_SIGMA * float(np.median(np.abs(residuals - med)))
    if scale == 0.0:
        return []
    events: list[AnomalyEvent] = []
    indices = np.flatnonzero(defined)
    scores = residuals / scale
    for pos, idx in enumerate(indices):
        score = float(scores[pos])
        if abs(score) >= threshold:
            events.append(AnomalyEvent(
                timestamp=int(series.timestamps[idx]),
                observed=float(series.values[idx]),
                expected=float(expected[idx]),
                score=score,
                direction="spike" if series.values[idx] > expected[idx] else "drop"))
    return events
