"""Tagged model specification over the four families plus fit/forecast
dispatch.

A :class:`ModelSpec` carries the family name, the family-specific
configuration, and optional fit-time transform directives. ``fit_model``
returns a :class:`FittedModel` wrapper that forecasts in original units
(every fit-time transform inverted) and exposes one-step in-sample
expectations for anomaly scoring.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import arima, ets, lstm
from .errors import ArgumentError, DataError
from .forecast import Forecast
from .preprocess import TransformRecord, invert_values, log_transform, normalize
from .series import TimeSeries

FAMILIES = ("arima", "sarima", "ets", "lstm")
SPEC_TRANSFORMS = ("log", "normalize_minmax", "normalize_zscore")


@dataclass(frozen=True)
class ModelSpec:
    family: str
    order: tuple[int, int, int] | None = None
    seasonal_order: tuple[int, int, int, int] | None = None
    ets_spec: ets.EtsSpec | None = None
    lstm_config: lstm.LstmConfig | None = None
    transforms: tuple[str, ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown model family {self.family!r}")
        for t in self.transforms:
            if t not in SPEC_TRANSFORMS:
                raise ArgumentError(f"unknown fit-time transform {t!r}")
        if self.family in ("arima", "sarima"):
            if self.order is None:
                raise ArgumentError(f"{self.family} spec requires an order (p, d, q)")
            arima.ArimaOrder(*self.order)
            if self.family == "sarima":
                if self.seasonal_order is None:
                    raise ArgumentError("sarima spec requires a seasonal order (P, D, Q, s)")
                so = arima.SeasonalOrder(*self.seasonal_order)
                if not so.active:
                    raise ArgumentError("sarima spec requires a non-trivial seasonal order")
        elif self.family == "ets":
            if self.ets_spec is None:
                raise ArgumentError("ets spec requires component choices")
        elif self.family == "lstm":
            if self.lstm_config is None:
                raise ArgumentError("lstm spec requires a network configuration")

    def to_dict(self) -> dict:
        doc: dict = {"family": self.family}
        if self.order is not None:
            doc["order"] = list(self.order)
        if self.seasonal_order is not None:
            doc["seasonal_order"] = list(self.seasonal_order)
        if self.ets_spec is not None:
            doc["ets"] = {"trend": self.ets_spec.trend, "seasonal": self.ets_spec.seasonal,
                          "period": self.ets_spec.period}
        if self.lstm_config is not None:
            doc["lstm"] = self.lstm_config.to_dict()
        if self.transforms:
            doc["transforms"] = list(self.transforms)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        family = doc.get("family")
        order = tuple(int(v) for v in doc["order"]) if "order" in doc else None
        seasonal = tuple(int(v) for v in doc["seasonal_order"]) if "seasonal_order" in doc else None
        ets_spec = ets.EtsSpec(**doc["ets"]) if "ets" in doc else None
        lstm_config = lstm.LstmConfig.from_dict(doc["lstm"]) if "lstm" in doc else None
        transforms = tuple(doc.get("transforms", ()))
        return cls(family=family, order=order, seasonal_order=seasonal,
                   ets_spec=ets_spec, lstm_config=lstm_config, transforms=transforms)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def label(self) -> str:
        if self.family == "arima":
            return f"ARIMA{self.order}"
        if self.family == "sarima":
            p, d, q = self.order
            P, D, Q, s = self.seasonal_order
            return f"SARIMA({p},{d},{q})({P},{D},{Q})_{s}"
        if self.family == "ets":
            return f"ETS(trend={self.ets_spec.trend},seasonal={self.ets_spec.seasonal})"
        cfg = self.lstm_config
        return f"LSTM(layers={cfg.layers},units={cfg.hidden_units},window={cfg.window})"


def _apply_spec_transforms(series: TimeSeries, transforms: tuple[str, ...]) -> tuple[TimeSeries, list[TransformRecord]]:
    records: list[TransformRecord] = []
    current = series
    for t in transforms:
        if t == "log":
            current, record = log_transform(current)
        elif t == "normalize_minmax":
            current, record = normalize(current, "minmax")
        else:
            current, record = normalize(current, "zscore")
        records.append(record)
    return current, records


@dataclass
class FittedModel:
    """Family-tagged fitted model that forecasts in original units."""

    spec: ModelSpec
    inner: object
    pre_records: list[TransformRecord]
    origin_timestamp: int
    frequency: int
    n_train: int
    fit_seconds: float
    lstm_tail: np.ndarray | None = None
    lstm_report: lstm.TrainingReport | None = None

    @property
    def family(self) -> str:
        return self.spec.family

    def forecast(self, horizon: int, confidence: float = 0.95) -> Forecast:
        if self.family in ("arima", "sarima"):
            fc = arima.forecast_arima(self.inner, horizon, confidence)
        elif self.family == "ets":
            fc = ets.forecast_ets(self.inner, horizon, confidence)
        else:
            fc = lstm.forecast_lstm(self.inner["weights"], self.spec.lstm_config,
                                    self.lstm_tail, horizon,
                                    denorm_record=self.inner["minmax"],
                                    origin_timestamp=self.origin_timestamp,
                                    frequency=self.frequency)
        for record in reversed(self.pre_records):
            fc.points = invert_values(fc.points, record)
            if fc.lower is not None:
                fc.lower = invert_values(fc.lower, record)
                fc.upper = invert_values(fc.upper, record)
        fc.model_digest = self.spec.digest()
        return fc

    def in_sample_expected(self) -> np.ndarray:
        """One-step in-sample predictions on the original scale; warm-up
        positions that have no prediction are NaN."""
        if self.family in ("arima", "sarima"):
            expected = arima.one_step_predictions(self.inner)
        elif self.family == "ets":
            expected = self.inner.fitted_values.copy()
        else:
            cfg = self.spec.lstm_config
            normed = self.inner["normalized_values"]
            X, _ = lstm.windows_from_values(normed, cfg.window)
            preds = lstm.predict_batch(self.inner["weights"], X)
            expected = np.full(len(normed), np.nan)
            expected[cfg.window:] = invert_values(preds, self.inner["minmax"])
        for record in reversed(self.pre_records):
            expected = invert_values(expected, record)
        return expected

    def diagnostics(self) -> dict:
        if self.family in ("arima", "sarima"):
            return {"aic": self.inner.aic, "css": self.inner.css,
                    "sigma2": self.inner.params.sigma2, "n_effective": self.inner.n_effective}
        if self.family == "ets":
            return {"aic": self.inner.aic, "sse": self.inner.sse,
                    "sigma2": self.inner.sigma2,
                    "alpha": self.inner.params.alpha, "beta": self.inner.params.beta,
                    "gamma": self.inner.params.gamma}
        report = self.lstm_report
        return {"final_train_loss": report.train_losses[-1] if report.train_losses else None,
                "epochs": len(report.train_losses),
                "training_report": report.to_dict()}

    def to_dict(self) -> dict:
        doc = {
            "spec": self.spec.to_dict(),
            "pre_records": [r.to_dict() for r in self.pre_records],
            "origin_timestamp": self.origin_timestamp,
            "frequency": self.frequency,
            "n_train": self.n_train,
            "fit_seconds": self.fit_seconds,
        }
        if self.family in ("arima", "sarima"):
            doc["arima"] = self.inner.to_dict()
        elif self.family == "ets":
            doc["ets_model"] = self.inner.to_dict()
        else:
            doc["lstm_model"] = {
                "weights": self.inner["weights"].to_dict(),
                "minmax": self.inner["minmax"].to_dict(),
                "normalized_values": [float(v) for v in self.inner["normalized_values"]],
                "tail": [float(v) for v in self.lstm_tail],
                "report": self.lstm_report.to_dict(),
            }
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "FittedModel":
        spec = ModelSpec.from_dict(doc["spec"])
        pre = [TransformRecord.from_dict(r) for r in doc["pre_records"]]
        base = dict(spec=spec, pre_records=pre,
                    origin_timestamp=int(doc["origin_timestamp"]),
                    frequency=int(doc["frequency"]), n_train=int(doc["n_train"]),
                    fit_seconds=float(doc.get("fit_seconds", 0.0)))
        if spec.family in ("arima", "sarima"):
            return cls(inner=arima.FittedArima.from_dict(doc["arima"]), **base)
        if spec.family == "ets":
            return cls(inner=ets.FittedEts.from_dict(doc["ets_model"]), **base)
        m = doc["lstm_model"]
        inner = {
            "weights": lstm.LstmWeights.from_dict(m["weights"]),
            "minmax": TransformRecord.from_dict(m["minmax"]),
            "normalized_values": np.asarray(m["normalized_values"], dtype=float),
        }
        return cls(inner=inner, lstm_tail=np.asarray(m["tail"], dtype=float),
                   lstm_report=lstm.TrainingReport.from_dict(m["report"]), **base)


def fit_model(series: TimeSeries, spec: ModelSpec) -> FittedModel:
    """Fit any family on a clean series; raises DataError on missing values."""
    if series.has_missing:
        raise DataError("series contains missing values; impute before fitting")
    started = time.perf_counter()
    work, pre_records = _apply_spec_transforms(series, spec.transforms)

    lstm_tail = None
    lstm_report = None
    if spec.family in ("arima", "sarima"):
        order = arima.ArimaOrder(*spec.order)
        seasonal = arima.SeasonalOrder(*spec.seasonal_order) if spec.seasonal_order else None
        inner = arima.fit_arima(work, order, seasonal)
    elif spec.family == "ets":
        inner = ets.fit_ets(work, spec.ets_spec)
    else:
        cfg = spec.lstm_config
        if len(work) <= cfg.window:
            raise DataError(f"series of length {len(work)} too short for window {cfg.window}")
        normalized, minmax = normalize(work, "minmax")
        X, y = lstm.windows_from_values(normalized.values, cfg.window)
        weights, lstm_report = lstm.train((X, y), None, cfg)
        inner = {"weights": weights, "minmax": minmax,
                 "normalized_values": normalized.values.copy()}
        lstm_tail = normalized.values[-cfg.window:].copy()

    return FittedModel(spec=spec, inner=inner, pre_records=pre_records,
                       origin_timestamp=int(series.timestamps[-1]),
                       frequency=series.frequency, n_train=len(series),
                       fit_seconds=time.perf_counter() - started,
                       lstm_tail=lstm_tail, lstm_report=lstm_report)


def forecaster_for(spec: ModelSpec):
    """(train_series, horizon) -> point forecasts, as used by the evaluator."""

    def fit_and_forecast(train: TimeSeries, horizon: int) -> np.ndarray:
        fitted = fit_model(train, spec)
        return fitted.forecast(horizon).points

    return fit_and_forecast
