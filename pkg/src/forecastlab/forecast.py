"""Forecast container shared by every model family."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .series import format_timestamp


@dataclass
class Forecast:
    """Point forecasts over a horizon with optional per-step intervals.

    Timestamps continue the source grid. ``lower``/``upper`` are None when
    the model family does not produce intervals (flagged via
    ``intervals_available``).
    """

    origin_timestamp: int
    frequency: int
    timestamps: np.ndarray
    points: np.ndarray
    lower: np.ndarray | None
    upper: np.ndarray | None
    confidence: float | None
    model_digest: str = ""
    intervals_available: bool = True

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.points = np.asarray(self.points, dtype=float)
        if self.lower is not None:
            self.lower = np.asarray(self.lower, dtype=float)
        if self.upper is not None:
            self.upper = np.asarray(self.upper, dtype=float)

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        steps = []
        for i in range(len(self.points)):
            step = {
                "timestamp": format_timestamp(int(self.timestamps[i])),
                "epoch": int(self.timestamps[i]),
                "point": float(self.points[i]),
                "lower": float(self.lower[i]) if self.lower is not None else None,
                "upper": float(self.upper[i]) if self.upper is not None else None,
            }
            steps.append(step)
        return {
            "origin_timestamp": format_timestamp(self.origin_timestamp),
            "origin_epoch": int(self.origin_timestamp),
            "frequency": self.frequency,
            "confidence": self.confidence,
            "intervals_available": self.intervals_available,
            "model_digest": self.model_digest,
            "steps": steps,
        }
