"""Seeded synthetic series generators so every test and demo is self-contained.

Two recipes: a generic seasonal series (linear trend + sinusoid + Gaussian
noise) and a web-traffic-like series (weekly pattern + noise + injected
spikes at seeded positions).
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .series import TimeSeries

DEFAULT_START = 1704067200  # 2024-01-01T00:00:00Z
DAY = 86400


def seasonal_series(n: int = 240, period: int = 12, seed: int = 7, *,
                    base: float = 100.0, trend: float = 0.3, amplitude: float = 25.0,
                    noise: float = 3.0, frequency: int = DAY,
                    start: int = DEFAULT_START, name: str = "value") -> TimeSeries:
    """Trend + sinusoid + seeded Gaussian noise."""
    if n < 3:
        raise ArgumentError("need at least 3 points")
    if period < 2:
        raise ArgumentError("period must be >= 2")
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    values = (base + trend * t + amplitude * np.sin(2.0 * np.pi * t / period)
              + rng.normal(0.0, noise, size=n))
    timestamps = start + frequency * t.astype(np.int64)
    return TimeSeries(timestamps, values, frequency, name)


def traffic_series(n: int = 240, seed: int = 7, *, period: int = 7,
                   base: float = 1000.0, trend: float = 1.5, amplitude: float = 180.0,
                   noise: float = 25.0, n_spikes: int = 1, spike_scale: float = 10.0,
                   frequency: int = DAY, start: int = DEFAULT_START,
                   name: str = "traffic") -> tuple[TimeSeries, list[int]]:
    """Web-traffic-like series with weekly seasonality and injected spikes.

    Returns the series and the (sorted) indices where spikes were added;
    spikes land away from the edges so warm-up windows keep them visible.
    """
    if n < 3 * period:
        raise ArgumentError(f"need at least {3 * period} points")
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    values = (base + trend * t + amplitude * np.sin(2.0 * np.pi * t / period)
              + rng.normal(0.0, noise, size=n))
    margin = max(period, n // 10)
    candidates = rng.choice(np.arange(margin, n - margin), size=n_spikes, replace=False)
    spike_indices = sorted(int(i) for i in candidates)
    for idx in spike_indices:
        values[idx] += spike_scale * amplitude
    timestamps = start + frequency * t.astype(np.int64)
    return TimeSeries(timestamps, values, frequency, name), spike_indices
