"""Canonical time-series data model, CSV ingestion, and chronological splits.

A :class:`TimeSeries` is a uniformly spaced univariate sequence: int64
epoch-second timestamps, float64 values with NaN marking missing
observations, and the inferred spacing in seconds. Every other module in
the package consumes this type.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import ArgumentError, IngestError, IrregularSeriesError, SplitError

MIN_INGEST_ROWS = 3


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly spaced univariate series. Values are immutable after construction."""

    timestamps: np.ndarray  # int64 epoch seconds, strictly increasing
    values: np.ndarray      # float64, NaN = missing
    frequency: int          # spacing in seconds
    name: str = "value"

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if ts.ndim != 1 or vals.ndim != 1:
            raise ArgumentError("timestamps and values must be one-dimensional")
        if len(ts) != len(vals):
            raise ArgumentError(
                f"length mismatch: {len(ts)} timestamps vs {len(vals)} values"
            )
        if len(ts) < 1:
            raise ArgumentError("series must contain at least one point")
        if len(ts) > 1:
            gaps = np.diff(ts)
            if np.any(gaps <= 0):
                raise ArgumentError("timestamps must be strictly increasing")
            if np.any(gaps != self.frequency):
                raise ArgumentError("timestamps must be spaced exactly one frequency apart")
        if self.frequency <= 0:
            raise ArgumentError("frequency must be positive")
        ts.setflags(write=False)
        vals.setflags(write=False)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.frequency == other.frequency
            and self.name == other.name
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def __hash__(self):
        return hash((self.frequency, self.name, self.timestamps.tobytes(), self.values.tobytes()))

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def with_values(self, values: np.ndarray, name: str | None = None) -> "TimeSeries":
        """Same grid, new values (length must match)."""
        return TimeSeries(self.timestamps, np.asarray(values, dtype=np.float64),
                          self.frequency, self.name if name is None else name)

    def slice(self, start: int, stop: int) -> "TimeSeries":
        if start >= stop:
            raise ArgumentError("slice would be empty")
        return TimeSeries(self.timestamps[start:stop].copy(), self.values[start:stop].copy(),
                          self.frequency, self.name)

    def to_csv(self) -> str:
        """Canonical export: header ``timestamp,value``, ISO-8601 UTC, missing as empty."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["timestamp", "value"])
        for ts, v in zip(self.timestamps, self.values):
            writer.writerow([format_timestamp(int(ts)), "" if math.isnan(v) else repr(float(v))])
        return out.getvalue()


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/validation/test fractions; remainder is test."""

    train_fraction: float
    validation_fraction: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ArgumentError("train_fraction must lie in (0, 1)")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ArgumentError("validation_fraction must lie in [0, 1)")
        if self.train_fraction + self.validation_fraction >= 1.0:
            raise ArgumentError("train_fraction + validation_fraction must be < 1")


@dataclass(frozen=True)
class Horizon:
    """Number of future periods to forecast."""

    steps: int

    def __post_init__(self):
        if not isinstance(self.steps, int) or self.steps < 1:
            raise ArgumentError("horizon steps must be a positive integer")


def parse_timestamp(text: str) -> int:
    """Parse an ISO-8601 datetime or an epoch-second integer to epoch seconds UTC."""
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    try:
        return int(text)
    except ValueError:
        pass
    iso = text[:-1] + "+00:00" if text.endswith("Z") else text
    dt = datetime.fromisoformat(iso)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(epoch_seconds: int) -> str:
    """Epoch seconds to compact ISO-8601 UTC (``...Z``)."""
    dt = datetime.fromtimestamp(epoch_seconds, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def infer_frequency(timestamps: np.ndarray) -> int:
    """Modal spacing of consecutive timestamps.

    Raises IrregularSeriesError when no single spacing is most common or when
    some gap is not a whole multiple of the modal spacing.
    """
    gaps = np.diff(timestamps)
    counts = Counter(int(g) for g in gaps)
    # Most common spacing wins; ties break toward the smaller gap so that
    # larger gaps can still be whole multiples of it.
    freq = min(counts, key=lambda g: (-counts[g], g))
    bad = [int(g) for g in gaps if g % freq != 0]
    if bad:
        raise IrregularSeriesError(
            f"gap of {bad[0]}s is not a multiple of the modal spacing {freq}s"
        )
    return freq


def ingest_csv(raw: bytes | str, timestamp_column: str = "timestamp",
               value_column: str = "value", name: str | None = None) -> TimeSeries:
    """Parse CSV bytes into a TimeSeries on a regular grid.

    Rows are sorted by timestamp, duplicates rejected, and gaps in an
    otherwise regular grid filled with NaN. An empty value field is a
    missing observation.
    """
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestError(f"CSV is not valid UTF-8: {exc}") from exc
    else:
        text = raw
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise IngestError("CSV has no header row")
    for col in (timestamp_column, value_column):
        if col not in reader.fieldnames:
            raise IngestError(f"column {col!r} not found in header {reader.fieldnames}")

    rows: list[tuple[int, float]] = []
    for lineno, row in enumerate(reader, start=2):  # line 1 is the header
        ts_text = row.get(timestamp_column) or ""
        val_text = (row.get(value_column) or "").strip()
        try:
            ts = parse_timestamp(ts_text)
        except (ValueError, OverflowError) as exc:
            raise IngestError(f"row {lineno}: unparseable timestamp {ts_text!r}") from exc
        if val_text == "":
            value = math.nan
        else:
            try:
                value = float(val_text)
            except ValueError as exc:
                raise IngestError(f"row {lineno}: unparseable value {val_text!r}") from exc
        rows.append((ts, value))

    if len(rows) < MIN_INGEST_ROWS:
        raise IngestError(f"too short: {len(rows)} data rows, need at least {MIN_INGEST_ROWS}")

    rows.sort(key=lambda r: r[0])
    seen: dict[int, int] = {}
    for i, (ts, _) in enumerate(rows):
        if ts in seen:
            raise IngestError(
                f"duplicate timestamp {format_timestamp(ts)} (rows {seen[ts] + 1} and {i + 1} after sorting)"
            )
        seen[ts] = i

    timestamps = np.array([r[0] for r in rows], dtype=np.int64)
    freq = infer_frequency(timestamps)

    # Fill interior gaps with explicit missing markers.
    grid = np.arange(timestamps[0], timestamps[-1] + freq, freq, dtype=np.int64)
    values = np.full(len(grid), np.nan)
    idx = (timestamps - timestamps[0]) // freq
    values[idx] = [r[1] for r in rows]

    return TimeSeries(grid, values, int(freq), name or value_column)


def split_chronological(series: TimeSeries, spec: SplitSpec) -> tuple[TimeSeries, TimeSeries, TimeSeries]:
    """Contiguous train/validation/test segments whose concatenation is the input.

    Train gets floor(n*train_fraction) points, validation floor(n*validation_fraction),
    test the remainder.
    """
    if series.has_missing:
        raise SplitError("series contains missing values; impute before splitting")
    n = len(series)
    n_train = int(math.floor(n * spec.train_fraction))
    n_val = int(math.floor(n * spec.validation_fraction))
    n_test = n - n_train - n_val
    if n_train < 1:
        raise SplitError(f"empty train segment ({n} points, fraction {spec.train_fraction})")
    if n_val < 1:
        raise SplitError(f"empty validation segment ({n} points, fraction {spec.validation_fraction})")
    if n_test < 1:
        raise SplitError(f"empty test segment ({n} points, spec {spec})")
    train = series.slice(0, n_train)
    validation = series.slice(n_train, n_train + n_val)
    test = series.slice(n_train + n_val, n)
    return train, validation, test


def train_test_split(series: TimeSeries, train_fraction: float) -> tuple[TimeSeries, TimeSeries]:
    """Two-way chronological split (train gets floor(n*fraction), test the rest)."""
    if series.has_missing:
        raise SplitError("series contains missing values; impute before splitting")
    n = len(series)
    n_train = int(math.floor(n * train_fraction))
    if n_train < 1 or n - n_train < 1:
        raise SplitError(f"split fraction {train_fraction} leaves an empty segment for {n} points")
    return series.slice(0, n_train), series.slice(n_train, n)


def concat(parts: list[TimeSeries]) -> TimeSeries:
    """Rejoin contiguous segments produced by a chronological split."""
    if not parts:
        raise ArgumentError("nothing to concatenate")
    freq = parts[0].frequency
    ts = np.concatenate([p.timestamps for p in parts])
    vals = np.concatenate([p.values for p in parts])
    return TimeSeries(ts, vals, freq, parts[0].name)
