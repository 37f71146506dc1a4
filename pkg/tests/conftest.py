import numpy as np
import pytest

from forecastlab.series import TimeSeries

DAY = 86400
START = 1704067200  # 2024-01-01T00:00:00Z


def make_series(values, frequency=DAY, start=START, name="value") -> TimeSeries:
    values = np.asarray(values, dtype=float)
    timestamps = start + frequency * np.arange(len(values), dtype=np.int64)
    return TimeSeries(timestamps, values, frequency, name)


@pytest.fixture
def series_factory():
    return make_series
