"""Imputation, outliers, invertible transforms, features, and the
stationarity check."""

import math

import numpy as np
import pytest

from forecastlab import preprocess as pp
from forecastlab.errors import ArgumentError, ImputeError, NumericalError, TransformError
from forecastlab.series import TimeSeries

from conftest import make_series

ROUND_TRIP_TOL = 1e-12


# --- imputation ---


def test_linear_interpolation_midpoint():
    out = pp.impute_missing(make_series([1.0, np.nan, 3.0]), "linear_interpolation")
    assert np.array_equal(out.values, [1.0, 2.0, 3.0])


def test_forward_fill():
    out = pp.impute_missing(make_series([5.0, np.nan, np.nan]), "forward_fill")
    assert np.array_equal(out.values, [5.0, 5.0, 5.0])


def test_forward_fill_leading_missing_errors():
    with pytest.raises(ImputeError, match="predecessor"):
        pp.impute_missing(make_series([np.nan, 2.0]), "forward_fill")


def test_linear_interpolation_requires_endpoints():
    with pytest.raises(ImputeError):
        pp.impute_missing(make_series([np.nan, 2.0, 3.0]), "linear_interpolation")
    with pytest.raises(ImputeError):
        pp.impute_missing(make_series([1.0, 2.0, np.nan]), "linear_interpolation")


def test_impute_all_missing_errors():
    with pytest.raises(ImputeError, match="all-missing"):
        pp.impute_missing(make_series([np.nan, np.nan]), "forward_fill")


def test_impute_never_alters_present_values():
    rng = np.random.default_rng(2)
    for _ in range(20):
        values = rng.normal(0, 5, 30)
        missing = rng.random(30) < 0.3
        missing[0] = missing[-1] = False
        values[missing] = np.nan
        series = make_series(values)
        for method in ("linear_interpolation", "forward_fill"):
            out = pp.impute_missing(series, method)
            present = ~np.isnan(values)
            assert np.array_equal(out.values[present], values[present])
            assert not out.has_missing


# --- outliers ---


def test_zscore_misses_extreme_that_inflates_std():
    series = make_series([1.0, 1.0, 1.0, 1.0, 100.0])
    assert pp.detect_outliers(series, "zscore", threshold=3.0) == []
    assert pp.detect_outliers(series, "iqr", multiplier=1.5) == [4]


def test_constant_series_no_outliers():
    series = make_series([7.0] * 8)
    assert pp.detect_outliers(series, "zscore") == []
    assert pp.detect_outliers(series, "iqr") == []


def test_zscore_flags_single_outlier():
    series = make_series([0.0] * 9 + [10.0])
    assert pp.detect_outliers(series, "zscore", threshold=2.0) == [9]


def test_outlier_indices_ascending():
    series = make_series([0.0, 50.0, 0.0, 0.0, -50.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    idx = pp.detect_outliers(series, "iqr", multiplier=1.5)
    assert idx == sorted(idx)
    assert set(idx) == {1, 4}


def test_replace_interpolate_midpoint():
    out = pp.replace_outliers(make_series([1.0, 2.0, 100.0, 4.0]), [2], "interpolate")
    assert np.allclose(out.values, [1.0, 2.0, 3.0, 4.0])


def test_replace_empty_indices_is_identity():
    series = make_series([1.0, 2.0, 100.0, 4.0])
    assert pp.replace_outliers(series, [], "interpolate") == series


def test_replace_clip_to_bound_uses_surviving_quartiles():
    out = pp.replace_outliers(make_series([1.0, 2.0, 100.0, 4.0]), [2], "clip_to_bound")
    # survivors [1, 2, 4]: Q1=1.5, Q3=3.0, upper fence 3 + 1.5*1.5 = 5.25
    assert np.allclose(out.values, [1.0, 2.0, 5.25, 4.0])


def test_replace_out_of_range_index():
    with pytest.raises(ArgumentError, match="out of range"):
        pp.replace_outliers(make_series([1.0, 2.0, 3.0]), [5], "interpolate")


def test_replace_only_touches_flagged(series_factory):
    rng = np.random.default_rng(3)
    values = rng.normal(0, 1, 40)
    series = series_factory(values)
    out = pp.replace_outliers(series, [4, 20], "interpolate")
    untouched = np.ones(40, dtype=bool)
    untouched[[4, 20]] = False
    assert np.array_equal(out.values[untouched], values[untouched])


# --- differencing ---


def test_difference_basic():
    diffed, record = pp.difference(make_series([1.0, 3.0, 6.0, 10.0]), 1)
    assert np.array_equal(diffed.values, [2.0, 3.0, 4.0])
    assert record.params["lag"] == 1
    assert record.params["initial_values"] == [1.0]


def test_difference_removes_linear_trend():
    diffed, _ = pp.difference(make_series(4.0 * np.arange(10.0)), 1)
    assert np.allclose(diffed.values, 4.0)


def test_difference_lag3():
    diffed, _ = pp.difference(make_series([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), 3)
    assert np.array_equal(diffed.values, [3.0, 3.0, 3.0])


def test_difference_lag_too_large():
    with pytest.raises(ArgumentError):
        pp.difference(make_series([1.0, 2.0, 3.0]), 3)


def test_undifference_round_trip():
    series = make_series([1.0, 3.0, 6.0, 10.0])
    diffed, record = pp.difference(series, 1)
    assert pp.undifference(diffed, record) == series


def test_undifference_round_trip_lag12():
    rng = np.random.default_rng(4)
    series = make_series(rng.normal(100, 10, 60))
    diffed, record = pp.difference(series, 12)
    back = pp.undifference(diffed, record)
    assert np.max(np.abs(back.values - series.values) / np.abs(series.values)) < ROUND_TRIP_TOL


def test_undifference_forecast_continuation():
    series = make_series([1.0, 3.0, 6.0, 10.0])
    diffed, record = pp.difference(series, 1)
    extended = TimeSeries(
        np.concatenate([diffed.timestamps, [diffed.timestamps[-1] + series.frequency]]),
        np.concatenate([diffed.values, [4.0]]), series.frequency)
    rebuilt = pp.undifference(extended, record)
    assert rebuilt.values[-1] == 14.0


def test_undifference_mismatched_record():
    series = make_series([1.0, 3.0, 6.0, 10.0])
    diffed, record = pp.difference(series, 1)
    _, wrong = pp.difference(make_series([5.0, 5.0, 5.0, 5.0], start=123456), 1)
    with pytest.raises(ArgumentError):
        pp.undifference(diffed, wrong)
    with pytest.raises(ArgumentError):
        pp.undifference(diffed, pp.TransformRecord("log"))


# --- log / normalize ---


def test_log_transform_known_values():
    out, record = pp.log_transform(make_series([1.0, math.e, math.e ** 2]))
    assert np.allclose(out.values, [0.0, 1.0, 2.0], atol=1e-15)
    assert record.kind == "log"


def test_log_round_trip():
    rng = np.random.default_rng(5)
    series = make_series(rng.uniform(0.5, 50.0, 40))
    out, record = pp.log_transform(series)
    back = pp.invert_transform(out, record)
    assert np.max(np.abs(back.values - series.values) / series.values) < ROUND_TRIP_TOL


def test_log_nonpositive_names_index():
    with pytest.raises(TransformError, match="index 0"):
        pp.log_transform(make_series([0.0, 1.0]))


def test_minmax_maps_to_unit_interval():
    out, record = pp.normalize(make_series([0.0, 5.0, 10.0]), "minmax")
    assert np.allclose(out.values, [0.0, 0.5, 1.0])
    assert record.params == {"method": "minmax", "min": 0.0, "max": 10.0}


def test_zscore_population_std():
    out, _ = pp.normalize(make_series([2.0, 4.0]), "zscore")
    assert np.allclose(out.values, [-1.0, 1.0])


def test_minmax_constant_degenerate():
    with pytest.raises(TransformError, match="degenerate"):
        pp.normalize(make_series([7.0, 7.0, 7.0]), "minmax")


def test_normalize_round_trips():
    rng = np.random.default_rng(6)
    for method in ("minmax", "zscore"):
        for _ in range(20):
            series = make_series(rng.normal(50, 20, 30))
            out, record = pp.normalize(series, method)
            back = pp.denormalize(out, record)
            rel = np.abs(back.values - series.values) / np.maximum(np.abs(series.values), 1e-9)
            assert np.max(rel) < ROUND_TRIP_TOL


def test_record_serialization_round_trip():
    _, record = pp.difference(make_series([1.0, 2.0, 4.0, 7.0]), 2)
    doc = record.to_dict()
    again = pp.TransformRecord.from_dict(doc)
    assert again == record


# --- features ---


def test_lag_features():
    fm = pp.make_features(make_series([1.0, 2.0, 3.0, 4.0]), lags=[1])
    assert fm.columns == ["lag_1"]
    assert np.array_equal(fm.X.ravel(), [1.0, 2.0, 3.0])
    assert np.array_equal(fm.y, [2.0, 3.0, 4.0])


def test_rolling_mean_features():
    fm = pp.make_features(make_series([1.0, 2.0, 3.0, 4.0]), rolling_windows=[2])
    assert fm.columns == ["rollmean_2"]
    assert np.allclose(fm.X.ravel(), [1.5, 2.5])
    assert np.array_equal(fm.y, [3.0, 4.0])


def test_features_lag_exceeds_length():
    with pytest.raises(ArgumentError):
        pp.make_features(make_series([1.0, 2.0, 3.0, 4.0]), lags=[10])


def test_features_need_some_columns():
    with pytest.raises(ArgumentError):
        pp.make_features(make_series([1.0, 2.0, 3.0, 4.0]))


def test_feature_causality():
    """Perturbing x[t] must not change any feature row with target index <= t."""
    rng = np.random.default_rng(7)
    values = rng.normal(0, 1, 30)
    fm = pp.make_features(make_series(values), lags=[1, 3], rolling_windows=[4])
    t = 15
    bumped = values.copy()
    bumped[t] += 100.0
    fm2 = pp.make_features(make_series(bumped), lags=[1, 3], rolling_windows=[4])
    for row, idx in enumerate(fm.time_indices):
        if idx <= t:
            assert np.array_equal(fm.X[row], fm2.X[row])


def test_row_count_rule():
    rng = np.random.default_rng(8)
    values = rng.normal(0, 1, 50)
    fm = pp.make_features(make_series(values), lags=[2, 5], rolling_windows=[7])
    assert len(fm) == 50 - 7


# --- stationarity ---


def test_adf_stationary_noise():
    rng = np.random.default_rng(9)
    series = make_series(rng.normal(0, 1, 500))
    stat, stationary = pp.adf_statistic(series)
    assert stationary
    assert stat < -2.86


def test_adf_random_walk_not_stationary():
    rng = np.random.default_rng(10)
    series = make_series(np.cumsum(rng.normal(0, 1, 500)))
    stat, stationary = pp.adf_statistic(series)
    assert not stationary


def test_adf_differenced_ramp_stationary():
    rng = np.random.default_rng(11)
    ramp = make_series(3.0 * np.arange(300.0) + rng.normal(0, 1e-6, 300))
    diffed, _ = pp.difference(ramp, 1)
    stat, stationary = pp.adf_statistic(diffed)
    assert stationary


def test_adf_matches_direct_ols_oracle():
    """The statistic equals the t-ratio from an independently built regression."""
    rng = np.random.default_rng(12)
    y = np.cumsum(rng.normal(0, 1, 200)) * 0.5 + rng.normal(0, 1, 200)
    series = make_series(y)
    max_lag = 3
    stat, _ = pp.adf_statistic(series, max_lag)

    dy = np.diff(y)
    rows = np.arange(max_lag, len(dy))
    X = np.column_stack([np.ones(len(rows)), y[rows]]
                        + [dy[rows - i] for i in range(1, max_lag + 1)])
    target = dy[rows]
    beta, *_ = np.linalg.lstsq(X, target, rcond=None)
    resid = target - X @ beta
    sigma2 = resid @ resid / (len(rows) - X.shape[1])
    se = np.sqrt(np.diag(sigma2 * np.linalg.inv(X.T @ X)))
    assert np.isclose(stat, beta[1] / se[1], rtol=1e-9)


def test_adf_too_short():
    with pytest.raises(ArgumentError, match="too short"):
        pp.adf_statistic(make_series(np.arange(8.0)), 2)


# --- pipelines ---


def test_apply_pipeline_records_each_step():
    series = make_series([1.0, np.nan, 3.0, 4.0, 5.0, 6.0])
    out, records = pp.apply_pipeline(series, [
        {"op": "impute", "method": "forward_fill"},
        {"op": "normalize", "method": "minmax"},
    ])
    assert [r.kind for r in records] == ["impute", "normalize"]
    assert not out.has_missing
    assert out.values.min() == 0.0 and out.values.max() == 1.0


def test_pipeline_error_names_step():
    series = make_series([0.0, 1.0, 2.0])
    with pytest.raises(TransformError, match="step 0"):
        pp.apply_pipeline(series, [{"op": "log"}])


def test_pipeline_empty_errors():
    with pytest.raises(ArgumentError):
        pp.apply_pipeline(make_series([1.0, 2.0, 3.0]), [])


def test_invert_forecast_path_elementwise():
    rng = np.random.default_rng(13)
    series = make_series(rng.uniform(1.0, 30.0, 40))
    out, records = pp.apply_pipeline(series, [{"op": "log"}, {"op": "normalize", "method": "minmax"}])
    forecast_transformed = out.values[-5:]
    restored = pp.invert_forecast_path(series, records, forecast_transformed)
    assert np.allclose(restored, series.values[-5:], rtol=1e-12)


def test_invert_forecast_path_with_difference():
    series = make_series([1.0, 3.0, 6.0, 10.0])
    out, records = pp.apply_pipeline(series, [{"op": "difference", "lag": 1}])
    restored = pp.invert_forecast_path(series, records, np.array([4.0, 5.0]))
    assert np.allclose(restored, [14.0, 19.0])
