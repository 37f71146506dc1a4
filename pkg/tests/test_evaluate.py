"""Metrics, rolling-origin cross-validation, leaderboard, anomalies."""

import math

import numpy as np
import pytest

from forecastlab import synth
from forecastlab.errors import ArgumentError, ComparisonError
from forecastlab.ets import EtsSpec
from forecastlab.evaluate import (AnomalyEvent, compare_models, detect_anomalies,
                                  fold_geometry, leaderboard_table, metrics,
                                  rolling_origin_cv)
from forecastlab.modelspec import ModelSpec

from conftest import make_series


# --- metrics ---


def test_perfect_prediction_zero_metrics():
    m = metrics([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert (m.mae, m.mse, m.rmse, m.mape) == (0.0, 0.0, 0.0, 0.0)


def test_hand_derived_values():
    m = metrics([100.0, 200.0], [110.0, 180.0])
    assert m.mae == pytest.approx(15.0, abs=1e-12)
    assert m.mse == pytest.approx(250.0, abs=1e-12)
    assert m.rmse == pytest.approx(15.8113883, abs=1e-7)
    # percentage errors are 10/100 and 20/200, both 10%
    assert m.mape == pytest.approx(10.0, abs=1e-12)
    assert m.n == 2 and m.mape_excluded == 0


def test_zero_actual_skip_rule():
    m = metrics([0.0, 10.0], [1.0, 10.0])
    assert m.mape == 0.0
    assert m.mape_excluded == 1
    assert m.mae == pytest.approx(0.5)


def test_all_zero_actuals_mape_unavailable():
    m = metrics([0.0, 0.0], [1.0, 2.0])
    assert m.mape is None
    assert m.mape_excluded == 2
    assert m.mae == pytest.approx(1.5)


def test_length_mismatch():
    with pytest.raises(ArgumentError):
        metrics([1.0, 2.0], [1.0])
    with pytest.raises(ArgumentError):
        metrics([], [])


def test_rmse_squared_is_mse_and_mae_below_rmse():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.normal(0, 10, 30)
        p = a + rng.normal(0, 3, 30)
        m = metrics(a, p)
        assert m.rmse ** 2 == pytest.approx(m.mse, rel=1e-12)
        assert m.mae <= m.rmse + 1e-12


def test_metrics_permutation_invariant():
    rng = np.random.default_rng(1)
    a = rng.normal(5, 2, 40)
    p = a + rng.normal(0, 1, 40)
    perm = rng.permutation(40)
    m1, m2 = metrics(a, p), metrics(a[perm], p[perm])
    assert m1.mae == pytest.approx(m2.mae, rel=1e-12)
    assert m1.mape == pytest.approx(m2.mape, rel=1e-12)


# --- rolling-origin CV ---


def test_fold_geometry_example():
    """10 points, 2 folds, horizon 2: train on 6 and 8."""
    assert fold_geometry(10, 2, 2) == [6, 8]


def test_fold_geometry_infeasible():
    with pytest.raises(ArgumentError, match="at least 13"):
        fold_geometry(10, 4, 3)


def test_cv_with_oracle_is_exact():
    series = make_series(np.arange(10.0) + 1.0)

    def oracle(train, horizon):
        start = len(train)
        return series.values[start:start + horizon]

    report = rolling_origin_cv(series, oracle, folds=2, horizon=2)
    assert report.aggregate.mae == 0.0
    assert report.aggregate.n == 4
    assert [f.train_length for f in report.folds] == [6, 8]


def test_cv_no_leakage():
    series = make_series(np.arange(40.0))
    seen = []

    def probe(train, horizon):
        seen.append((int(train.timestamps.max()), len(train)))
        return np.zeros(horizon)

    report = rolling_origin_cv(series, probe, folds=4, horizon=3)
    for fold, (max_train_ts, train_len) in zip(report.folds, seen):
        assert max_train_ts < fold.test_start


def test_cv_aggregate_pools_folds():
    series = make_series(np.arange(12.0))

    def biased(train, horizon):
        return series.values[len(train):len(train) + horizon] + 2.0

    report = rolling_origin_cv(series, biased, folds=3, horizon=2)
    assert report.aggregate.n == sum(f.metric_set.n for f in report.folds)
    assert report.aggregate.mae == pytest.approx(2.0)


# --- compare_models ---


def test_oracle_double_outranks_naive_double():
    """A perfect-forecast test double beats a last-value forecaster under
    the leaderboard ranking key."""
    from forecastlab.evaluate import _rank_key

    series = synth.seasonal_series(60, 6, seed=2)

    def oracle(train, horizon):
        start = len(train)
        return series.values[start:start + horizon]

    def naive(train, horizon):
        return np.full(horizon, train.values[-1])

    oracle_report = rolling_origin_cv(series, oracle, folds=3, horizon=4,
                                      model_id="oracle", spec_digest="aaaa")
    naive_report = rolling_origin_cv(series, naive, folds=3, horizon=4,
                                     model_id="naive", spec_digest="bbbb")
    ranked = sorted([naive_report, oracle_report], key=_rank_key)
    assert ranked[0].model_id == "oracle"
    assert ranked[0].aggregate.mape == 0.0


def test_compare_ranks_sarima_above_arima_on_seasonal_data():
    series = synth.seasonal_series(240, 12, seed=7)
    specs = [ModelSpec(family="arima", order=(1, 1, 1)),
             ModelSpec(family="sarima", order=(1, 1, 1), seasonal_order=(1, 1, 1, 12))]
    reports = compare_models(series, specs, folds=3, horizon=12)
    assert reports[0].model_id.startswith("SARIMA")
    assert reports[0].aggregate.mape < reports[1].aggregate.mape


def test_compare_order_of_specs_irrelevant():
    series = synth.seasonal_series(60, 6, seed=3)
    specs = [ModelSpec(family="ets", ets_spec=EtsSpec()),
             ModelSpec(family="arima", order=(1, 0, 0))]
    a = compare_models(series, specs, folds=2, horizon=4)
    b = compare_models(series, list(reversed(specs)), folds=2, horizon=4)
    assert [r.spec_digest for r in a] == [r.spec_digest for r in b]
    assert [r.aggregate.mape for r in a] == [r.aggregate.mape for r in b]


def test_compare_identical_specs_tie_break_by_digest():
    series = synth.seasonal_series(60, 6, seed=4)
    specs = [ModelSpec(family="ets", ets_spec=EtsSpec()),
             ModelSpec(family="ets", ets_spec=EtsSpec(), transforms=("log",))]
    reports = compare_models(series, specs, folds=2, horizon=4)
    assert len(reports) == 2
    assert reports[0].spec_digest != reports[1].spec_digest


def test_compare_failures_ranked_last_with_detail():
    series = synth.seasonal_series(40, 6, seed=5)
    specs = [ModelSpec(family="ets", ets_spec=EtsSpec()),
             ModelSpec(family="arima", order=(12, 2, 12))]  # infeasible on 40 points
    reports = compare_models(series, specs, folds=2, horizon=4)
    assert reports[-1].error is not None
    assert reports[0].error is None


def test_compare_all_fail():
    series = synth.seasonal_series(40, 6, seed=6)
    specs = [ModelSpec(family="arima", order=(12, 2, 12))]
    with pytest.raises(ComparisonError) as excinfo:
        compare_models(series, specs, folds=2, horizon=4)
    assert excinfo.value.causes


def test_compare_empty_specs():
    with pytest.raises(ArgumentError):
        compare_models(synth.seasonal_series(40, 6, seed=1), [], folds=2, horizon=4)


def test_leaderboard_table_layout():
    series = synth.seasonal_series(60, 6, seed=8)
    reports = compare_models(series, [ModelSpec(family="ets", ets_spec=EtsSpec())],
                             folds=2, horizon=4)
    table = leaderboard_table(reports)
    lines = table.splitlines()
    assert lines[0].split() == ["Model", "MAE", "MSE", "RMSE", "MAPE"]
    assert len(lines) == 2 + len(reports)


# --- anomalies ---


def test_spike_at_series_end_flagged_by_naive_model():
    rng = np.random.default_rng(10)
    values = rng.normal(100.0, 2.0, 120)
    values[-1] += 80.0
    series = make_series(values)
    naive = np.concatenate([[np.nan], values[:-1]])
    events = detect_anomalies(series, naive, 4.0)
    assert len(events) == 1
    assert events[0].timestamp == int(series.timestamps[-1])
    assert events[0].direction == "spike"
    assert abs(events[0].score) >= 4.0


def test_drop_direction():
    rng = np.random.default_rng(11)
    values = rng.normal(100.0, 2.0, 120)
    values[-1] -= 80.0
    series = make_series(values)
    naive = np.concatenate([[np.nan], values[:-1]])
    events = detect_anomalies(series, naive, 4.0)
    assert events and events[-1].direction == "drop"


def test_perfect_fit_no_events():
    series = make_series([5.0] * 30)
    events = detect_anomalies(series, series.values.copy(), 1.0)
    assert events == []


def test_threshold_monotonicity():
    series, _ = synth.traffic_series(200, seed=11)
    naive = np.concatenate([[np.nan], series.values[:-1]])
    counts = [len(detect_anomalies(series, naive, thr)) for thr in (2.0, 4.0, 6.0, 10.0, 1e9)]
    assert counts == sorted(counts, reverse=True)
    assert counts[-1] == 0


def test_events_chronological():
    rng = np.random.default_rng(12)
    values = rng.normal(0.0, 1.0, 200)
    values[[50, 120, 180]] += 30.0
    series = make_series(values)
    naive = np.concatenate([[np.nan], values[:-1]])
    events = detect_anomalies(series, naive, 4.0)
    stamps = [e.timestamp for e in events]
    assert stamps == sorted(stamps)


def test_threshold_must_be_positive():
    series = make_series([1.0, 2.0, 3.0])
    with pytest.raises(ArgumentError):
        detect_anomalies(series, series.values, 0.0)
