"""LSTM forward pass, BPTT gradients, training, and forecasting."""

import math

import numpy as np
import pytest

from forecastlab.errors import ArgumentError, DataError, DivergenceError
from forecastlab.lstm import (LstmConfig, LstmWeights, forward, forecast_lstm,
                              gradient_check, init_weights, predict_batch, train,
                              windows_from_values)
from forecastlab.preprocess import TransformRecord


def sinusoid_pairs(n=50, window=8):
    t = np.arange(n)
    values = 0.5 + 0.4 * np.sin(2 * np.pi * t / 10)
    return windows_from_values(values, window), values


def test_zero_weights_collapse_to_output_bias():
    cfg = LstmConfig(layers=1, hidden_units=4, window=3, seed=1)
    weights = init_weights(cfg)
    for _, arr in weights.named_params():
        arr[...] = 0.0
    assert forward(weights, [1.0, 2.0, 3.0]) == 0.0
    weights.b_y[0] = 0.75
    assert forward(weights, [1.0, 2.0, 3.0]) == 0.75


def test_hand_computed_single_unit():
    """One unit, two steps, explicit weights, worked through the gate
    equations by hand."""
    cfg = LstmConfig(layers=1, hidden_units=1, window=2, seed=0)
    weights = init_weights(cfg)
    layer = weights.layers[0]
    layer["W_i"][:] = 0.5; layer["U_i"][:] = 0.1; layer["b_i"][:] = 0.0
    layer["W_f"][:] = -0.3; layer["U_f"][:] = 0.2; layer["b_f"][:] = 1.0
    layer["W_o"][:] = 0.7; layer["U_o"][:] = -0.1; layer["b_o"][:] = 0.2
    layer["W_g"][:] = 0.4; layer["U_g"][:] = 0.3; layer["b_g"][:] = -0.1
    weights.W_y[:] = 2.0
    weights.b_y[:] = 0.5

    def sigmoid(v):
        return 1.0 / (1.0 + math.exp(-v))

    h = c = 0.0
    for x in (0.6, -0.2):
        i = sigmoid(0.5 * x + 0.1 * h)
        f = sigmoid(-0.3 * x + 0.2 * h + 1.0)
        o = sigmoid(0.7 * x - 0.1 * h + 0.2)
        g = math.tanh(0.4 * x + 0.3 * h - 0.1)
        c = f * c + i * g
        h = o * math.tanh(c)
    expected = 2.0 * h + 0.5
    assert forward(weights, [0.6, -0.2]) == pytest.approx(expected, abs=1e-12)


def test_order_sensitivity():
    cfg = LstmConfig(layers=1, hidden_units=5, window=4, seed=2)
    weights = init_weights(cfg)
    window = np.array([0.1, 0.5, -0.3, 0.8])
    assert forward(weights, window) != forward(weights, window[::-1])


def test_forget_bias_initialized_to_one():
    cfg = LstmConfig(layers=2, hidden_units=3, window=4, seed=3)
    weights = init_weights(cfg)
    for layer in weights.layers:
        assert np.array_equal(layer["b_f"], np.ones(3))


def test_gradient_check_one_and_two_layers():
    rng = np.random.default_rng(5)
    for layers, seed in ((1, 11), (2, 12)):
        cfg = LstmConfig(layers=layers, hidden_units=3, window=4, seed=seed)
        weights = init_weights(cfg)
        pair = (rng.normal(0.0, 0.5, 4), 0.3)
        assert gradient_check(weights, pair, 1e-5) <= 1e-4


def test_gradient_check_zero_gradient_guard():
    cfg = LstmConfig(layers=1, hidden_units=2, window=3, seed=6)
    weights = init_weights(cfg)
    for _, arr in weights.named_params():
        arr[...] = 0.0
    # prediction is constant zero; target zero makes every gradient zero
    assert gradient_check(weights, (np.zeros(3), 0.0), 1e-5) == 0.0


def test_gradient_check_epsilon_domain():
    cfg = LstmConfig(layers=1, hidden_units=2, window=3, seed=7)
    weights = init_weights(cfg)
    with pytest.raises(ArgumentError):
        gradient_check(weights, (np.zeros(3), 0.0), 1e-1)


def test_overfits_noise_free_sinusoid():
    (X, y), _ = sinusoid_pairs()
    cfg = LstmConfig(layers=1, hidden_units=16, window=8, learning_rate=0.02,
                     epochs=500, batch_size=16, seed=3)
    _, report = train((X, y), None, cfg)
    assert report.train_losses[-1] < 1e-3
    assert len(report.train_losses) == 500


def test_zero_learning_rate_is_inert():
    (X, y), _ = sinusoid_pairs()
    cfg = LstmConfig(layers=1, hidden_units=8, window=8, learning_rate=0.0,
                     epochs=5, batch_size=16, seed=4)
    weights, report = train((X, y), None, cfg)
    fresh = init_weights(cfg)
    for (_, a), (_, b) in zip(weights.named_params(), fresh.named_params()):
        assert np.array_equal(a, b)
    assert len(set(report.train_losses)) == 1


def test_training_deterministic_for_seed():
    (X, y), _ = sinusoid_pairs()
    cfg = LstmConfig(layers=1, hidden_units=8, window=8, epochs=20, seed=9, dropout=0.2)
    _, r1 = train((X, y), None, cfg)
    _, r2 = train((X, y), None, cfg)
    assert r1.train_losses == r2.train_losses


def test_validation_losses_tracked():
    (X, y), _ = sinusoid_pairs()
    cfg = LstmConfig(layers=1, hidden_units=4, window=8, epochs=7, seed=10)
    _, report = train((X, y), (X[:5], y[:5]), cfg)
    assert len(report.validation_losses) == 7
    assert all(np.isfinite(report.validation_losses))


def test_empty_training_set():
    cfg = LstmConfig(layers=1, hidden_units=4, window=8, epochs=2, seed=1)
    with pytest.raises(DataError):
        train((np.empty((0, 8)), np.empty(0)), None, cfg)


def test_divergence_reports_epoch():
    (X, y), _ = sinusoid_pairs()
    cfg = LstmConfig(layers=1, hidden_units=8, window=8, learning_rate=1e155,
                     epochs=50, batch_size=16, seed=5, clip_norm=1e300)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError) as excinfo:
            train((X, y), None, cfg)
    assert excinfo.value.epoch is not None


def test_forecast_of_constant_series_stays_near_constant():
    values = np.full(40, 0.5)
    X, y = windows_from_values(values, 6)
    cfg = LstmConfig(layers=1, hidden_units=8, window=6, learning_rate=0.02,
                     epochs=150, batch_size=16, seed=7)
    weights, _ = train((X, y), None, cfg)
    fc = forecast_lstm(weights, cfg, values[-6:], 5)
    assert np.max(np.abs(fc.points - 0.5)) < 1e-2


def test_forecast_horizon_one_equals_forward():
    (X, y), values = sinusoid_pairs()
    cfg = LstmConfig(layers=1, hidden_units=8, window=8, epochs=20, seed=9)
    weights, _ = train((X, y), None, cfg)
    tail = values[-8:]
    fc = forecast_lstm(weights, cfg, tail, 1)
    assert fc.points[0] == forward(weights, tail)
    assert fc.lower is None and fc.upper is None and not fc.intervals_available


def test_forecast_recursive_equals_chained_forward():
    (X, y), values = sinusoid_pairs()
    cfg = LstmConfig(layers=1, hidden_units=8, window=8, epochs=20, seed=9)
    weights, _ = train((X, y), None, cfg)
    tail = values[-8:]
    fc = forecast_lstm(weights, cfg, tail, 3)
    buf = tail.copy()
    manual = []
    for _ in range(3):
        nxt = forward(weights, buf)
        manual.append(nxt)
        buf = np.concatenate([buf[1:], [nxt]])
    assert np.array_equal(fc.points, manual)


def test_forecast_denormalizes():
    cfg = LstmConfig(layers=1, hidden_units=2, window=3, seed=1)
    weights = init_weights(cfg)
    for _, arr in weights.named_params():
        arr[...] = 0.0
    weights.b_y[0] = 0.5
    record = TransformRecord("normalize", {"method": "minmax", "min": 100.0, "max": 200.0})
    fc = forecast_lstm(weights, cfg, np.zeros(3), 2, denorm_record=record)
    assert np.allclose(fc.points, 150.0)


def test_forecast_tail_length_checked():
    cfg = LstmConfig(layers=1, hidden_units=2, window=5, seed=1)
    weights = init_weights(cfg)
    with pytest.raises(ArgumentError):
        forecast_lstm(weights, cfg, np.zeros(4), 2)


def test_inference_has_no_dropout():
    cfg = LstmConfig(layers=1, hidden_units=8, window=6, dropout=0.5, epochs=3, seed=8)
    values = np.linspace(0.0, 1.0, 30)
    X, y = windows_from_values(values, 6)
    weights, _ = train((X, y), None, cfg)
    a = predict_batch(weights, X)
    b = predict_batch(weights, X)
    assert np.array_equal(a, b)


def test_weights_serialization_round_trip():
    cfg = LstmConfig(layers=2, hidden_units=4, window=5, seed=13)
    weights = init_weights(cfg)
    doc = weights.to_dict()
    assert doc["gate_order"] == ["i", "f", "o", "g"]
    again = LstmWeights.from_dict(doc)
    window = np.linspace(-1, 1, 5)
    assert forward(weights, window) == forward(again, window)


def test_config_validation():
    with pytest.raises(ArgumentError):
        LstmConfig(layers=0)
    with pytest.raises(ArgumentError):
        LstmConfig(dropout=1.0)
    with pytest.raises(ArgumentError):
        LstmConfig(clip_norm=0.0)


def test_windows_from_values():
    X, y = windows_from_values(np.arange(6.0), 2)
    assert X.shape == (4, 2)
    assert np.array_equal(y, [2.0, 3.0, 4.0, 5.0])
    with pytest.raises(ArgumentError):
        windows_from_values(np.arange(3.0), 3)
