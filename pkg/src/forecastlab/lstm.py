"""Single- or multi-layer LSTM regressor over sliding windows, trained by
full backpropagation through time with Adam.

The cell follows the standard gate equations per step:

    i = sigmoid(W_i x + U_i h + b_i)      f = sigmoid(W_f x + U_f h + b_f)
    o = sigmoid(W_o x + U_o h + b_o)      g = tanh(W_g x + U_g h + b_g)
    c <- f*c + i*g                        h <- o*tanh(c)

Layers stack (h of layer k feeds layer k+1) and the prediction is a linear
head on the final hidden state after the last step. Training uses MSE on
normalized inputs, global gradient-norm clipping, inverted dropout on the
recurrent (hidden-to-hidden) connections only, and is deterministic for a
fixed seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DataError, DivergenceError
from .forecast import Forecast
from .preprocess import TransformRecord, invert_values

GATES = ("i", "f", "o", "g")
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
WEIGHTS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LstmConfig:
    layers: int = 1
    hidden_units: int = 16
    window: int = 10
    dropout: float = 0.0
    learning_rate: float = 0.01
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.layers < 1:
            raise ArgumentError("layers must be >= 1")
        if self.hidden_units < 1:
            raise ArgumentError("hidden_units must be >= 1")
        if self.window < 1:
            raise ArgumentError("window must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ArgumentError("dropout must lie in [0, 1)")
        if self.learning_rate < 0.0:
            raise ArgumentError("learning_rate must be nonnegative")
        if self.epochs < 1:
            raise ArgumentError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ArgumentError("batch_size must be >= 1")
        if self.clip_norm <= 0.0:
            raise ArgumentError("clip_norm must be positive")

    def to_dict(self) -> dict:
        return {"layers": self.layers, "hidden_units": self.hidden_units,
                "window": self.window, "dropout": self.dropout,
                "learning_rate": self.learning_rate, "epochs": self.epochs,
                "batch_size": self.batch_size, "seed": self.seed,
                "clip_norm": self.clip_norm}

    @classmethod
    def from_dict(cls, doc: dict) -> "LstmConfig":
        return cls(**doc)


class LstmWeights:
    """Parameter store: per layer the four gates' input, recurrent, and bias
    arrays (fixed i, f, o, g order) plus the linear output head."""

    def __init__(self, layers: list[dict[str, np.ndarray]], W_y: np.ndarray, b_y: np.ndarray):
        self.layers = layers
        self.W_y = np.asarray(W_y, dtype=float)
        self.b_y = np.asarray(b_y, dtype=float).reshape(1)

    def named_params(self):
        """(path, array) pairs in a fixed, stable order."""
        for idx, layer in enumerate(self.layers):
            for gate in GATES:
                for kind in ("W", "U", "b"):
                    yield f"layer{idx}.{kind}_{gate}", layer[f"{kind}_{gate}"]
        yield "head.W_y", self.W_y
        yield "head.b_y", self.b_y

    def copy(self) -> "LstmWeights":
        return LstmWeights(
            [{k: v.copy() for k, v in layer.items()} for layer in self.layers],
            self.W_y.copy(), self.b_y.copy())

    def zeros_like(self) -> "LstmWeights":
        return LstmWeights(
            [{k: np.zeros_like(v) for k, v in layer.items()} for layer in self.layers],
            np.zeros_like(self.W_y), np.zeros_like(self.b_y))

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(arr)) for _, arr in self.named_params())

    def to_dict(self) -> dict:
        layers = []
        for layer in self.layers:
            doc = {}
            for gate in GATES:
                for kind in ("W", "U", "b"):
                    key = f"{kind}_{gate}"
                    arr = layer[key]
                    doc[key] = {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            layers.append(doc)
        return {
            "format_version": WEIGHTS_FORMAT_VERSION,
            "gate_order": list(GATES),
            "layers": layers,
            "W_y": {"shape": list(self.W_y.shape), "data": self.W_y.ravel().tolist()},
            "b_y": {"shape": [1], "data": self.b_y.tolist()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LstmWeights":
        if doc.get("format_version") != WEIGHTS_FORMAT_VERSION:
            raise ArgumentError(f"unsupported weights format {doc.get('format_version')!r}")

        def load(entry):
            return np.asarray(entry["data"], dtype=float).reshape(entry["shape"])

        layers = [{key: load(layer[key]) for key in layer} for layer in doc["layers"]]
        return cls(layers, load(doc["W_y"]), np.asarray(doc["b_y"]["data"], dtype=float))


@dataclass
class TrainingReport:
    train_losses: list[float] = field(default_factory=list)
    validation_losses: list[float] = field(default_factory=list)
    wall_clock_seconds: float = 0.0
    final_gradient_norm: float = 0.0

    def to_dict(self) -> dict:
        return {"train_losses": self.train_losses,
                "validation_losses": self.validation_losses,
                "wall_clock_seconds": self.wall_clock_seconds,
                "final_gradient_norm": self.final_gradient_norm}

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainingReport":
        return cls(train_losses=list(doc.get("train_losses", [])),
                   validation_losses=list(doc.get("validation_losses", [])),
                   wall_clock_seconds=float(doc.get("wall_clock_seconds", 0.0)),
                   final_gradient_norm=float(doc.get("final_gradient_norm", 0.0)))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_weights(config: LstmConfig) -> LstmWeights:
    """Seeded uniform(-k, k) with k = 1/sqrt(hidden_units); forget-gate bias
    starts at 1.0 to ease gradient flow."""
    rng = np.random.default_rng(config.seed)
    k = 1.0 / math.sqrt(config.hidden_units)
    layers = []
    for idx in range(config.layers):
        in_dim = 1 if idx == 0 else config.hidden_units
        layer = {}
        for gate in GATES:
            layer[f"W_{gate}"] = rng.uniform(-k, k, size=(config.hidden_units, in_dim))
            layer[f"U_{gate}"] = rng.uniform(-k, k, size=(config.hidden_units, config.hidden_units))
            layer[f"b_{gate}"] = rng.uniform(-k, k, size=config.hidden_units)
        layer["b_f"] = np.ones(config.hidden_units)
        layers.append(layer)
    W_y = rng.uniform(-k, k, size=config.hidden_units)
    b_y = np.zeros(1)
    return LstmWeights(layers, W_y, b_y)


def _forward_batch(weights: LstmWeights, X: np.ndarray,
                   masks: list[np.ndarray] | None = None):
    """Run the stacked cells over a (batch, window) input block.

    Returns (predictions, caches) where caches hold everything the backward
    pass needs. ``masks`` are inverted-dropout masks on the recurrent path,
    one (batch, hidden) array per layer.
    """
    B, window = X.shape
    n_layers = len(weights.layers)
    H = weights.layers[0]["U_i"].shape[0]
    h = [np.zeros((B, H)) for _ in range(n_layers)]
    c = [np.zeros((B, H)) for _ in range(n_layers)]
    caches = []
    for t in range(window):
        inp = X[:, t:t + 1]
        step_cache = []
        for l, lw in enumerate(weights.layers):
            h_prev = h[l]
            h_rec = h_prev * masks[l] if masks is not None else h_prev
            c_prev = c[l]
            gates = {}
            for gate in GATES:
                pre = inp @ lw[f"W_{gate}"].T + h_rec @ lw[f"U_{gate}"].T + lw[f"b_{gate}"]
                gates[gate] = np.tanh(pre) if gate == "g" else _sigmoid(pre)
            c_new = gates["f"] * c_prev + gates["i"] * gates["g"]
            tanh_c = np.tanh(c_new)
            h_new = gates["o"] * tanh_c
            step_cache.append({"x": inp, "h_rec": h_rec, "c_prev": c_prev,
                               "tanh_c": tanh_c, **gates})
            h[l], c[l] = h_new, c_new
            inp = h_new
        caches.append(step_cache)
    preds = h[-1] @ weights.W_y + weights.b_y[0]
    return preds, (caches, h)


def forward(weights: LstmWeights, window_values: np.ndarray) -> float:
    """Prediction for one input window (inference path, no dropout)."""
    x = np.asarray(window_values, dtype=float)
    if x.ndim != 1:
        raise ArgumentError("window_values must be one-dimensional")
    in_dim = weights.layers[0]["W_i"].shape[1]
    if in_dim != 1:
        raise ArgumentError(f"first layer expects scalar inputs, found input dim {in_dim}")
    preds, _ = _forward_batch(weights, x[None, :])
    return float(preds[0])


def predict_batch(weights: LstmWeights, windows: np.ndarray) -> np.ndarray:
    """Predictions for a (n, window) block of inputs (inference path)."""
    X = np.asarray(windows, dtype=float)
    if X.ndim != 2:
        raise ArgumentError("windows must be a 2-D array")
    preds, _ = _forward_batch(weights, X)
    return preds


def _loss_and_grads(weights: LstmWeights, X: np.ndarray, y: np.ndarray,
                    masks: list[np.ndarray] | None = None):
    """Mean squared error over the batch and its exact BPTT gradients."""
    B, window = X.shape
    preds, (caches, h_final) = _forward_batch(weights, X, masks)
    err = preds - y
    loss = float(err @ err) / B

    grads = weights.zeros_like()
    n_layers = len(weights.layers)
    H = weights.layers[0]["U_i"].shape[0]

    dpred = 2.0 * err / B
    grads.W_y += h_final[-1].T @ dpred
    grads.b_y += np.sum(dpred, keepdims=True)

    dh = [np.zeros((B, H)) for _ in range(n_layers)]
    dc = [np.zeros((B, H)) for _ in range(n_layers)]
    dh[-1] += dpred[:, None] * weights.W_y[None, :]

    for t in range(window - 1, -1, -1):
        dx_above = None
        for l in range(n_layers - 1, -1, -1):
            cache = caches[t][l]
            lw = weights.layers[l]
            glw = grads.layers[l]
            dh_l = dh[l] + (dx_above if dx_above is not None else 0.0)
            i, f, o, g = cache["i"], cache["f"], cache["o"], cache["g"]
            tanh_c = cache["tanh_c"]
            do = dh_l * tanh_c
            dc_l = dc[l] + dh_l * o * (1.0 - tanh_c ** 2)
            di = dc_l * g
            dg = dc_l * i
            df = dc_l * cache["c_prev"]
            dc[l] = dc_l * f
            pre = {"i": di * i * (1.0 - i), "f": df * f * (1.0 - f),
                   "o": do * o * (1.0 - o), "g": dg * (1.0 - g ** 2)}
            dh_rec = np.zeros((B, H))
            dx = np.zeros_like(cache["x"])
            for gate in GATES:
                da = pre[gate]
                glw[f"W_{gate}"] += da.T @ cache["x"]
                glw[f"U_{gate}"] += da.T @ cache["h_rec"]
                glw[f"b_{gate}"] += da.sum(axis=0)
                dh_rec += da @ lw[f"U_{gate}"]
                dx += da @ lw[f"W_{gate}"]
            if masks is not None:
                dh_rec = dh_rec * masks[l]
            dh[l] = dh_rec
            dx_above = dx
    return loss, grads


def gradient_norm(grads: LstmWeights) -> float:
    total = 0.0
    for _, arr in grads.named_params():
        total += float(np.sum(arr * arr))
    return math.sqrt(total)


def clip_gradients(grads: LstmWeights, clip_norm: float) -> float:
    """Global norm clipping in place; returns the pre-clip norm."""
    norm = gradient_norm(grads)
    if norm > clip_norm and norm > 0.0:
        scale = clip_norm / norm
        for _, arr in grads.named_params():
            arr *= scale
    return norm


def train(train_pairs: tuple[np.ndarray, np.ndarray],
          validation_pairs: tuple[np.ndarray, np.ndarray] | None,
          config: LstmConfig) -> tuple[LstmWeights, TrainingReport]:
    """Train on (windows, targets) pairs; inputs are expected normalized.

    Deterministic for a fixed config.seed: weight init, batch order, and
    dropout masks all come from the same seeded generator."""
    X = np.asarray(train_pairs[0], dtype=float)
    y = np.asarray(train_pairs[1], dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ArgumentError("training windows must be (n, window) with matching targets")
    if len(X) == 0:
        raise DataError("training set is empty")
    if X.shape[1] != config.window:
        raise ArgumentError(f"window length {X.shape[1]} does not match config window {config.window}")
    has_val = validation_pairs is not None and len(validation_pairs[0]) > 0
    if has_val:
        Xv = np.asarray(validation_pairs[0], dtype=float)
        yv = np.asarray(validation_pairs[1], dtype=float)

    started = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    weights = init_weights(config)
    adam_m = weights.zeros_like()
    adam_v = weights.zeros_like()
    adam_t = 0
    keep = 1.0 - config.dropout
    n = len(X)
    report = TrainingReport()
    final_norm = 0.0

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            Xb, yb = X[batch], y[batch]
            if config.dropout > 0.0:
                masks = [(rng.random((len(batch), config.hidden_units)) < keep) / keep
                         for _ in range(config.layers)]
            else:
                masks = None
            loss, grads = _loss_and_grads(weights, Xb, yb, masks)
            if not math.isfinite(loss):
                raise DivergenceError(f"non-finite training loss at epoch {epoch}", epoch=epoch)
            final_norm = clip_gradients(grads, config.clip_norm)
            adam_t += 1
            bias1 = 1.0 - ADAM_BETA1 ** adam_t
            bias2 = 1.0 - ADAM_BETA2 ** adam_t
            for (_, w), (_, g), (_, m), (_, v) in zip(
                    weights.named_params(), grads.named_params(),
                    adam_m.named_params(), adam_v.named_params()):
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * g
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * g * g
                w -= config.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + ADAM_EPS)
        # End-of-epoch loss over the full set in fixed order, so constant
        # weights report a constant loss regardless of batch shuffling.
        train_preds, _ = _forward_batch(weights, X)
        epoch_loss = float(np.mean((train_preds - y) ** 2))
        if not math.isfinite(epoch_loss) or not weights.all_finite():
            raise DivergenceError(f"training diverged at epoch {epoch}", epoch=epoch)
        report.train_losses.append(epoch_loss)
        if has_val:
            val_preds, _ = _forward_batch(weights, Xv)
            report.validation_losses.append(float(np.mean((val_preds - yv) ** 2)))

    report.wall_clock_seconds = time.perf_counter() - started
    report.final_gradient_norm = final_norm
    return weights, report


def gradient_check(weights: LstmWeights, pair: tuple[np.ndarray, float],
                   epsilon: float = 1e-5) -> float:
    """Maximum relative error between analytic BPTT gradients and central
    finite differences over every scalar parameter."""
    if not 1e-7 <= epsilon <= 1e-3:
        raise ArgumentError(f"epsilon must lie in [1e-7, 1e-3], got {epsilon}")
    x = np.asarray(pair[0], dtype=float)[None, :]
    y = np.asarray([pair[1]], dtype=float)
    _, grads = _loss_and_grads(weights, x, y)
    grad_map = dict(grads.named_params())

    def loss_at(w: LstmWeights) -> float:
        preds, _ = _forward_batch(w, x)
        return float(np.mean((preds - y) ** 2))

    worst = 0.0
    probe = weights.copy()
    for path, arr in probe.named_params():
        flat = arr.ravel()
        gflat = grad_map[path].ravel()
        for j in range(flat.size):
            original = flat[j]
            flat[j] = original + epsilon
            up = loss_at(probe)
            flat[j] = original - epsilon
            down = loss_at(probe)
            flat[j] = original
            numeric = (up - down) / (2.0 * epsilon)
            analytic = gflat[j]
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
            worst = max(worst, rel)
    return worst


def windows_from_values(values: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Sliding (window, next-value) pairs from a 1-D array."""
    values = np.asarray(values, dtype=float)
    if window < 1 or window >= len(values):
        raise ArgumentError(f"window {window} must lie in [1, {len(values) - 1}]")
    n_rows = len(values) - window
    X = np.empty((n_rows, window))
    for i in range(n_rows):
        X[i] = values[i:i + window]
    return X, values[window:].copy()


def forecast_lstm(weights: LstmWeights, config: LstmConfig, series_tail: np.ndarray,
                  horizon: int, denorm_record: TransformRecord | None = None,
                  origin_timestamp: int = 0, frequency: int = 1) -> Forecast:
    """Recursive multi-step forecast: predict, shift into the window, repeat.

    ``series_tail`` holds the last ``window`` normalized values; the output
    is denormalized through ``denorm_record`` when given. No prediction
    intervals are produced for this family."""
    tail = np.asarray(series_tail, dtype=float)
    if tail.shape != (config.window,):
        raise ArgumentError(f"series tail must hold exactly {config.window} values, got {tail.shape}")
    if horizon < 1:
        raise ArgumentError("horizon must be at least 1")
    buf = tail.copy()
    preds = np.empty(horizon)
    for h in range(horizon):
        nxt = forward(weights, buf)
        preds[h] = nxt
        buf = np.concatenate([buf[1:], [nxt]])
    points = invert_values(preds, denorm_record) if denorm_record is not None else preds
    ts = origin_timestamp + frequency * np.arange(1, horizon + 1, dtype=np.int64)
    return Forecast(origin_timestamp=origin_timestamp, frequency=frequency,
                    timestamps=ts, points=points, lower=None, upper=None,
                    confidence=None, intervals_available=False)
