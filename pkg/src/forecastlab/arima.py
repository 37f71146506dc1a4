"""ARIMA(p,d,q) and seasonal ARIMA estimation by conditional sum of squares.

The working series is the input after regular and seasonal differencing.
With ``phi``/``theta`` the regular AR/MA coefficients and ``Phi``/``Theta``
their seasonal counterparts, innovations follow

    eps[t] = w[t] - c - sum_i phi*_i w[t-i] - sum_k theta*_k eps[t-k]

where ``phi*``/``theta*`` are the expanded products of the regular and
seasonal polynomials. Values of ``w`` before the sample are taken as the
working-series mean and earlier innovations as zero, so the sum of squared
innovations runs over the whole working series. Minimization uses a
Nelder-Mead simplex seeded by a long-autoregression regression
(Hannan-Rissanen) plus random restarts, with a soft penalty keeping the
AR and MA polynomial roots outside the unit circle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ArgumentError, DataError, FitFailureError, SearchFailureError
from .forecast import Forecast
from .optim import nelder_mead_restarts
from .preprocess import TransformRecord, difference, undifference
from .series import Horizon, TimeSeries
from .stats import normal_quantile

ROOT_MODULUS_FLOOR = 1.001
ROOT_PENALTY = 1e6
CSS_FLOOR = 1e-300
FIT_SEED = 20240517
RESTARTS = 3
RESTART_SPREAD = 0.2
GRID_COMBINATION_CAP = 10_000
MIN_EFFECTIVE_MARGIN = 10


@dataclass(frozen=True)
class ArimaOrder:
    """Non-seasonal order (p, d, q). The all-zero order is the
    intercept-only model."""

    p: int
    d: int
    q: int

    def __post_init__(self):
        for name in ("p", "d", "q"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ArgumentError(f"order component {name} must be a nonnegative integer, got {v!r}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.p, self.d, self.q)


@dataclass(frozen=True)
class SeasonalOrder:
    """Seasonal order (P, D, Q) at period s."""

    P: int
    D: int
    Q: int
    s: int

    def __post_init__(self):
        for name in ("P", "D", "Q"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ArgumentError(f"seasonal component {name} must be a nonnegative integer, got {v!r}")
        if (self.P or self.D or self.Q) and self.s < 2:
            raise ArgumentError(f"seasonal period must be >= 2, got {self.s}")

    @property
    def active(self) -> bool:
        return bool(self.P or self.D or self.Q)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.P, self.D, self.Q, self.s)


NO_SEASONALITY = SeasonalOrder(0, 0, 0, 0)


@dataclass
class ArimaParams:
    phi: np.ndarray
    theta: np.ndarray
    Phi: np.ndarray
    Theta: np.ndarray
    intercept: float
    sigma2: float

    def __post_init__(self):
        for name in ("phi", "theta", "Phi", "Theta"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.sigma2 <= 0:
            raise ArgumentError(f"innovation variance must be positive, got {self.sigma2}")


@dataclass
class FittedArima:
    order: ArimaOrder
    seasonal_order: SeasonalOrder
    params: ArimaParams
    transform_records: list[TransformRecord]
    css: float
    aic: float
    n_effective: int
    residuals: np.ndarray
    working: TimeSeries
    include_intercept: bool

    @property
    def n_params(self) -> int:
        return (self.order.p + self.order.q + self.seasonal_order.P
                + self.seasonal_order.Q + (1 if self.include_intercept else 0))

    def to_dict(self) -> dict:
        return {
            "order": list(self.order.as_tuple()),
            "seasonal_order": list(self.seasonal_order.as_tuple()),
            "intercept": float(self.params.intercept),
            "phi": [float(v) for v in self.params.phi],
            "theta": [float(v) for v in self.params.theta],
            "seasonal_phi": [float(v) for v in self.params.Phi],
            "seasonal_theta": [float(v) for v in self.params.Theta],
            "sigma2": float(self.params.sigma2),
            "css": float(self.css),
            "aic": float(self.aic),
            "n_effective": self.n_effective,
            "include_intercept": self.include_intercept,
            "transform_records": [r.to_dict() for r in self.transform_records],
            "residuals": [float(v) for v in self.residuals],
            "working": {
                "timestamps": [int(t) for t in self.working.timestamps],
                "values": [float(v) for v in self.working.values],
                "frequency": self.working.frequency,
                "name": self.working.name,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FittedArima":
        order = ArimaOrder(*(int(v) for v in doc["order"]))
        seasonal = SeasonalOrder(*(int(v) for v in doc["seasonal_order"]))
        params = ArimaParams(
            phi=np.asarray(doc["phi"], dtype=float),
            theta=np.asarray(doc["theta"], dtype=float),
            Phi=np.asarray(doc["seasonal_phi"], dtype=float),
            Theta=np.asarray(doc["seasonal_theta"], dtype=float),
            intercept=float(doc["intercept"]),
            sigma2=float(doc["sigma2"]),
        )
        w = doc["working"]
        working = TimeSeries(np.asarray(w["timestamps"], dtype=np.int64),
                             np.asarray(w["values"], dtype=float),
                             int(w["frequency"]), w.get("name", "value"))
        return cls(
            order=order, seasonal_order=seasonal, params=params,
            transform_records=[TransformRecord.from_dict(r) for r in doc["transform_records"]],
            css=float(doc["css"]), aic=float(doc["aic"]),
            n_effective=int(doc["n_effective"]),
            residuals=np.asarray(doc["residuals"], dtype=float),
            working=working, include_intercept=bool(doc["include_intercept"]),
        )


# ---------------------------------------------------------------------------
# Polynomial helpers


def _seasonal_poly(coeffs: np.ndarray, s: int, sign: float) -> np.ndarray:
    """Polynomial 1 + sign*c1*B^s + sign*c2*B^2s + ... as a dense coefficient
    vector in ascending powers of B."""
    out = np.zeros(len(coeffs) * s + 1)
    out[0] = 1.0
    for j, cj in enumerate(coeffs, start=1):
        out[j * s] = sign * cj
    return out


def _expand_ar(phi: np.ndarray, Phi: np.ndarray, s: int) -> np.ndarray:
    regular = np.concatenate([[1.0], -np.asarray(phi, dtype=float)])
    if len(Phi):
        return np.convolve(regular, _seasonal_poly(np.asarray(Phi, float), s, -1.0))
    return regular


def _expand_ma(theta: np.ndarray, Theta: np.ndarray, s: int) -> np.ndarray:
    regular = np.concatenate([[1.0], np.asarray(theta, dtype=float)])
    if len(Theta):
        return np.convolve(regular, _seasonal_poly(np.asarray(Theta, float), s, 1.0))
    return regular


def _root_violation(poly) -> float:
    """Amount by which roots of 1 + c1*B + ... + cd*B^d (ascending
    coefficients) fall inside the modulus floor; zero when all roots are
    safely outside. Closed forms for degrees 1-2."""
    cs = [float(c) for c in poly[1:]]
    while cs and cs[-1] == 0.0:
        cs.pop()
    degree = len(cs)
    if degree == 0:
        return 0.0
    if not all(math.isfinite(c) for c in cs):
        return math.inf
    if degree == 1:
        moduli = [1.0 / abs(cs[0])]
    elif degree == 2:
        c1, c2 = cs
        disc = c1 * c1 - 4.0 * c2
        if disc >= 0.0:
            sq = math.sqrt(disc)
            moduli = [abs((-c1 + sq) / (2.0 * c2)), abs((-c1 - sq) / (2.0 * c2))]
        else:
            # Complex pair: |root|^2 equals the product of the roots, 1/c2.
            moduli = [math.sqrt(1.0 / c2)] * 2
    else:
        moduli = np.abs(np.roots([1.0, *cs][::-1])).tolist()
    return float(sum(max(0.0, ROOT_MODULUS_FLOOR - m) for m in moduli))


def psi_weights(fitted: "FittedArima", count: int) -> np.ndarray:
    """Leading MA-infinity weights of the full model including differencing."""
    order, seasonal = fitted.order, fitted.seasonal_order
    a = _expand_ar(fitted.params.phi, fitted.params.Phi, seasonal.s or 1)
    for _ in range(order.d):
        a = np.convolve(a, [1.0, -1.0])
    for _ in range(seasonal.D):
        a = np.convolve(a, _seasonal_poly(np.ones(1), seasonal.s, -1.0))
    b = _expand_ma(fitted.params.theta, fitted.params.Theta, seasonal.s or 1)
    psi = np.zeros(count)
    psi[0] = 1.0
    for j in range(1, count):
        acc = b[j] if j < len(b) else 0.0
        for i in range(1, min(j, len(a) - 1) + 1):
            acc -= a[i] * psi[j - i]
        psi[j] = acc
    return psi


# ---------------------------------------------------------------------------
# Objective


def _css_residuals(w: np.ndarray, c: float, ar_poly: np.ndarray, ma_poly: np.ndarray) -> np.ndarray:
    """Innovations of the working series under the stated pre-sample
    convention (w padded with its mean, eps with zeros)."""
    r = len(ar_poly) - 1
    padded = np.concatenate([np.full(r, w.mean()), w]) if r else w
    z = np.convolve(padded, ar_poly, mode="valid") - c
    if len(ma_poly) > 1:
        return lfilter([1.0], ma_poly, z)
    return z


def _unpack(vector: np.ndarray, order: ArimaOrder, seasonal: SeasonalOrder,
            include_intercept: bool) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    pos = 0
    c = 0.0
    if include_intercept:
        c = float(vector[pos])
        pos += 1
    phi = vector[pos:pos + order.p]; pos += order.p
    Phi = vector[pos:pos + seasonal.P]; pos += seasonal.P
    theta = vector[pos:pos + order.q]; pos += order.q
    Theta = vector[pos:pos + seasonal.Q]
    return c, phi, Phi, theta, Theta


def _objective_factory(w: np.ndarray, order: ArimaOrder, seasonal: SeasonalOrder,
                       include_intercept: bool):
    s = seasonal.s or 1
    r = order.p + seasonal.P * s
    padded = np.concatenate([np.full(r, w.mean()), w]) if r else w

    def objective(vector: np.ndarray) -> float:
        c, phi, Phi, theta, Theta = _unpack(vector, order, seasonal, include_intercept)
        violation = 0.0
        for coefs, sign in ((phi, -1.0), (Phi, -1.0), (theta, 1.0), (Theta, 1.0)):
            if len(coefs):
                violation += _root_violation([1.0, *(sign * coefs)])
        if not math.isfinite(violation):
            return math.inf
        a = _expand_ar(phi, Phi, s)
        z = np.convolve(padded, a, mode="valid") - c
        if order.q or seasonal.Q:
            eps = lfilter([1.0], _expand_ma(theta, Theta, s), z)
        else:
            eps = z
        css = float(eps @ eps)
        if not math.isfinite(css):
            return math.inf
        return css + ROOT_PENALTY * violation

    return objective


# ---------------------------------------------------------------------------
# Initialization


def _hannan_rissanen_start(w: np.ndarray, order: ArimaOrder, seasonal: SeasonalOrder,
                           include_intercept: bool) -> np.ndarray:
    n = len(w)
    k = order.p + order.q + seasonal.P + seasonal.Q
    start = np.zeros(k + (1 if include_intercept else 0))
    if include_intercept:
        start[0] = float(np.mean(w))
    if k == 0:
        return start
    s = seasonal.s or 1
    wc = w - np.mean(w)
    long_order = min(max(10, 2 * (order.p + order.q + (seasonal.P + seasonal.Q) * s)), n // 2)
    if long_order < 1 or n - long_order < long_order + 2:
        return start
    rows = np.arange(long_order, n)
    design = np.column_stack([wc[rows - i] for i in range(1, long_order + 1)])
    coef, *_ = np.linalg.lstsq(design, wc[rows], rcond=None)
    eps_hat = np.full(n, np.nan)
    eps_hat[rows] = wc[rows] - design @ coef

    w_lags = list(range(1, order.p + 1)) + [j * s for j in range(1, seasonal.P + 1)]
    e_lags = list(range(1, order.q + 1)) + [j * s for j in range(1, seasonal.Q + 1)]
    t0 = max([long_order + max(e_lags, default=0)] + w_lags)
    if n - t0 < len(w_lags) + len(e_lags) + 2:
        return start
    rows2 = np.arange(t0, n)
    cols = []
    if include_intercept:
        cols.append(np.ones(len(rows2)))
    cols.extend(w[rows2 - lag] for lag in w_lags)
    cols.extend(eps_hat[rows2 - lag] for lag in e_lags)
    X = np.column_stack(cols)
    try:
        beta, *_ = np.linalg.lstsq(X, w[rows2], rcond=None)
    except np.linalg.LinAlgError:
        return start
    if not np.all(np.isfinite(beta)):
        return start
    offset = 1 if include_intercept else 0
    if include_intercept:
        start[0] = beta[0]
    start[offset:] = np.clip(beta[offset:], -0.95, 0.95)
    return start


# ---------------------------------------------------------------------------
# Fitting


def fit_arima(series: TimeSeries, order: ArimaOrder,
              seasonal: SeasonalOrder | None = None,
              include_intercept: bool | None = None,
              seed: int = FIT_SEED) -> FittedArima:
    """Estimate an ARIMA model on ``series`` by conditional sum of squares."""
    seasonal = seasonal or NO_SEASONALITY
    if seasonal.D and seasonal.s < 2:
        raise ArgumentError("seasonal differencing requires a period >= 2")
    if series.has_missing:
        raise DataError("series contains missing values; impute before fitting")
    if include_intercept is None:
        include_intercept = (order.d + seasonal.D) == 0

    total_diff = order.d + seasonal.D * seasonal.s
    min_len = MIN_EFFECTIVE_MARGIN + order.p + order.q + seasonal.P + seasonal.Q
    if len(series) - total_diff < min_len:
        raise DataError(
            f"series of length {len(series)} too short for order {order.as_tuple()}"
            f"{seasonal.as_tuple() if seasonal.active else ''}: need at least "
            f"{min_len + total_diff} points"
        )

    working = series
    records: list[TransformRecord] = []
    for _ in range(seasonal.D):
        working, record = difference(working, seasonal.s)
        records.append(record)
    for _ in range(order.d):
        working, record = difference(working, 1)
        records.append(record)

    w = working.values
    n = len(w)
    objective = _objective_factory(w, order, seasonal, include_intercept)
    start = _hannan_rissanen_start(w, order, seasonal, include_intercept)

    if len(start):
        result = nelder_mead_restarts(objective, start, restarts=RESTARTS,
                                      spread=RESTART_SPREAD, seed=seed)
        if not math.isfinite(result.fun):
            raise FitFailureError(
                f"optimizer found no finite objective for order {order.as_tuple()}")
        vector = result.x
    else:
        vector = start

    c, phi, Phi, theta, Theta = _unpack(vector, order, seasonal, include_intercept)
    s = seasonal.s or 1
    eps = _css_residuals(w, c, _expand_ar(phi, Phi, s), _expand_ma(theta, Theta, s))
    css = float(eps @ eps)
    if not math.isfinite(css):
        raise FitFailureError(f"non-finite sum of squares for order {order.as_tuple()}")
    sigma2 = max(css / n, CSS_FLOOR)
    k = len(vector)
    aic = n * math.log(max(css, CSS_FLOOR) / n) + 2.0 * (k + 1)

    params = ArimaParams(phi=phi.copy(), theta=theta.copy(), Phi=Phi.copy(),
                         Theta=Theta.copy(), intercept=c, sigma2=sigma2)
    return FittedArima(order=order, seasonal_order=seasonal, params=params,
                       transform_records=records, css=css, aic=aic, n_effective=n,
                       residuals=eps, working=working, include_intercept=include_intercept)


def _extend_working(fitted: FittedArima, horizon: int) -> np.ndarray:
    """Point forecasts of the working (differenced) series."""
    params = fitted.params
    s = fitted.seasonal_order.s or 1
    a = _expand_ar(params.phi, params.Phi, s)
    b = _expand_ma(params.theta, params.Theta, s)
    w = fitted.working.values
    n = len(w)
    wbar = float(np.mean(w)) if n else 0.0
    hist_w = list(w)
    hist_e = list(fitted.residuals) + [0.0] * horizon
    out = []
    for h in range(horizon):
        t = n + h
        acc = params.intercept
        for i in range(1, len(a)):
            idx = t - i
            acc -= a[i] * (hist_w[idx] if idx >= 0 else wbar)
        for k in range(1, len(b)):
            idx = t - k
            acc += b[k] * (hist_e[idx] if idx >= 0 else 0.0)
        hist_w.append(acc)
        out.append(acc)
    return np.asarray(out)


def forecast_arima(fitted: FittedArima, horizon: Horizon | int,
                   confidence: float = 0.95) -> Forecast:
    """Forecast in original units with Gaussian intervals from the
    MA-infinity weights."""
    steps = horizon.steps if isinstance(horizon, Horizon) else int(horizon)
    if steps < 1:
        raise ArgumentError("horizon must be at least 1")
    if not 0.0 < confidence < 1.0:
        raise ArgumentError(f"confidence must lie in (0, 1), got {confidence}")

    w_fc = _extend_working(fitted, steps)
    freq = fitted.working.frequency
    last_ts = int(fitted.working.timestamps[-1])
    fc_ts = last_ts + freq * np.arange(1, steps + 1, dtype=np.int64)

    extended = TimeSeries(
        np.concatenate([fitted.working.timestamps, fc_ts]),
        np.concatenate([fitted.working.values, w_fc]),
        freq, fitted.working.name)
    for record in reversed(fitted.transform_records):
        extended = undifference(extended, record)
    points = extended.values[-steps:]
    origin = int(extended.timestamps[-steps - 1])

    psi = psi_weights(fitted, steps)
    z = normal_quantile((1.0 + confidence) / 2.0)
    sigma = math.sqrt(fitted.params.sigma2)
    half = z * sigma * np.sqrt(np.cumsum(psi ** 2))
    return Forecast(origin_timestamp=origin, frequency=freq, timestamps=fc_ts,
                    points=points, lower=points - half, upper=points + half,
                    confidence=confidence)


def one_step_predictions(fitted: FittedArima) -> np.ndarray:
    """In-sample one-step predictions on the original scale, aligned to the
    original series; positions consumed by differencing are NaN."""
    w_pred = fitted.working.values - fitted.residuals
    pred = w_pred
    # Rebuild each differencing stage's input so predictions can be mapped
    # back using actual past values.
    stage_series = [fitted.working]
    for record in reversed(fitted.transform_records):
        stage_series.append(undifference(stage_series[-1], record))
    stage_series.reverse()  # now original first, working last
    for idx in range(len(fitted.transform_records) - 1, -1, -1):
        record = fitted.transform_records[idx]
        lag = int(record.params["lag"])
        stage_input = stage_series[idx]
        grid_offset = len(stage_input) - len(stage_series[-1])  # leading values without predictions
        z = stage_input.values
        mapped = np.empty(len(pred))
        for t in range(len(pred)):
            mapped[t] = pred[t] + z[grid_offset + t - lag]
        pred = mapped
    out = np.full(len(stage_series[0]), np.nan)
    out[len(stage_series[0]) - len(pred):] = pred
    return out


# ---------------------------------------------------------------------------
# Grid search


@dataclass
class GridSearchEntry:
    order: ArimaOrder
    seasonal_order: SeasonalOrder
    score: float
    error: str | None = None

    def key(self) -> tuple:
        return (self.order.p, self.order.d, self.order.q,
                self.seasonal_order.P, self.seasonal_order.D, self.seasonal_order.Q)


def grid_search_arima(train: TimeSeries, validation: TimeSeries | None,
                      p_max: int, d_max: int, q_max: int,
                      seasonal_ranges: tuple[int, int, int] | None = None,
                      s: int | None = None,
                      criterion: str = "aic",
                      seed: int = FIT_SEED) -> list[GridSearchEntry]:
    """Try every order combination, ranked ascending by the chosen criterion.

    Failed fits are kept with an infinite score. Ties break lexicographically
    on (p, d, q, P, D, Q).
    """
    if criterion not in ("aic", "validation_mae"):
        raise ArgumentError(f"unknown criterion {criterion!r}")
    if criterion == "validation_mae" and (validation is None or len(validation) < 1):
        raise ArgumentError("validation_mae criterion requires a nonempty validation series")
    if min(p_max, d_max, q_max) < 0:
        raise ArgumentError("order ranges must be nonnegative")
    if seasonal_ranges is not None:
        if s is None or s < 2:
            raise ArgumentError("seasonal ranges require a period s >= 2")
        if min(seasonal_ranges) < 0:
            raise ArgumentError("seasonal ranges must be nonnegative")
        P_max, D_max, Q_max = seasonal_ranges
    else:
        P_max = D_max = Q_max = 0

    total = (p_max + 1) * (d_max + 1) * (q_max + 1) * (P_max + 1) * (D_max + 1) * (Q_max + 1)
    if total > GRID_COMBINATION_CAP:
        raise ArgumentError(
            f"{total} combinations exceed the {GRID_COMBINATION_CAP} cap; narrow the ranges")

    entries: list[GridSearchEntry] = []
    for p, d, q, P, D, Q in itertools.product(range(p_max + 1), range(d_max + 1),
                                              range(q_max + 1), range(P_max + 1),
                                              range(D_max + 1), range(Q_max + 1)):
        order = ArimaOrder(p, d, q)
        seasonal = SeasonalOrder(P, D, Q, s or 0) if (P or D or Q) else NO_SEASONALITY
        try:
            fitted = fit_arima(train, order, seasonal, seed=seed)
            if criterion == "aic":
                score = fitted.aic
            else:
                fc = forecast_arima(fitted, len(validation))
                score = float(np.mean(np.abs(validation.values - fc.points)))
            if not math.isfinite(score):
                entry = GridSearchEntry(order, seasonal, math.inf, "non-finite score")
            else:
                entry = GridSearchEntry(order, seasonal, score)
        except Exception as exc:  # noqa: BLE001 - per-combination failures are data
            entry = GridSearchEntry(order, seasonal, math.inf, f"{type(exc).__name__}: {exc}")
        entries.append(entry)

    entries.sort(key=lambda e: (e.score, e.key()))
    if all(not math.isfinite(e.score) for e in entries):
        causes = {str(e.key()): e.error or "unknown" for e in entries}
        raise SearchFailureError("every order combination failed to fit", causes)
    return entries
