"""Hybrid time-series forecasting toolkit.

Fits ARIMA/SARIMA, exponential smoothing, and LSTM models to univariate
series, compares them under uniform metrics and rolling-origin
cross-validation, detects residual anomalies, and serves everything over an
HTTP API and a CLI.
"""

__version__ = "0.1.0"

API_VERSION = "1"
