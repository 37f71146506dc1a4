"""Command-line driver: synthetic data, fits, forecasts, comparisons, and
the HTTP service.

Exit codes: 0 success, 1 operational failure (fit/data errors), 2 usage
errors (unknown flags, malformed values). Structured output is JSON with
volatile timing fields stripped, so identical inputs and seeds produce
byte-identical bytes.
"""

from __future__ import annotations

import csv as csv_module
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import synth
from .errors import ForecastLabError
from .ets import EtsSpec
from .evaluate import compare_models, leaderboard_table
from .forecast import Forecast
from .lstm import LstmConfig
from .modelspec import FittedModel, ModelSpec, fit_model
from .series import format_timestamp, ingest_csv

VOLATILE_KEYS = {"fit_seconds", "wall_clock_seconds"}


def _strip_volatile(doc):
    if isinstance(doc, dict):
        return {k: _strip_volatile(v) for k, v in doc.items() if k not in VOLATILE_KEYS}
    if isinstance(doc, list):
        return [_strip_volatile(v) for v in doc]
    return doc


def _dump(doc) -> str:
    return json.dumps(_strip_volatile(doc), indent=2, sort_keys=True)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _read_series(path: Path, timestamp_column: str, value_column: str):
    return ingest_csv(path.read_bytes(), timestamp_column, value_column)


def _parse_order(text: str, parts: int, flag: str) -> tuple[int, ...]:
    pieces = text.split(",")
    if len(pieces) != parts:
        raise click.BadParameter(f"expected {parts} comma-separated integers", param_hint=flag)
    try:
        return tuple(int(p) for p in pieces)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint=flag)


@click.group()
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="JSON file of flag defaults, keyed by subcommand")
@click.pass_context
def main(ctx: click.Context, config_path: Path | None):
    """Hybrid time-series forecasting toolkit."""
    if config_path is not None:
        try:
            defaults = json.loads(config_path.read_text())
        except json.JSONDecodeError as exc:
            raise click.BadParameter(f"config is not valid JSON: {exc}", param_hint="--config")
        if not isinstance(defaults, dict):
            raise click.BadParameter("config must be a JSON object", param_hint="--config")
        ctx.default_map = defaults


@main.command("synth")
@click.option("--kind", type=click.Choice(["seasonal", "traffic"]), default="seasonal")
@click.option("--n", type=int, default=240, show_default=True)
@click.option("--period", type=int, default=12, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def cmd_synth(kind: str, n: int, period: int, seed: int, out: Path):
    """Write a seeded synthetic series as canonical CSV."""
    try:
        if kind == "seasonal":
            series = synth.seasonal_series(n, period, seed)
        else:
            series, spikes = synth.traffic_series(n, seed, period=period)
            click.echo(f"injected spike indices: {spikes}", err=True)
        out.write_text(series.to_csv())
        click.echo(f"wrote {len(series)} rows to {out}")
    except ForecastLabError as exc:
        _fail(str(exc))


def _spec_from_flags(family, order, seasonal, trend, seasonal_mode, period,
                     layers, hidden_units, window, dropout, learning_rate,
                     epochs, batch_size, clip_norm, seed, transform) -> ModelSpec:
    transforms = tuple(transform)
    if family in ("arima", "sarima"):
        if order is None:
            raise click.BadParameter("--order is required for arima/sarima", param_hint="--order")
        order_t = _parse_order(order, 3, "--order")
        seasonal_t = None
        if family == "sarima":
            if seasonal is None:
                raise click.BadParameter("--seasonal is required for sarima", param_hint="--seasonal")
            seasonal_t = _parse_order(seasonal, 4, "--seasonal")
        return ModelSpec(family=family, order=order_t, seasonal_order=seasonal_t,
                         transforms=transforms)
    if family == "ets":
        return ModelSpec(family="ets",
                         ets_spec=EtsSpec(trend=trend, seasonal=seasonal_mode, period=period),
                         transforms=transforms)
    if window is None:
        window = 2 * period if period >= 2 else 10
    config = LstmConfig(layers=layers, hidden_units=hidden_units, window=window,
                        dropout=dropout, learning_rate=learning_rate, epochs=epochs,
                        batch_size=batch_size, seed=seed, clip_norm=clip_norm)
    return ModelSpec(family="lstm", lstm_config=config, transforms=transforms)


@main.command("fit")
@click.option("--family", type=click.Choice(["arima", "sarima", "ets", "lstm"]), required=True)
@click.option("--in", "input_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--out", "model_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--timestamp-column", default="timestamp", show_default=True)
@click.option("--value-column", default="value", show_default=True)
@click.option("--order", help="p,d,q for arima/sarima")
@click.option("--seasonal", help="P,D,Q,s for sarima")
@click.option("--trend", type=click.Choice(["none", "additive"]), default="none")
@click.option("--seasonal-mode", type=click.Choice(["none", "additive", "multiplicative"]),
              default="none")
@click.option("--period", type=int, default=0)
@click.option("--layers", type=int, default=1)
@click.option("--hidden-units", type=int, default=16)
@click.option("--window", type=int, default=None,
              help="input window length; defaults to 2*period when a period is given, else 10")
@click.option("--dropout", type=float, default=0.0)
@click.option("--learning-rate", type=float, default=0.01)
@click.option("--epochs", type=int, default=100)
@click.option("--batch-size", type=int, default=32)
@click.option("--clip-norm", type=float, default=5.0)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--transform", multiple=True,
              type=click.Choice(["log", "normalize_minmax", "normalize_zscore"]))
@click.option("--format", "fmt", type=click.Choice(["table", "structured"]), default="table")
def cmd_fit(family, input_path, model_path, timestamp_column, value_column, order,
            seasonal, trend, seasonal_mode, period, layers, hidden_units, window,
            dropout, learning_rate, epochs, batch_size, clip_norm, seed, transform, fmt):
    """Fit one model and write it to a model file."""
    spec = _spec_from_flags(family, order, seasonal, trend, seasonal_mode, period,
                            layers, hidden_units, window, dropout, learning_rate,
                            epochs, batch_size, clip_norm, seed, transform)
    try:
        series = _read_series(input_path, timestamp_column, value_column)
        fitted = fit_model(series, spec)
        model_path.write_text(_dump(fitted.to_dict()))
        summary = {"family": family, "model": spec.label(), "digest": spec.digest(),
                   "n_train": len(series), "diagnostics": fitted.diagnostics(),
                   "model_file": str(model_path)}
        if fmt == "structured":
            click.echo(_dump(summary))
        else:
            click.echo(f"fitted {spec.label()} on {len(series)} points -> {model_path}")
            for key, value in summary["diagnostics"].items():
                if isinstance(value, (int, float)) and value is not None:
                    click.echo(f"  {key}: {value:.6g}")
    except ForecastLabError as exc:
        _fail(str(exc))


@main.command("forecast")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--horizon", type=int, default=12, show_default=True)
@click.option("--confidence", type=float, default=0.95, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "table", "structured"]), default="csv")
def cmd_forecast(model_path, horizon, confidence, fmt):
    """Forecast from a stored model file."""
    try:
        doc = json.loads(model_path.read_text())
        fitted = FittedModel.from_dict(doc)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        _fail(f"corrupt model file {model_path}: {exc}")
        return
    try:
        fc = fitted.forecast(horizon, confidence)
    except ForecastLabError as exc:
        _fail(str(exc))
        return
    if fmt == "structured":
        click.echo(_dump(fc.to_dict()))
        return
    rows = []
    for i in range(len(fc.points)):
        rows.append([
            format_timestamp(int(fc.timestamps[i])),
            repr(float(fc.points[i])),
            repr(float(fc.lower[i])) if fc.lower is not None else "",
            repr(float(fc.upper[i])) if fc.upper is not None else "",
        ])
    if fmt == "csv":
        out = io.StringIO()
        writer = csv_module.writer(out, lineterminator="\n")
        writer.writerow(["timestamp", "point", "lower", "upper"])
        writer.writerows(rows)
        click.echo(out.getvalue(), nl=False)
    else:
        click.echo(f"{'timestamp':<22}{'point':>16}{'lower':>16}{'upper':>16}")
        for row in rows:
            point, lower, upper = (f"{float(v):.4f}" if v else "" for v in row[1:])
            click.echo(f"{row[0]:<22}{point:>16}{lower:>16}{upper:>16}")


@main.command("compare")
@click.option("--in", "input_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--specs", "specs_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--timestamp-column", default="timestamp", show_default=True)
@click.option("--value-column", default="value", show_default=True)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--horizon", type=int, default=12, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "structured"]), default="table")
def cmd_compare(input_path, specs_path, timestamp_column, value_column, folds, horizon, fmt):
    """Cross-validate several specs on one series and rank them."""
    try:
        doc = json.loads(specs_path.read_text())
    except json.JSONDecodeError as exc:
        raise click.BadParameter(f"specs file is not valid JSON: {exc}", param_hint="--specs")
    spec_docs = doc["specs"] if isinstance(doc, dict) and "specs" in doc else doc
    if not isinstance(spec_docs, list) or not spec_docs:
        raise click.BadParameter("specs file must hold a nonempty list", param_hint="--specs")
    try:
        series = _read_series(input_path, timestamp_column, value_column)
        specs = [ModelSpec.from_dict(d) for d in spec_docs]
        reports = compare_models(series, specs, folds=folds, horizon=horizon)
    except ForecastLabError as exc:
        _fail(str(exc))
        return
    if fmt == "structured":
        click.echo(_dump({"leaderboard": [r.to_dict() for r in reports],
                          "cv": {"folds": folds, "horizon": horizon}}))
    else:
        click.echo(leaderboard_table(reports))


@main.command("serve")
@click.option("--port", type=int, default=8300, show_default=True,
              envvar="FORECASTLAB_PORT")
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="FORECASTLAB_HOST")
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path),
              default=Path("./forecastlab-data"), show_default=True,
              envvar="FORECASTLAB_DATA_DIR")
@click.option("--workers", type=int, default=2, show_default=True,
              envvar="FORECASTLAB_WORKERS")
def cmd_serve(port, host, data_dir, workers):
    """Run the HTTP service until interrupted."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir, workers=workers)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        _fail(f"cannot bind {host}:{port}: {exc}")
    except SystemExit as exc:
        # uvicorn signals startup failure (busy port) with its own code
        if exc.code not in (0, None):
            _fail(f"service failed to start on {host}:{port}")


if __name__ == "__main__":
    main()
