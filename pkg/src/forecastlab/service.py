"""HTTP facade: dataset upload, preprocessing pipelines, asynchronous model
fits, forecasting, comparison, and anomaly endpoints.

Single-analyst tool: no authentication (put a reverse proxy in front when
exposure matters). Every response carries a top-level ``api_version``
field; errors carry a machine-readable ``code`` plus a human message.
"""

from __future__ import annotations

import math
import os
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse

from . import API_VERSION
from .errors import (ArgumentError, ComparisonError, ConflictError, ForecastLabError,
                     IngestError, NotFoundError)
from .evaluate import compare_models, detect_anomalies
from .modelspec import ModelSpec
from .preprocess import apply_pipeline, invert_forecast_path
from .series import ingest_csv
from .store import JobRunner, Store

DEFAULT_MAX_UPLOAD = 10 * 1024 * 1024
DEFAULT_WORKERS = 2

_STATUS_BY_CODE = {
    "ingest_error": 400,
    "irregular_series": 400,
    "not_found": 404,
    "conflict": 409,
    "comparison_error": 500,
}


def _envelope(payload: dict, status_code: int = 200) -> JSONResponse:
    return JSONResponse({"api_version": API_VERSION, **payload}, status_code=status_code)


def _error_response(code: str, message: str, status_code: int) -> JSONResponse:
    return JSONResponse(
        {"api_version": API_VERSION, "error": {"code": code, "message": message}},
        status_code=status_code)


def create_app(data_dir: str | Path | None = None, *, workers: int = DEFAULT_WORKERS,
               max_upload_bytes: int | None = None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get("FORECASTLAB_DATA_DIR", "./forecastlab-data"))
    max_upload = max_upload_bytes or int(os.environ.get("FORECASTLAB_MAX_UPLOAD",
                                                        DEFAULT_MAX_UPLOAD))
    store = Store(data_dir)
    runner = JobRunner(store, workers=workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        runner.start()
        yield
        runner.stop()

    app = FastAPI(title="forecastlab", lifespan=lifespan)
    app.state.store = store
    app.state.runner = runner

    @app.exception_handler(ForecastLabError)
    async def handle_domain_error(_request: Request, exc: ForecastLabError):
        status = _STATUS_BY_CODE.get(exc.code, 422)
        return _error_response(exc.code, str(exc), status)

    @app.get("/health")
    async def health():
        return _envelope({"status": "ok"})

    # -- datasets --

    @app.post("/datasets")
    async def upload_dataset(file: UploadFile = File(...),
                             name: str = Form(None),
                             timestamp_column: str = Form("timestamp"),
                             value_column: str = Form("value")):
        raw = await file.read()
        if len(raw) > max_upload:
            return _error_response("too_large",
                                   f"upload of {len(raw)} bytes exceeds the "
                                   f"{max_upload} byte cap", 413)
        series = ingest_csv(raw, timestamp_column, value_column,
                            name=name or file.filename or value_column)
        record, created = store.save_dataset(series, series.name)
        return _envelope({"dataset": record.to_dict()}, 201 if created else 200)

    @app.get("/datasets")
    async def list_datasets():
        return _envelope({"datasets": [r.to_dict() for r in store.list_datasets()]})

    @app.get("/datasets/{dataset_id}")
    async def get_dataset(dataset_id: str):
        return _envelope({"dataset": store.get_dataset(dataset_id).to_dict()})

    @app.get("/datasets/{dataset_id}/data")
    async def get_dataset_data(dataset_id: str):
        series = store.load_series(dataset_id)
        values = [None if math.isnan(v) else float(v) for v in series.values]
        return _envelope({"dataset_id": dataset_id,
                          "frequency": series.frequency,
                          "timestamps": [int(t) for t in series.timestamps],
                          "values": values})

    @app.post("/datasets/{dataset_id}/preprocess")
    async def preprocess_dataset(dataset_id: str, body: dict):
        steps = body.get("steps")
        if not isinstance(steps, list) or not steps:
            raise ArgumentError("body must carry a nonempty 'steps' list")
        source = store.get_dataset(dataset_id)
        series = store.load_series(dataset_id)
        derived, records = apply_pipeline(series, steps)
        record, _ = store.save_dataset(derived, f"{source.name}:derived",
                                       pipeline=records, source_id=dataset_id)
        return _envelope({"dataset": record.to_dict()}, 201)

    # -- model fits --

    @app.post("/models")
    async def submit_fit(body: dict):
        dataset_id = body.get("dataset_id")
        if not dataset_id:
            raise ArgumentError("body must carry a dataset_id")
        store.get_dataset(dataset_id)  # 404 before queueing
        spec = ModelSpec.from_dict(body.get("spec") or {})
        job = store.create_job(dataset_id, spec.to_dict())
        runner.submit(job)
        return _envelope({"job": job.to_dict()}, 202)

    @app.get("/models/{job_id}")
    async def get_job(job_id: str):
        return _envelope({"job": store.get_job(job_id).to_dict()})

    @app.post("/models/{job_id}/forecast")
    async def forecast(job_id: str, body: dict):
        job = store.get_job(job_id)
        if job.status != "done":
            raise ConflictError(f"job {job_id} is {job.status}, not done")
        horizon = body.get("horizon")
        if not isinstance(horizon, int) or horizon < 1:
            raise ArgumentError(f"horizon must be a positive integer, got {horizon!r}")
        confidence = float(body.get("confidence", 0.95))
        fitted = store.load_model(job_id)
        fc = fitted.forecast(horizon, confidence)

        # Undo the dataset's preprocessing lineage so values are in the
        # units of the originally uploaded data.
        root_id, records = store.lineage_records(job.dataset_id)
        if records:
            root_series = store.load_series(root_id)
            fc.points = invert_forecast_path(root_series, records, fc.points)
            if fc.lower is not None:
                fc.lower = invert_forecast_path(root_series, records, fc.lower)
                fc.upper = invert_forecast_path(root_series, records, fc.upper)
        return _envelope({"forecast": fc.to_dict(), "job_id": job_id})

    # -- comparison --

    @app.post("/compare")
    async def compare(body: dict):
        dataset_id = body.get("dataset_id")
        if not dataset_id:
            raise ArgumentError("body must carry a dataset_id")
        series = store.load_series(dataset_id)
        spec_docs = body.get("specs")
        if not isinstance(spec_docs, list) or not spec_docs:
            raise ArgumentError("body must carry a nonempty 'specs' list")
        specs = [ModelSpec.from_dict(doc) for doc in spec_docs]
        cv = body.get("cv") or {}
        folds = int(cv.get("folds", 5))
        horizon = int(cv.get("horizon", 1))
        try:
            reports = compare_models(series, specs, folds=folds, horizon=horizon)
        except ComparisonError as exc:
            return JSONResponse(
                {"api_version": API_VERSION,
                 "error": {"code": exc.code, "message": str(exc), "causes": exc.causes}},
                status_code=500)
        return _envelope({"leaderboard": [r.to_dict() for r in reports],
                          "cv": {"folds": folds, "horizon": horizon}})

    # -- anomalies --

    @app.get("/datasets/{dataset_id}/anomalies")
    async def anomalies(dataset_id: str, model: str, threshold: float = 4.0):
        store.get_dataset(dataset_id)
        job = store.get_job(model)
        if job.dataset_id != dataset_id:
            raise ConflictError(f"job {model} was fitted on dataset {job.dataset_id}, "
                                f"not {dataset_id}")
        if job.status != "done":
            raise ConflictError(f"job {model} is {job.status}, not done")
        if threshold <= 0:
            raise ArgumentError("threshold must be positive")
        series = store.load_series(dataset_id)
        fitted = store.load_model(model)
        expected = fitted.in_sample_expected()
        events = detect_anomalies(series, expected, threshold)
        return _envelope({"anomalies": [e.to_dict() for e in events],
                          "threshold": threshold, "model_job_id": model})

    return app
