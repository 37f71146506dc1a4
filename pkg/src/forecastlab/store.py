"""Flat-file persistence for datasets, fit jobs, and fitted models, plus the
bounded worker pool that executes fits.

Datasets are content-addressed: the id is a digest of the canonical CSV, so
re-uploading identical data returns the existing record. Job state is
persisted on every transition; on startup interrupted jobs are re-queued.
"""

from __future__ import annotations

import hashlib
import json
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ConflictError, NotFoundError
from .modelspec import FittedModel, ModelSpec, fit_model
from .preprocess import TransformRecord
from .series import TimeSeries, ingest_csv

JOB_STATUSES = ("queued", "running", "done", "failed")


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _write_atomic(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename, so concurrent readers never
    observe a truncated document."""
    tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex[:8]}.tmp")
    tmp.write_text(text)
    tmp.replace(path)


@dataclass
class DatasetRecord:
    id: str
    name: str
    created_at: str
    row_count: int
    frequency: int
    missing_count: int
    pipeline: list[dict] = field(default_factory=list)  # TransformRecord dicts
    source_id: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "created_at": self.created_at,
                "row_count": self.row_count, "frequency": self.frequency,
                "missing_count": self.missing_count, "pipeline": self.pipeline,
                "source_id": self.source_id}

    @classmethod
    def from_dict(cls, doc: dict) -> "DatasetRecord":
        return cls(**doc)


@dataclass
class FitJob:
    id: str
    dataset_id: str
    spec: dict
    status: str = "queued"
    submitted_at: str = ""
    started_at: str | None = None
    finished_at: str | None = None
    error: dict | None = None
    diagnostics: dict | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "dataset_id": self.dataset_id, "spec": self.spec,
                "status": self.status, "submitted_at": self.submitted_at,
                "started_at": self.started_at, "finished_at": self.finished_at,
                "error": self.error, "diagnostics": self.diagnostics}

    @classmethod
    def from_dict(cls, doc: dict) -> "FitJob":
        return cls(**doc)


class Store:
    """Disk layout: datasets/<id>.csv + <id>.json, jobs/<id>.json,
    models/<id>.json under one data directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("datasets", "jobs", "models"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()

    # -- datasets --

    def save_dataset(self, series: TimeSeries, name: str,
                     pipeline: list[TransformRecord] | None = None,
                     source_id: str | None = None) -> tuple[DatasetRecord, bool]:
        """Persist a series; returns (record, created). Identical content
        yields the existing record."""
        canonical = series.to_csv()
        dataset_id = hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
        with self._lock:
            meta_path = self.root / "datasets" / f"{dataset_id}.json"
            if meta_path.exists():
                return DatasetRecord.from_dict(json.loads(meta_path.read_text())), False
            record = DatasetRecord(
                id=dataset_id, name=name, created_at=_now_iso(),
                row_count=len(series), frequency=series.frequency,
                missing_count=int(np.isnan(series.values).sum()),
                pipeline=[r.to_dict() for r in (pipeline or [])],
                source_id=source_id)
            _write_atomic(self.root / "datasets" / f"{dataset_id}.csv", canonical)
            _write_atomic(meta_path, json.dumps(record.to_dict(), indent=2))
            return record, True

    def get_dataset(self, dataset_id: str) -> DatasetRecord:
        meta_path = self.root / "datasets" / f"{dataset_id}.json"
        if not meta_path.exists():
            raise NotFoundError(f"dataset {dataset_id} not found")
        return DatasetRecord.from_dict(json.loads(meta_path.read_text()))

    def load_series(self, dataset_id: str) -> TimeSeries:
        record = self.get_dataset(dataset_id)
        csv_path = self.root / "datasets" / f"{dataset_id}.csv"
        return ingest_csv(csv_path.read_bytes(), name=record.name)

    def list_datasets(self) -> list[DatasetRecord]:
        records = []
        for meta in sorted((self.root / "datasets").glob("*.json")):
            records.append(DatasetRecord.from_dict(json.loads(meta.read_text())))
        records.sort(key=lambda r: r.created_at)
        return records

    def lineage_records(self, dataset_id: str) -> tuple[str, list[TransformRecord]]:
        """Walk to the root dataset, returning (root_id, records in
        application order from the root)."""
        chain: list[TransformRecord] = []
        current = self.get_dataset(dataset_id)
        while current.source_id is not None:
            chain = [TransformRecord.from_dict(d) for d in current.pipeline] + chain
            current = self.get_dataset(current.source_id)
        return current.id, chain

    # -- jobs --

    def create_job(self, dataset_id: str, spec: dict) -> FitJob:
        job = FitJob(id=uuid.uuid4().hex[:16], dataset_id=dataset_id, spec=spec,
                     submitted_at=_now_iso())
        self.save_job(job)
        return job

    def save_job(self, job: FitJob) -> None:
        with self._lock:
            path = self.root / "jobs" / f"{job.id}.json"
            _write_atomic(path, json.dumps(job.to_dict(), indent=2))

    def get_job(self, job_id: str) -> FitJob:
        path = self.root / "jobs" / f"{job_id}.json"
        if not path.exists():
            raise NotFoundError(f"job {job_id} not found")
        return FitJob.from_dict(json.loads(path.read_text()))

    def list_jobs(self) -> list[FitJob]:
        jobs = [FitJob.from_dict(json.loads(p.read_text()))
                for p in sorted((self.root / "jobs").glob("*.json"))]
        jobs.sort(key=lambda j: j.submitted_at)
        return jobs

    # -- fitted models --

    def save_model(self, job_id: str, fitted: FittedModel) -> None:
        with self._lock:
            path = self.root / "models" / f"{job_id}.json"
            _write_atomic(path, json.dumps(fitted.to_dict()))

    def load_model(self, job_id: str) -> FittedModel:
        path = self.root / "models" / f"{job_id}.json"
        if not path.exists():
            raise NotFoundError(f"no fitted model stored for job {job_id}")
        return FittedModel.from_dict(json.loads(path.read_text()))


class JobRunner:
    """FIFO queue drained by a bounded worker pool; every state transition
    is persisted before work continues."""

    def __init__(self, store: Store, workers: int = 2):
        self.store = store
        self.queue: queue.Queue[str | None] = queue.Queue()
        self.workers = max(1, workers)
        self._threads: list[threading.Thread] = []
        self._stopping = False

    def start(self) -> None:
        self.recover()
        for i in range(self.workers):
            thread = threading.Thread(target=self._worker, name=f"fit-worker-{i}", daemon=True)
            thread.start()
            self._threads.append(thread)

    def recover(self) -> None:
        """Re-queue jobs interrupted before completion."""
        for job in self.store.list_jobs():
            if job.status in ("queued", "running"):
                job.status = "queued"
                job.started_at = None
                self.store.save_job(job)
                self.queue.put(job.id)

    def submit(self, job: FitJob) -> None:
        self.queue.put(job.id)

    def stop(self) -> None:
        self._stopping = True
        for _ in self._threads:
            self.queue.put(None)
        for thread in self._threads:
            thread.join(timeout=5.0)

    def wait_idle(self, timeout: float = 60.0) -> bool:
        """Block until no queued or running jobs remain (used by tests)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            pending = [j for j in self.store.list_jobs() if j.status in ("queued", "running")]
            if not pending:
                return True
            time.sleep(0.05)
        return False

    def _worker(self) -> None:
        while True:
            job_id = self.queue.get()
            if job_id is None:
                return
            try:
                self._run(job_id)
            except Exception:  # noqa: BLE001 - worker must survive anything
                pass

    def _run(self, job_id: str) -> None:
        job = self.store.get_job(job_id)
        if job.status != "queued":
            return
        job.status = "running"
        job.started_at = _now_iso()
        self.store.save_job(job)
        try:
            series = self.store.load_series(job.dataset_id)
            if series.has_missing:
                raise ConflictError("dataset contains missing values; preprocess with an "
                                    "impute step before fitting")
            spec = ModelSpec.from_dict(job.spec)
            fitted = fit_model(series, spec)
            self.store.save_model(job.id, fitted)
            job.diagnostics = _jsonable_diag(fitted.diagnostics())
            job.status = "done"
        except Exception as exc:  # noqa: BLE001 - failure detail belongs on the job
            code = getattr(exc, "code", "error")
            job.error = {"code": code, "message": str(exc)}
            job.status = "failed"
        job.finished_at = _now_iso()
        self.store.save_job(job)


def _jsonable_diag(doc: dict) -> dict:
    return json.loads(json.dumps(doc, default=float))
