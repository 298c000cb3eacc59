"""Staged processing jobs: a parse stage plus one stage per predictor.

Jobs for the same document run serially (per-document lock); different
documents run in parallel up to the worker count. A failed predictor stage
never fails the job; stage states only ever advance.
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from layerlab.pipeline import PipelineConfig, run_core_pipeline
from layerlab.processing import apply_predictor, validate_predictor_configs
from layerlab.predictors.registry import Registry
from layerlab.service.store import Store

STAGE_STATES = ("pending", "running", "done", "failed", "skipped")
_STATE_RANK = {state: rank for rank, state in enumerate(STAGE_STATES)}


@dataclass
class JobStage:
    name: str
    state: str = "pending"
    error: str | None = None


@dataclass
class ProcessingJob:
    job_id: str
    doc_id: str
    stages: list[JobStage]
    requested_predictors: list[dict]
    created_at: float
    finished_at: float | None = None

    def to_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "doc_id": self.doc_id,
            "stages": [
                {"name": s.name, "state": s.state, "error": s.error} for s in self.stages
            ],
            "requested_predictors": self.requested_predictors,
            "created_at": self.created_at,
            "finished_at": self.finished_at,
        }


def _stage_names(predictor_configs: list[dict]) -> list[str]:
    names = []
    counts: dict[str, int] = defaultdict(int)
    for record in predictor_configs:
        base = record.get("name", "predictor")
        counts[base] += 1
        names.append(base if counts[base] == 1 else f"{base}_{counts[base]}")
    return names


@dataclass
class JobManager:
    store: Store
    registry: Registry
    workers: int = 2
    _jobs: dict[str, ProcessingJob] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _doc_locks: dict[str, threading.Lock] = field(
        default_factory=lambda: defaultdict(threading.Lock)
    )

    def __post_init__(self):
        self._pool = ThreadPoolExecutor(max_workers=self.workers,
                                        thread_name_prefix="layerlab-job")

    def submit(
        self,
        doc_id: str,
        predictor_configs: list[dict],
        pipeline_config: PipelineConfig,
    ) -> str:
        """Validate configs, persist the job record, and enqueue execution."""
        validate_predictor_configs(self.registry, predictor_configs)
        job = ProcessingJob(
            job_id=uuid.uuid4().hex,
            doc_id=doc_id,
            stages=[JobStage("parse")]
            + [JobStage(name) for name in _stage_names(predictor_configs)],
            requested_predictors=_scrub_configs(predictor_configs),
            created_at=time.time(),
        )
        with self._lock:
            self._jobs[job.job_id] = job
        self._persist(job)
        self._pool.submit(self._run, job, list(predictor_configs), pipeline_config)
        return job.job_id

    def get(self, job_id: str) -> ProcessingJob | None:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is not None:
            return job
        payload = self.store.load_job(job_id)
        if payload is None:
            return None
        return ProcessingJob(
            job_id=payload["job_id"],
            doc_id=payload["doc_id"],
            stages=[JobStage(s["name"], s["state"], s.get("error")) for s in payload["stages"]],
            requested_predictors=payload.get("requested_predictors", []),
            created_at=payload.get("created_at", 0.0),
            finished_at=payload.get("finished_at"),
        )

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)

    # -- execution -----------------------------------------------------------

    def _set_stage(self, job: ProcessingJob, index: int, state: str,
                   error: str | None = None) -> None:
        stage = job.stages[index]
        if _STATE_RANK[state] < _STATE_RANK[stage.state]:
            return  # states never regress
        stage.state = state
        stage.error = error
        self._persist(job)

    def _persist(self, job: ProcessingJob) -> None:
        with self._lock:
            payload = job.to_json()
        self.store.save_job(job.job_id, payload)

    def _run(self, job: ProcessingJob, predictor_configs: list[dict],
             pipeline_config: PipelineConfig) -> None:
        with self._doc_locks[job.doc_id]:
            try:
                doc = self._parse_stage(job, pipeline_config)
                if doc is not None:
                    self._predictor_stages(job, doc, predictor_configs)
            finally:
                job.finished_at = time.time()
                self._persist(job)

    def _parse_stage(self, job: ProcessingJob, pipeline_config: PipelineConfig):
        existing = None
        try:
            existing = self.store.load_document(job.doc_id)
        except Exception:
            existing = None
        if (
            existing is not None
            and existing.metadata.get("pipeline_config_hash") == pipeline_config.config_hash()
        ):
            self._set_stage(job, 0, "skipped")
            return existing
        self._set_stage(job, 0, "running")
        try:
            pdf = self.store.pdf_bytes(job.doc_id)
            doc = run_core_pipeline(
                pdf,
                pipeline_config,
                region_hints=self.store.region_hints(job.doc_id),
                source_filename=self.store.upload_filename(job.doc_id),
                doc_id=job.doc_id,
            )
            self.store.save_document(doc)
            self.store.save_page_renders(doc, pipeline_config.render_dpi)
        except Exception as exc:
            self._set_stage(job, 0, "failed", str(exc))
            for index in range(1, len(job.stages)):
                self._set_stage(job, index, "skipped", "parse failed")
            return None
        self._set_stage(job, 0, "done")
        return doc

    def _predictor_stages(self, job: ProcessingJob, doc, predictor_configs: list[dict]):
        for offset, record in enumerate(predictor_configs):
            index = offset + 1
            self._set_stage(job, index, "running")
            doc, outcome = apply_predictor(doc, self.registry, record)
            if outcome.errors:
                self.store.write_errors(
                    job.doc_id, job.stages[index].name, outcome.errors
                )
            if outcome.failure is not None:
                self._set_stage(job, index, "failed", outcome.failure)
                continue
            self.store.save_document(doc)
            self._set_stage(job, index, "done")


def _scrub_configs(predictor_configs: list[dict]) -> list[dict]:
    """Deep-copy configs for the persisted job record. Configs reference
    secrets by environment-variable name only, so they are safe to store."""
    import copy

    return copy.deepcopy(predictor_configs)
