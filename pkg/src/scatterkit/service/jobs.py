"""Background job execution for the HTTP service.

Render jobs are minutes-scale, so they run through a small FIFO worker
pool (one worker by default) instead of concurrently: queuing keeps wall
times predictable and progress reporting trivial. The manager also owns
the duplicate-suppression rule: while a job for some key is queued or
running, submitting the same key hands back the existing job instead of
creating a second one.
"""

from __future__ import annotations

import enum
import queue
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Hashable

# work callback: (progress_fn, job_id) -> (result dict, image path or None)
JobWork = Callable[[Callable[[float], None], str], "tuple[dict[str, Any], Path | None]"]


class JobStatus(str, enum.Enum):
    QUEUED = "Queued"
    RUNNING = "Running"
    DONE = "Done"
    FAILED = "Failed"


class _Job:
    __slots__ = ("id", "key", "status", "progress", "result", "error", "image_path", "work")

    def __init__(self, job_id: str, key: Hashable, work: JobWork):
        self.id = job_id
        self.key = key
        self.status = JobStatus.QUEUED
        self.progress = 0.0
        self.result: dict[str, Any] | None = None
        self.error: str | None = None
        self.image_path: Path | None = None
        self.work: JobWork | None = work


@dataclass(frozen=True)
class JobSnapshot:
    """Lock-consistent copy of one job's state."""

    id: str
    key: Hashable
    status: JobStatus
    progress: float
    result: dict[str, Any] | None
    error: str | None
    image_path: Path | None


class JobManager:
    def __init__(self, worker_count: int = 1):
        if worker_count < 1:
            raise ValueError("worker_count must be positive")
        self._queue: queue.Queue[str | None] = queue.Queue()
        self._lock = threading.Lock()
        self._jobs: dict[str, _Job] = {}
        self._active_by_key: dict[Hashable, str] = {}
        self._workers = [
            threading.Thread(target=self._run_worker, name=f"job-worker-{i}", daemon=True)
            for i in range(worker_count)
        ]
        for w in self._workers:
            w.start()

    def submit(self, key: Hashable, work: JobWork) -> tuple[str, bool]:
        """Queue `work` under `key`; returns (job id, created?).

        created=False means an equivalent job is already queued or running
        and its id is returned instead.
        """
        with self._lock:
            existing = self._active_by_key.get(key)
            if existing is not None:
                return existing, False
            job_id = uuid.uuid4().hex
            self._jobs[job_id] = _Job(job_id, key, work)
            self._active_by_key[key] = job_id
        self._queue.put(job_id)
        return job_id, True

    def snapshot(self, job_id: str) -> JobSnapshot | None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return None
            return JobSnapshot(
                job.id, job.key, job.status, job.progress,
                job.result, job.error, job.image_path,
            )

    def close(self, timeout: float = 5.0) -> None:
        """Stop workers after they finish their current job."""
        for _ in self._workers:
            self._queue.put(None)
        for w in self._workers:
            w.join(timeout)

    def _report_progress(self, job: _Job, fraction: float) -> None:
        fraction = min(1.0, float(fraction))
        with self._lock:
            # monotone by construction, whatever the work function reports
            if fraction > job.progress:
                job.progress = fraction

    def _run_worker(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            with self._lock:
                job = self._jobs[job_id]
                job.status = JobStatus.RUNNING
                work = job.work
                job.work = None
            try:
                result, image_path = work(lambda f: self._report_progress(job, f), job.id)
            except Exception as exc:
                with self._lock:
                    job.status = JobStatus.FAILED
                    job.error = str(exc) or type(exc).__name__
                    self._active_by_key.pop(job.key, None)
            else:
                with self._lock:
                    job.status = JobStatus.DONE
                    job.progress = 1.0
                    job.result = result
                    job.image_path = image_path
                    self._active_by_key.pop(job.key, None)
