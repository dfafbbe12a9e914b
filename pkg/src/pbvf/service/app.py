"""HTTP facade over the experiment runner.

Experiments run as background jobs on a small thread pool (each job may fan
its seeds out further, bounded by the request's max_workers); landscape dumps
and oracle reports are quick enough to answer synchronously. Config problems
map to 400 with error_kind "config", runtime failures to "runtime", so the
CLI can translate them into its documented exit codes.
"""

from __future__ import annotations

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import ConfigError, PbvfError
from ..harness.runner import (parse_seeds, run_experiment, run_landscape,
                              run_oracle)
from .models import (HealthResponse, JobList, JobStatus, LandscapeRequest,
                     LandscapeResult, OracleRequest, OracleResult, OracleRow,
                     RunRequest, SeedArtifacts, SummaryModel)


class JobRegistry:
    def __init__(self, workers: int = 2):
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._lock = threading.Lock()
        self._jobs: dict[str, JobStatus] = {}
        self._counter = itertools.count(1)

    def submit(self, request: RunRequest) -> JobStatus:
        seeds = parse_seeds(request.seeds)
        options = request.config_options()
        with self._lock:
            job_id = f"job{next(self._counter)}"
            status = JobStatus(job_id=job_id, state="queued")
            self._jobs[job_id] = status
        self._pool.submit(self._execute, job_id, options, seeds, request)
        return status

    def _execute(self, job_id: str, options: dict, seeds: list[int],
                 request: RunRequest) -> None:
        self._update(job_id, state="running")
        try:
            out = run_experiment(options, seeds, request.out_dir,
                                 config_text=request.config_text,
                                 max_workers=request.max_workers)
        except ConfigError as e:
            self._update(job_id, state="failed", detail=str(e),
                         error_kind="config")
            return
        except Exception as e:
            self._update(job_id, state="failed",
                         detail=f"{type(e).__name__}: {e}",
                         error_kind="runtime")
            return
        summary = out["summary"]
        seed_rows = [
            SeedArtifacts(seed=o.seed, curve_path=o.curve_path,
                          checkpoint_path=o.checkpoint_path,
                          avg_metric=o.avg, final_metric=o.final)
            for o in (out["outcomes"][s] for s in sorted(out["outcomes"]))
        ]
        self._update(job_id, state="done",
                     summary=SummaryModel(**summary.__dict__),
                     summary_path=out["summary_path"], seeds=seed_rows)

    def _update(self, job_id: str, **changes) -> None:
        with self._lock:
            status = self._jobs[job_id]
            self._jobs[job_id] = status.model_copy(update=changes)

    def get(self, job_id: str) -> JobStatus | None:
        with self._lock:
            return self._jobs.get(job_id)

    def all(self) -> list[JobStatus]:
        with self._lock:
            return list(self._jobs.values())

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)


def create_app(job_workers: int = 2) -> FastAPI:
    app = FastAPI(title="pbvf service", version=__version__)
    registry = JobRegistry(workers=job_workers)
    app.state.registry = registry

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/runs", response_model=JobStatus, status_code=202)
    def submit_run(request: RunRequest) -> JobStatus:
        try:
            return registry.submit(request)
        except ConfigError as e:
            raise HTTPException(status_code=400, detail=str(e))

    @app.get("/runs", response_model=JobList)
    def list_runs() -> JobList:
        return JobList(jobs=registry.all())

    @app.get("/runs/{job_id}", response_model=JobStatus)
    def get_run(job_id: str) -> JobStatus:
        status = registry.get(job_id)
        if status is None:
            raise HTTPException(status_code=404, detail=f"no such job {job_id}")
        return status

    @app.post("/landscape", response_model=LandscapeResult)
    def landscape(request: LandscapeRequest) -> LandscapeResult:
        try:
            info = run_landscape(request.critic_path, request.resolution,
                                 request.out_path, mode=request.mode)
        except ConfigError as e:
            raise HTTPException(status_code=400, detail=str(e))
        except PbvfError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return LandscapeResult(**info)

    @app.post("/oracle", response_model=OracleResult)
    def oracle(request: OracleRequest) -> OracleResult:
        try:
            info = run_oracle(request.out_path, instances=request.instances,
                              seed=request.seed, gamma=request.gamma)
        except ConfigError as e:
            raise HTTPException(status_code=400, detail=str(e))
        rows = [OracleRow(instance=r.name, thm1_maxerr=r.thm1_maxerr,
                          thm3_maxerr=r.thm3_maxerr, degris_bias=r.degris_bias)
                for r in info["reports"]]
        return OracleResult(out_path=info["out_path"],
                            thm1_maxerr=info["thm1_maxerr"],
                            thm3_maxerr=info["thm3_maxerr"],
                            constructed_bias=info["constructed_bias"],
                            rows=rows)

    return app
