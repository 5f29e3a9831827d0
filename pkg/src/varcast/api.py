"""HTTP service exposing the catalog, scenarios, and evaluation jobs.

Single-node and file-backed: the catalog, scenario documents, and finished
reports all persist under one data directory, so a restart loses nothing but
in-flight jobs. Evaluations run asynchronously on a bounded worker pool and
are polled via /jobs/{id}.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

import uvicorn
from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from . import __version__
from .catalog import Catalog
from .errors import FormatError, ScenarioParseError, VarcastError
from .montecarlo import SimulationConfig
from .pipeline import EvaluationReport, evaluate, render_report
from .scenario import Scenario, parse_scenario, serialize_scenario, validate

JOB_STATES = ("queued", "running", "done", "failed")


@dataclass
class EvaluationJob:
    job_id: str
    scenario_id: str
    state: str = "queued"
    report: EvaluationReport | None = None
    error: str | None = None
    timing_seconds: float | None = None

    def as_dict(self, include_report: bool = True) -> dict:
        out = {
            "job_id": self.job_id,
            "scenario_id": self.scenario_id,
            "state": self.state,
        }
        if self.error is not None:
            out["error"] = self.error
        if self.timing_seconds is not None:
            out["timing_seconds"] = self.timing_seconds
        if include_report and self.report is not None:
            out["report"] = self.report.to_dict()
        return out


class ServiceState:
    """Mutable application state with file-backed persistence."""

    def __init__(self, data_dir, sim_defaults: SimulationConfig, max_workers: int = 2):
        from concurrent.futures import ThreadPoolExecutor

        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.sim_defaults = sim_defaults
        self.catalog = Catalog.load(self.data_dir)
        self.scenarios: dict[str, Scenario] = {}
        self.jobs: dict[str, EvaluationJob] = {}
        self.lock = threading.Lock()
        self.executor = ThreadPoolExecutor(max_workers=max_workers)
        self._restore()

    # -- persistence ----------------------------------------------------

    def _dir(self, name: str) -> Path:
        path = self.data_dir / name
        path.mkdir(exist_ok=True)
        return path

    def _restore(self) -> None:
        for path in sorted(self._dir("scenarios").glob("*.json")):
            scenario = parse_scenario(path.read_text(encoding="utf-8"))
            self.scenarios[scenario.id] = scenario
        for path in sorted(self._dir("jobs").glob("*.json")):
            meta = json.loads(path.read_text(encoding="utf-8"))
            job = EvaluationJob(
                job_id=meta["job_id"],
                scenario_id=meta["scenario_id"],
                state=meta["state"],
                error=meta.get("error"),
                timing_seconds=meta.get("timing_seconds"),
            )
            if job.state in ("queued", "running"):
                job.state = "failed"
                job.error = "interrupted by service restart"
                self._persist_job(job)
            elif job.state == "done":
                report_path = self._dir("reports") / f"{job.job_id}.json"
                if report_path.exists():
                    job.report = EvaluationReport.from_dict(
                        json.loads(report_path.read_text(encoding="utf-8"))
                    )
                else:
                    job.state = "failed"
                    job.error = "report file missing"
            self.jobs[job.job_id] = job

    def _persist_job(self, job: EvaluationJob) -> None:
        path = self._dir("jobs") / f"{job.job_id}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(job.as_dict(include_report=False), indent=2), encoding="utf-8")
        tmp.replace(path)

    def persist_scenario(self, scenario: Scenario) -> None:
        path = self._dir("scenarios") / f"{scenario.id}.json"
        path.write_text(serialize_scenario(scenario), encoding="utf-8")

    def persist_report(self, job: EvaluationJob) -> None:
        path = self._dir("reports") / f"{job.job_id}.json"
        path.write_bytes(render_report(job.report, "json"))

    # -- job lifecycle ----------------------------------------------------

    def transition(self, job: EvaluationJob, state: str, **fields) -> None:
        with self.lock:
            job.state = state
            for name, value in fields.items():
                setattr(job, name, value)
            self._persist_job(job)

    def submit(self, scenario: Scenario, config: SimulationConfig) -> EvaluationJob:
        job = EvaluationJob(job_id=uuid.uuid4().hex, scenario_id=scenario.id)
        with self.lock:
            self.jobs[job.job_id] = job
            self._persist_job(job)
        self.executor.submit(self._run_job, job, scenario, config)
        return job

    def _run_job(self, job: EvaluationJob, scenario: Scenario, config: SimulationConfig) -> None:
        self.transition(job, "running")
        try:
            report = evaluate(scenario, self.catalog, config)
        except VarcastError as exc:
            self.transition(job, "failed", error=str(exc))
            return
        job.report = report
        self.persist_report(job)
        self.transition(job, "done", timing_seconds=report.timing_seconds)


def _error(status: int, code: str, message: str, findings=None) -> JSONResponse:
    body = {"code": code, "message": message}
    if findings is not None:
        body["findings"] = findings
    return JSONResponse(body, status_code=status)


def _merge_config(defaults: SimulationConfig, overrides: dict | None) -> SimulationConfig:
    if not overrides:
        return defaults
    allowed = {
        "n_sims",
        "seed",
        "ci_level",
        "default_uncertainty_std_pct",
        "include_residual_noise",
    }
    unknown = sorted(set(overrides) - allowed)
    if unknown:
        raise VarcastError(f"unknown config field(s): {', '.join(unknown)}")
    merged = {
        "n_sims": defaults.n_sims,
        "seed": defaults.seed,
        "ci_level": defaults.ci_level,
        "default_uncertainty_std_pct": defaults.default_uncertainty_std_pct,
        "include_residual_noise": defaults.include_residual_noise,
    }
    merged.update(overrides)
    return SimulationConfig(**merged)


def create_app(
    data_dir,
    sim_defaults: SimulationConfig | None = None,
    max_workers: int = 2,
) -> FastAPI:
    state = ServiceState(data_dir, sim_defaults or SimulationConfig(), max_workers=max_workers)
    app = FastAPI(title="varcast", version=__version__)
    app.state.service = state

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__, "series": len(state.catalog)}

    @app.post("/datasets")
    async def ingest_dataset(request: Request):
        body = await request.body()
        try:
            summary = state.catalog.ingest_csv(body)
        except FormatError as exc:
            return _error(400, "format-error", str(exc))
        state.catalog.save(state.data_dir)
        return JSONResponse(summary.as_dict(), status_code=201)

    @app.get("/series")
    def list_series(
        metric: str | None = Query(default=None),
        item: str | None = Query(default=None),
        region: str | None = Query(default=None),
        frequency: str | None = Query(default=None),
    ):
        try:
            keys = state.catalog.query(
                metric=metric or None,
                item=item or None,
                region=region or None,
                frequency=frequency or None,
            )
        except VarcastError as exc:
            return _error(400, "bad-query", str(exc))
        series = []
        for key in keys:
            ts = state.catalog.get(key)
            entry = key.to_dict()
            entry["n_points"] = len(ts)
            entry["unit"] = ts.unit
            series.append(entry)
        return {"series": series}

    @app.post("/scenarios")
    async def create_scenario(request: Request):
        body = await request.body()
        try:
            scenario = parse_scenario(body)
        except ScenarioParseError as exc:
            return _error(400, "parse-error", str(exc),
                          findings=[{"severity": "error", "code": "parse-error",
                                     "message": exc.reason, "path": exc.path}])
        with state.lock:
            if scenario.id in state.scenarios:
                return _error(409, "duplicate-id", f"scenario {scenario.id!r} already exists")
            state.scenarios[scenario.id] = scenario
        state.persist_scenario(scenario)
        return JSONResponse({"id": scenario.id}, status_code=201)

    @app.get("/scenarios")
    def list_scenarios():
        return {
            "scenarios": [
                {"id": s.id, "name": s.name,
                 "assumptions": len(s.assumptions), "impacts": len(s.impacts)}
                for s in state.scenarios.values()
            ]
        }

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        scenario = state.scenarios.get(scenario_id)
        if scenario is None:
            return _error(404, "not-found", f"no scenario {scenario_id!r}")
        return Response(serialize_scenario(scenario), media_type="application/json")

    @app.post("/scenarios/{scenario_id}/validate")
    def validate_scenario(scenario_id: str):
        scenario = state.scenarios.get(scenario_id)
        if scenario is None:
            return _error(404, "not-found", f"no scenario {scenario_id!r}")
        return validate(scenario, state.catalog).as_dict()

    @app.post("/scenarios/{scenario_id}/evaluate")
    async def evaluate_scenario(scenario_id: str, request: Request):
        scenario = state.scenarios.get(scenario_id)
        if scenario is None:
            return _error(404, "not-found", f"no scenario {scenario_id!r}")
        body = await request.body()
        overrides = None
        if body:
            try:
                overrides = json.loads(body)
            except json.JSONDecodeError as exc:
                return _error(400, "bad-config", f"invalid JSON body: {exc}")
        try:
            config = _merge_config(state.sim_defaults, overrides)
        except (VarcastError, TypeError) as exc:
            return _error(400, "bad-config", str(exc))
        job = state.submit(scenario, config)
        return JSONResponse({"job_id": job.job_id, "state": job.state}, status_code=202)

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            return _error(404, "not-found", f"no job {job_id!r}")
        return job.as_dict()

    @app.get("/jobs/{job_id}/report")
    def get_report(job_id: str, format: str = Query(default="json")):
        job = state.jobs.get(job_id)
        if job is None:
            return _error(404, "not-found", f"no job {job_id!r}")
        if job.state != "done":
            return _error(409, "job-not-done", f"job is {job.state}")
        if format not in ("json", "table"):
            return _error(400, "bad-format", "format must be json or table")
        media = "application/json" if format == "json" else "text/plain; charset=utf-8"
        return Response(render_report(job.report, format), media_type=media)

    return app


def serve(
    data_dir,
    host: str = "127.0.0.1",
    port: int = 8000,
    sim_defaults: SimulationConfig | None = None,
    max_workers: int = 2,
) -> None:
    """Run the service until interrupted; uvicorn handles signals gracefully."""
    app = create_app(data_dir, sim_defaults=sim_defaults, max_workers=max_workers)
    uvicorn.run(app, host=host, port=port, log_level="info")
