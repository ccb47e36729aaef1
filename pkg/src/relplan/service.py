"""HTTP/JSON facade over the planner, one JSON file per project.

Every endpoint is a thin wrapper: deserialize, call the corresponding
planner/model operation, serialize. Writes take a per-project lock so
concurrent conflicting requests resolve to one winner and one conflict.
"""

from __future__ import annotations

import json
import threading
import uuid
from collections import defaultdict
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from relplan import document
from relplan.model import (
    Conflict,
    NotFound,
    PlanningError,
    ProjectState,
    ReleaseOutcome,
    ValidationFailed,
    validate_project,
)
from relplan.planner import (
    NewDefect,
    PlanRequest,
    choose_solution,
    plan_iteration,
    project_timeline,
    record_outcome,
)
from relplan.optimizer import solution_to_json

_STATUS = {
    "validation_failed": 422,
    "infeasible": 422,
    "not_found": 404,
    "conflict": 409,
}


class ProjectStore:
    """File-backed project storage with per-project writer locks."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: defaultdict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()

    def lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks[project_id]

    def _path(self, project_id: str) -> Path:
        if not project_id.replace("-", "").isalnum():
            raise NotFound(f"no project {project_id!r}")
        return self.data_dir / f"{project_id}.json"

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.data_dir.glob("*.json"))

    def exists(self, project_id: str) -> bool:
        return self._path(project_id).exists()

    def load(self, project_id: str) -> ProjectState:
        path = self._path(project_id)
        if not path.exists():
            raise NotFound(f"no project {project_id!r}")
        return document.load_project(path)

    def save(self, project_id: str, state: ProjectState) -> None:
        document.save_project(state, self._path(project_id))

    def create(self, state: ProjectState) -> str:
        project_id = uuid.uuid4().hex[:12]
        self.save(project_id, state)
        return project_id


def _parse_body(raw: bytes) -> Any:
    try:
        return json.loads(raw or b"{}")
    except json.JSONDecodeError as exc:
        raise ValidationFailed(f"malformed JSON body: {exc}", details={"line": exc.lineno, "column": exc.colno}) from exc


def _validated_state(body: Any) -> ProjectState:
    if not isinstance(body, dict):
        raise ValidationFailed("project document must be a JSON object")
    state = document.from_document(body)
    report = validate_project(state)
    if not report.ok:
        raise ValidationFailed(
            "project fails validation",
            details={"violations": [f"{v.invariant}: {v.message}" for v in report.violations]},
        )
    return state


def _solution_payload(state: ProjectState, iteration: int) -> dict:
    record = next(it for it in state.iterations if it.index == iteration)
    return {
        "iteration": record.index,
        "ff_applied": record.ff_applied,
        "t_max": record.t_max,
        "solutions": [solution_to_json(s) for s in record.solutions],
    }


def create_app(data_dir: str | Path, ui_dir: Optional[str | Path] = None) -> FastAPI:
    app = FastAPI(title="relplan", docs_url=None, redoc_url=None)
    store = ProjectStore(data_dir)
    app.state.store = store

    @app.exception_handler(PlanningError)
    async def planning_error(_req: Request, exc: PlanningError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 400),
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.get("/api/v1/projects")
    def list_projects():
        return store.ids()

    @app.post("/api/v1/projects", status_code=201)
    async def create_project(request: Request):
        state = _validated_state(_parse_body(await request.body()))
        project_id = store.create(state)
        return {"id": project_id, "project": document.to_document(state)}

    @app.get("/api/v1/projects/{project_id}")
    def get_project(project_id: str):
        return document.to_document(store.load(project_id))

    @app.put("/api/v1/projects/{project_id}")
    async def put_project(project_id: str, request: Request):
        state = _validated_state(_parse_body(await request.body()))
        with store.lock(project_id):
            if not store.exists(project_id):
                raise NotFound(f"no project {project_id!r}")
            store.save(project_id, state)
        return document.to_document(state)

    @app.post("/api/v1/projects/{project_id}/iterations/{iteration}/plan")
    async def plan(project_id: str, iteration: int, request: Request):
        body = _parse_body(await request.body())
        if not isinstance(body, dict) or "t_max" not in body:
            raise ValidationFailed("body must be an object with a numeric 't_max'")
        t_max = body["t_max"]
        if isinstance(t_max, bool) or not isinstance(t_max, (int, float)):
            raise ValidationFailed("'t_max' must be a number")
        req = PlanRequest(
            iteration=iteration,
            t_max=float(t_max),
            fitness_overrides=body.get("fitness"),
            ga_overrides=body.get("ga"),
        )
        with store.lock(project_id):
            state = store.load(project_id)
            try:
                state = plan_iteration(state, req)
            except TypeError as exc:
                raise ValidationFailed(f"bad override: {exc}") from exc
            store.save(project_id, state)
        return _solution_payload(state, iteration)

    @app.post("/api/v1/projects/{project_id}/iterations/{iteration}/choose")
    async def choose(project_id: str, iteration: int, request: Request):
        body = _parse_body(await request.body())
        if not isinstance(body, dict) or not isinstance(body.get("solution_index"), int):
            raise ValidationFailed("body must be an object with an integer 'solution_index'")
        with store.lock(project_id):
            state = store.load(project_id)
            state = choose_solution(state, iteration, body["solution_index"])
            store.save(project_id, state)
        record = next(it for it in state.iterations if it.index == iteration)
        chosen = record.chosen_solution
        return {
            "iteration": iteration,
            "chosen_index": record.chosen,
            "selected": list(chosen.selected),
            "cycle_hours": chosen.total_hours,
        }

    @app.post("/api/v1/projects/{project_id}/iterations/{iteration}/outcome")
    async def outcome(project_id: str, iteration: int, request: Request):
        body = _parse_body(await request.body())
        if not isinstance(body, dict):
            raise ValidationFailed("body must be a JSON object")
        failed_ids = body.get("failed_ids", [])
        if not isinstance(failed_ids, list) or not all(isinstance(x, str) for x in failed_ids):
            raise ValidationFailed("'failed_ids' must be an array of requirement ids")
        defects = []
        for i, d in enumerate(body.get("new_defects", [])):
            if not isinstance(d, dict) or not isinstance(d.get("id"), str):
                raise ValidationFailed(f"new_defects[{i}] must be an object with a string 'id'")
            defects.append(
                NewDefect(
                    id=d["id"],
                    title=d.get("title", ""),
                    cluster=d.get("cluster", ""),
                    prio_column=tuple(d.get("prio_column", ())),
                    value_column=tuple(d.get("value_column", ())),
                )
            )
        with store.lock(project_id):
            state = store.load(project_id)
            record = next((it for it in state.iterations if it.index == iteration), None)
            if record is None:
                raise NotFound(f"iteration {iteration} does not exist")
            chosen = record.chosen_solution
            implemented = len(chosen.selected) if chosen else 0
            for key in ("actual_hours", "estimated_hours", "user_perception"):
                if key not in body:
                    raise ValidationFailed(f"missing outcome field {key!r}")
                if isinstance(body[key], bool) or not isinstance(body[key], (int, float)):
                    raise ValidationFailed(f"outcome field {key!r} must be a number")
            out = ReleaseOutcome(
                actual_hours=float(body["actual_hours"]),
                estimated_hours=float(body["estimated_hours"]),
                failed_count=int(body.get("failed_count", len(failed_ids))),
                implemented_count=int(body.get("implemented_count", implemented)),
                user_perception=float(body["user_perception"]),
            )
            state = record_outcome(state, iteration, out, failed_ids, defects)
            store.save(project_id, state)
        closed = next(it for it in state.iterations if it.index == iteration)
        nxt = state.open_iteration()
        return {
            "iteration": iteration,
            "ff": closed.outcome_ff,
            "next_iteration": None
            if nxt is None
            else {"index": nxt.index, "candidates": list(nxt.candidates), "ff_applied": nxt.ff_applied},
        }

    @app.get("/api/v1/projects/{project_id}/weights")
    def stakeholder_weights(project_id: str):
        from relplan.weights import compute_lambda

        state = store.load(project_id)
        lam = compute_lambda(state.comparison) if state.comparison.size else []
        return {
            "stakeholders": [s.id for s in state.stakeholders],
            "lambda": [float(x) for x in lam],
        }

    @app.get("/api/v1/projects/{project_id}/timeline")
    def timeline(project_id: str):
        state = store.load(project_id)
        return [
            {
                "index": row.index,
                "candidates": list(row.candidates),
                "planned": row.planned,
                "chosen": None if row.chosen is None else list(row.chosen),
                "cycle_hours": row.cycle_hours,
                "ff_applied": row.ff_applied,
                "outcome_ff": row.outcome_ff,
            }
            for row in project_timeline(state)
        ]

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
