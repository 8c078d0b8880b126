"""HTTP face of the engine, consumed by the architect console.

Projects live as directories under one root; every endpoint resolves
its project id to such a directory and calls the same workflow
operations as the CLI, so a session driven over HTTP writes the same
files as one driven from the shell.

Mutations are serialized per project with an asyncio lock and announce
themselves to event-stream subscribers, who receive every new ledger
entry in order.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import Any, Literal

from fastapi import FastAPI, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from . import workflow
from .config import Config
from .errors import CoarchError
from .model import ArchitectureStory, DiagramKind, canonical_json
from .project import ProjectStore
from .prompts import PromptRegistry

KEEPALIVE_SECONDS = 15.0


class ProjectBody(BaseModel):
    id: str = Field(min_length=1, max_length=64, pattern=r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class SketchBody(BaseModel):
    title: str
    description: str = ""


class StoryBody(BaseModel):
    schema_version: str = "1"
    id: str
    narrative: str
    scenarios: list[SketchBody] = []
    domain_tags: list[str] = []


class TurnBody(BaseModel):
    activity: Literal["analysis", "freeform"]
    content: str = ""


class RefinementBody(BaseModel):
    op: str
    target: str | None = None
    payload: dict[str, Any] = {}


class AcceptBody(BaseModel):
    ids: list[str] = Field(min_length=1)


class SynthesizeBody(BaseModel):
    diagram_kind: Literal["class_diagram", "component_diagram"]


class ScenariosBody(BaseModel):
    focus: str | None = None


class _Projects:
    """Project directory access plus per-project mutation serialization."""

    def __init__(self, root: Path, config: Config) -> None:
        self.root = Path(root)
        self.config = config
        self.registry: PromptRegistry = workflow.registry_for(config)
        self._locks: dict[str, asyncio.Lock] = {}
        self._changed: dict[str, asyncio.Condition] = {}

    def lock(self, project_id: str) -> asyncio.Lock:
        return self._locks.setdefault(project_id, asyncio.Lock())

    def changed(self, project_id: str) -> asyncio.Condition:
        return self._changed.setdefault(project_id, asyncio.Condition())

    def open(self, project_id: str) -> ProjectStore:
        return ProjectStore.open(self.root / project_id)

    def backend(self, store: ProjectStore):
        return workflow.resolve_backend(
            self.config.backend, self.config, search_dir=self.root, store=store
        )

    async def notify(self, project_id: str) -> None:
        condition = self.changed(project_id)
        async with condition:
            condition.notify_all()


def create_app(
    root: Path,
    config: Config | None = None,
    static_dir: Path | None = None,
) -> FastAPI:
    projects = _Projects(Path(root), config or Config())
    app = FastAPI(title="coarch", docs_url=None, redoc_url=None)

    @app.exception_handler(CoarchError)
    async def engine_error(request: Request, exc: CoarchError) -> JSONResponse:
        return JSONResponse(exc.as_payload(), status_code=exc.http_status)

    @app.exception_handler(RequestValidationError)
    async def bad_body(request: Request, exc: RequestValidationError) -> JSONResponse:
        payload = {
            "code": "schema_violation",
            "message": "request does not match the endpoint schema",
            "detail": {"errors": jsonable_encoder(exc.errors())},
        }
        return JSONResponse(payload, status_code=400)

    @app.post("/projects", status_code=201)
    async def create_project(body: ProjectBody) -> dict[str, Any]:
        async with projects.lock(body.id):
            store = ProjectStore.create(projects.root / body.id, body.id)
        return {**workflow.status_payload(store), "seq": len(store.entries)}

    @app.get("/projects/{project_id}")
    async def project_status(project_id: str) -> dict[str, Any]:
        return workflow.status_payload(projects.open(project_id))

    @app.get("/projects/{project_id}/story")
    async def current_story(project_id: str) -> dict[str, Any]:
        return workflow.story_payload(projects.open(project_id))

    @app.post("/projects/{project_id}/story")
    async def import_story(project_id: str, body: StoryBody) -> dict[str, Any]:
        story = ArchitectureStory.from_dict(body.model_dump())
        async with projects.lock(project_id):
            store = projects.open(project_id)
            payload = workflow.import_story(store, story)
        await projects.notify(project_id)
        return payload

    @app.post("/projects/{project_id}/turns")
    async def submit_turn(project_id: str, body: TurnBody) -> dict[str, Any]:
        async with projects.lock(project_id):
            store = projects.open(project_id)
            backend = projects.backend(store)
            if body.activity == "analysis":
                payload = workflow.run_analysis(store, backend, projects.registry)
                payload["turns"] = workflow.transcript_turns(
                    store, payload["transcript"]
                )
            else:
                payload = workflow.run_freeform(
                    store, body.content, backend, projects.registry
                )
        await projects.notify(project_id)
        return payload

    @app.get("/projects/{project_id}/asrs")
    async def list_asrs(project_id: str) -> dict[str, Any]:
        return workflow.asr_listing(projects.open(project_id))

    @app.get("/projects/{project_id}/transcripts")
    async def list_transcripts(project_id: str) -> dict[str, Any]:
        return workflow.transcript_listing(projects.open(project_id))

    @app.post("/projects/{project_id}/refinements")
    async def refine(project_id: str, body: RefinementBody) -> dict[str, Any]:
        async with projects.lock(project_id):
            store = projects.open(project_id)
            payload = workflow.apply_refinement(store, body.model_dump())
        await projects.notify(project_id)
        return payload

    @app.post("/projects/{project_id}/accept")
    async def accept(project_id: str, body: AcceptBody) -> dict[str, Any]:
        async with projects.lock(project_id):
            store = projects.open(project_id)
            payload = workflow.accept_requirements(store, body.ids)
        await projects.notify(project_id)
        return payload

    @app.post("/projects/{project_id}/synthesize")
    async def synthesize(project_id: str, body: SynthesizeBody) -> dict[str, Any]:
        async with projects.lock(project_id):
            store = projects.open(project_id)
            backend = projects.backend(store)
            payload = workflow.run_synthesis(
                store, DiagramKind(body.diagram_kind), backend, projects.registry
            )
        await projects.notify(project_id)
        return payload

    @app.get("/projects/{project_id}/models/{revision_id}")
    async def model_revision(project_id: str, revision_id: str) -> dict[str, Any]:
        revision = projects.open(project_id).model_revision(revision_id)
        # The parsed structure rides along so clients never reparse the
        # script; the parser here stays the single authority.
        return {
            "id": revision.id,
            "diagram_kind": revision.diagram_kind.value,
            "script": revision.script,
            "graph": revision.graph().to_dict(),
        }

    @app.get("/projects/{project_id}/checks/{pattern}/{element}")
    async def run_check(project_id: str, pattern: str, element: str) -> dict[str, Any]:
        return workflow.run_check(projects.open(project_id), pattern, element)

    @app.get("/projects/{project_id}/trace")
    async def trace(project_id: str) -> dict[str, Any]:
        return workflow.trace_matrix(projects.open(project_id))

    @app.get("/projects/{project_id}/scenarios")
    async def list_scenarios(project_id: str) -> dict[str, Any]:
        return workflow.scenario_listing(projects.open(project_id))

    @app.post("/projects/{project_id}/scenarios")
    async def scenarios(project_id: str, body: ScenariosBody) -> dict[str, Any]:
        async with projects.lock(project_id):
            store = projects.open(project_id)
            backend = projects.backend(store)
            payload = workflow.run_scenarios(
                store, backend, projects.registry, focus=body.focus
            )
        await projects.notify(project_id)
        return payload

    @app.post("/projects/{project_id}/evaluate")
    async def evaluate(project_id: str) -> dict[str, Any]:
        async with projects.lock(project_id):
            store = projects.open(project_id)
            payload = workflow.run_evaluation(store)
        await projects.notify(project_id)
        return payload

    @app.get("/projects/{project_id}/report")
    async def report(project_id: str) -> dict[str, Any]:
        return workflow.latest_report(projects.open(project_id))

    @app.get("/projects/{project_id}/ledger")
    async def ledger(project_id: str) -> list[dict[str, Any]]:
        return workflow.ledger_payload(projects.open(project_id))

    @app.get("/projects/{project_id}/events")
    async def events(
        project_id: str, request: Request, since: int | None = None
    ) -> StreamingResponse:
        store = projects.open(project_id)
        start = len(store.entries) if since is None else since

        async def stream():
            cursor = start
            condition = projects.changed(project_id)
            while not await request.is_disconnected():
                entries = workflow.ledger_payload(projects.open(project_id))
                while cursor < len(entries):
                    entry = entries[cursor]
                    cursor += 1
                    yield (
                        f"id: {entry['seq']}\n"
                        "event: ledger\n"
                        f"data: {canonical_json(entry)}\n\n"
                    )
                async with condition:
                    try:
                        await asyncio.wait_for(
                            condition.wait(), timeout=KEEPALIVE_SECONDS
                        )
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app
