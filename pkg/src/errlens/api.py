"""HTTP facade over inspection sessions.

Every JSON response is wrapped in an envelope:

    {"status": "ok", "payload": ...}
    {"status": "error", "error": {"code": ..., "message": ...}}

except the report endpoint, which returns the report document itself so
its bytes match the CLI output for the same session. Mutations on one
session are serialized behind a per-session lock and persisted to the
store before the response goes out; distinct sessions proceed
concurrently.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from . import report as report_mod
from .catalog import CatalogError
from .minilang import MiniLangError
from .session import Clock, Session, SessionError, SessionStore, canonical_json
from .taskspec import TaskSpecError

_HTTP_BY_CODE = {
    "unknown_session": 404,
    "unknown_question": 404,
    "unknown_site": 404,
    "conflict": 409,
}


def _ok(payload, status_code: int = 200) -> JSONResponse:
    return JSONResponse({"status": "ok", "payload": payload},
                        status_code=status_code)


def _err(code: str, message: str, status_code: int) -> JSONResponse:
    return JSONResponse({"status": "error",
                         "error": {"code": code, "message": message}},
                        status_code=status_code)


def session_view(s: Session) -> dict:
    return {
        "id": s.id,
        "started_at": s.started_at,
        "catalog_version": s.catalog.version,
        "inputs": {name: {"path": inp.path, "sha256": inp.sha256}
                   for name, inp in s.inputs.items()},
        "sites": [site.to_json() for site in s.sites],
        "questions": [q.to_json() for q in s.pending_questions()],
        "answers": [[k, v] for k, v in s.answers.items()],
        "dismissals": list(s.dismissals),
        "defects": [d.to_json() for d in s.defects],
        "timing": s.timing_metrics().to_json(),
    }


def create_app(store: SessionStore, clock: Clock | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="errlens", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.clock = clock
    app.state.sessions: dict[str, Session] = {}
    app.state.locks: dict[str, threading.Lock] = {}
    app.state.guard = threading.Lock()

    def lock_for(session_id: str) -> threading.Lock:
        with app.state.guard:
            return app.state.locks.setdefault(session_id, threading.Lock())

    def get_session(session_id: str) -> Session:
        with app.state.guard:
            cached = app.state.sessions.get(session_id)
        if cached is not None:
            return cached
        loaded = store.load(session_id, clock=app.state.clock)
        with app.state.guard:
            return app.state.sessions.setdefault(session_id, loaded)

    @app.exception_handler(SessionError)
    async def on_session_error(_req: Request, exc: SessionError):
        return _err(exc.code, exc.message, _HTTP_BY_CODE.get(exc.code, 422))

    @app.exception_handler(CatalogError)
    async def on_catalog_error(_req: Request, exc: CatalogError):
        return _err("catalog_invalid",
                    "; ".join(str(d) for d in exc.diagnostics), 422)

    @app.exception_handler(MiniLangError)
    async def on_minilang_error(_req: Request, exc: MiniLangError):
        return _err("program_invalid", str(exc), 422)

    @app.exception_handler(TaskSpecError)
    async def on_taskspec_error(_req: Request, exc: TaskSpecError):
        return _err("task_invalid", "; ".join(exc.diagnostics), 422)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_req: Request, exc: RequestValidationError):
        return _err("bad_request", str(exc), 422)

    def _resolve_input(body: dict, name: str) -> tuple[str, str | None]:
        inline = body.get(name)
        path = body.get(f"{name}_path")
        if inline is not None:
            if isinstance(inline, (dict, list)):
                inline = canonical_json(inline)
            return str(inline), path
        if path is not None:
            p = Path(path)
            if not p.exists():
                raise SessionError("invalid_input", f"{name} file {path!r} not found")
            return p.read_text(), str(p)
        raise SessionError("invalid_input",
                           f"request needs {name!r} or {name}_path")

    @app.post("/sessions")
    async def create_session(body: dict):
        program, program_path = _resolve_input(body, "program")
        task, task_path = _resolve_input(body, "task")
        catalog, catalog_path = _resolve_input(body, "catalog")
        session = Session.create(
            program, task, catalog,
            program_path=program_path, task_path=task_path,
            catalog_path=catalog_path, clock=app.state.clock,
            session_id=body.get("session_id"),
        )
        if store.exists(session.id):
            raise SessionError("conflict", f"session {session.id!r} already exists")
        with lock_for(session.id):
            store.save(session)
            with app.state.guard:
                app.state.sessions[session.id] = session
        return _ok(session_view(session), status_code=201)

    @app.get("/sessions/{session_id}")
    async def get_session_view(session_id: str):
        return _ok(session_view(get_session(session_id)))

    @app.get("/sessions/{session_id}/sites")
    async def get_sites(session_id: str):
        s = get_session(session_id)
        return _ok([site.to_json() for site in s.sites])

    @app.get("/sessions/{session_id}/questions")
    async def get_questions(session_id: str):
        s = get_session(session_id)
        return _ok([q.to_json() for q in s.pending_questions()])

    @app.post("/sessions/{session_id}/answers")
    async def post_answer(session_id: str, body: dict):
        s = get_session(session_id)
        with lock_for(session_id):
            s.submit_answer(str(body.get("question_id")),
                            str(body.get("answer")),
                            overwrite=bool(body.get("overwrite")))
            store.save(s)
            return _ok({
                "sites": [site.to_json() for site in s.sites],
                "questions": [q.to_json() for q in s.pending_questions()],
            })

    @app.post("/sessions/{session_id}/dismissals")
    async def post_dismissal(session_id: str, body: dict):
        s = get_session(session_id)
        with lock_for(session_id):
            s.dismiss(str(body.get("site")))
            store.save(s)
            return _ok({"sites": [site.to_json() for site in s.sites]})

    @app.post("/sessions/{session_id}/defects")
    async def post_defect(session_id: str, body: dict):
        s = get_session(session_id)
        with lock_for(session_id):
            record = s.log_defect(str(body.get("description") or ""),
                                  body.get("site"))
            store.save(s)
            return _ok({"defect": record.to_json(),
                        "timing": s.timing_metrics().to_json()})

    @app.get("/sessions/{session_id}/report")
    async def get_report(session_id: str, format: str = "text",
                         timestamps: bool = False):
        s = get_session(session_id)
        if format not in ("text", "structured"):
            return _err("bad_request",
                        f"format must be text or structured, got {format!r}", 422)
        content = report_mod.generate_report(s, format,
                                             include_timestamps=timestamps)
        if format == "text":
            return PlainTextResponse(content)
        return Response(content, media_type="application/json")

    @app.get("/sessions/{session_id}/source")
    async def get_source(session_id: str):
        return _ok(get_session(session_id).source_payload())

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")

    return app
