"""Command-line entry point.

Exit codes follow the linter convention: 0 clean, 1 when flagged sites
exist (so CI can gate on findings), 2 for usage or validation problems.
"""

from __future__ import annotations

import json
import os
import sys
from importlib import resources
from pathlib import Path

import click

from . import report as report_mod
from .catalog import CatalogError, load_catalog_file, parse_catalog, validate_catalog
from .minilang import MiniLangError
from .session import (FakeClock, Session, SessionError, SessionStore,
                      load_session, replay_session, save_session)
from .taskspec import TaskSpecError

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


def shipped_catalog_path() -> Path:
    return Path(str(resources.files("errlens").joinpath("data/core.eps")))


def _default_store() -> str:
    return os.environ.get(
        "ERRLENS_STORE",
        os.path.join(os.path.expanduser("~"), ".errlens", "sessions"))


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(EXIT_USAGE)


def _load_answer_entries(path: str) -> list[dict]:
    obj = json.loads(Path(path).read_text())
    entries = obj.get("answers", obj) if isinstance(obj, dict) else obj
    if not isinstance(entries, list):
        raise ValueError("answers file must hold a list of "
                         "{question_id, answer} objects")
    return entries


def _apply_answers(session: Session, entries: list[dict]) -> None:
    """Batch-apply an answers file: pending questions get a transcript
    entry; ids that are not currently pending are recorded directly so
    they still feed evaluation."""
    for entry in entries:
        qid = entry["question_id"]
        answer = entry["answer"]
        try:
            session.submit_answer(qid, answer,
                                  overwrite=bool(entry.get("overwrite")))
        except SessionError as e:
            if e.code != "unknown_question":
                raise
            session.answers[qid] = answer
            session.recompute()


def _resolve_site(session: Session, ref: str) -> str:
    """Accept a stable site key or a rank reference like S2."""
    if session.site(ref) is not None:
        return ref
    if len(ref) > 1 and ref[0] in "sS" and ref[1:].isdigit():
        idx = int(ref[1:]) - 1
        if 0 <= idx < len(session.sites):
            return session.sites[idx].key
    raise SessionError("unknown_site", f"no site {ref!r}")


@click.group()
def main() -> None:
    """Inspection toolkit: rule-driven review targeting for small programs."""


@main.command()
@click.argument("program", type=click.Path(exists=True, dir_okay=False))
@click.option("--task", "task_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Task document (JSON) with goals, sample data, trailer.")
@click.option("--catalog", "catalog_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Rule catalog (.eps); defaults to the shipped one.")
@click.option("--answers", "answers_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON answers file mirroring the API answer body.")
@click.option("--format", "fmt", default="text",
              type=click.Choice(["text", "structured"]))
@click.option("--figures-dir", default=None, type=click.Path(file_okay=False),
              help="Also write report files, CSV tables and figures here.")
@click.option("--timestamps", is_flag=True, default=False,
              help="Include the session start stamp in the report.")
def analyze(program, task_path, catalog_path, answers_path, fmt, figures_dir,
            timestamps) -> None:
    """One-shot batch analysis: parse, extract, match, rank, report."""
    catalog_path = catalog_path or str(shipped_catalog_path())
    try:
        session = Session.from_paths(program, task_path, catalog_path,
                                     clock=FakeClock(), session_id="batch")
        if answers_path:
            _apply_answers(session, _load_answer_entries(answers_path))
    except (MiniLangError, TaskSpecError, CatalogError, SessionError,
            ValueError, OSError, KeyError) as e:
        raise _fail(str(e))
    click.echo(report_mod.generate_report(session, fmt,
                                          include_timestamps=timestamps),
               nl=False)
    if figures_dir:
        for path in report_mod.write_report_files(
                session, figures_dir, fmt, include_timestamps=timestamps):
            click.echo(f"wrote {path}", err=True)
    sys.exit(EXIT_FINDINGS if session.flagged_sites() else EXIT_CLEAN)


@main.group()
def catalog() -> None:
    """Catalog tooling: validation and listing."""


@catalog.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def catalog_validate(path) -> None:
    try:
        load_catalog_file(path)
    except CatalogError as e:
        for d in e.diagnostics:
            click.echo(f"{path}:{d}", err=True)
        sys.exit(EXIT_USAGE)
    click.echo("ok")


@catalog.command("list")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def catalog_list(path) -> None:
    try:
        cat = load_catalog_file(path)
    except CatalogError as e:
        for d in e.diagnostics:
            click.echo(f"{path}:{d}", err=True)
        sys.exit(EXIT_USAGE)
    click.echo(f"catalog version {cat.version}")
    for m in cat.modes:
        click.echo(f"mode {m.id}: {m.title}")
    for s in cat.scenarios:
        click.echo(f"eps {s.id} (mode {s.mode_id}, severity {s.severity}, "
                   f"{s.then_clause.tendency})")


@main.group()
def session() -> None:
    """Interactive session management backed by the session store."""


_store_option = click.option("--store", "store_dir", default=None,
                             help="Session store directory "
                                  "(default: ERRLENS_STORE or ~/.errlens/sessions).")


@session.command("start")
@click.argument("program", type=click.Path(exists=True, dir_okay=False))
@click.option("--task", "task_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", "catalog_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--id", "session_id", default=None,
              help="Session id (generated when omitted).")
@_store_option
def session_start(program, task_path, catalog_path, session_id, store_dir) -> None:
    catalog_path = catalog_path or str(shipped_catalog_path())
    store = SessionStore(store_dir or _default_store())
    try:
        s = Session.from_paths(program, task_path, catalog_path,
                               session_id=session_id)
        if store.exists(s.id):
            raise SessionError("conflict", f"session {s.id!r} already exists")
        store.save(s)
    except (MiniLangError, TaskSpecError, CatalogError, SessionError,
            ValueError, OSError) as e:
        raise _fail(str(e))
    click.echo(f"session {s.id}")
    click.echo(f"sites: {len(s.sites)} "
               f"({len(s.flagged_sites())} flagged, "
               f"{len(s.pending_questions())} open questions)")
    for i, site in enumerate(s.sites, start=1):
        click.echo(f"S{i}. [{site.status}] {site.key}")


def _open_session(store_dir, session_id) -> tuple[SessionStore, Session]:
    store = SessionStore(store_dir or _default_store())
    return store, store.load(session_id)


@session.command("answer")
@click.argument("session_id")
@click.argument("question_id")
@click.argument("answer", required=False,
                type=click.Choice(["yes", "no", "unknown"]))
@click.option("--overwrite", is_flag=True, default=False)
@_store_option
def session_answer(session_id, question_id, answer, overwrite, store_dir) -> None:
    try:
        store, s = _open_session(store_dir, session_id)
        if answer is None:
            if not sys.stdin.isatty():
                raise _fail("no answer given and stdin is not a terminal")
            question = next((q for q in s.pending_questions()
                             if q.id == question_id), None)
            if question is not None:
                click.echo(question.text)
            answer = click.prompt("answer",
                                  type=click.Choice(["yes", "no", "unknown"]))
        s.submit_answer(question_id, answer, overwrite=overwrite)
        store.save(s)
    except (SessionError, OSError) as e:
        raise _fail(str(e))
    click.echo(f"recorded {answer!r} for {question_id}")
    for i, site in enumerate(s.sites, start=1):
        click.echo(f"S{i}. [{site.status}] {site.key}")


@session.command("defect")
@click.argument("session_id")
@click.argument("description")
@click.option("--site", "site_ref", default=None,
              help="Link to a site by key or rank reference (S1, S2, ...).")
@_store_option
def session_defect(session_id, description, site_ref, store_dir) -> None:
    try:
        store, s = _open_session(store_dir, session_id)
        key = _resolve_site(s, site_ref) if site_ref else None
        record = s.log_defect(description, key)
        store.save(s)
    except (SessionError, OSError) as e:
        raise _fail(str(e))
    mark = "targeted" if record.targeted else "other"
    click.echo(f"{record.id} [{mark}] at {record.minutes_from_start:g} min")


@session.command("dismiss")
@click.argument("session_id")
@click.argument("site_ref")
@_store_option
def session_dismiss(session_id, site_ref, store_dir) -> None:
    try:
        store, s = _open_session(store_dir, session_id)
        key = _resolve_site(s, site_ref)
        s.dismiss(key)
        store.save(s)
    except (SessionError, OSError) as e:
        raise _fail(str(e))
    click.echo(f"dismissed {key}")


@session.command("report")
@click.argument("session_id")
@click.option("--format", "fmt", default="text",
              type=click.Choice(["text", "structured"]))
@click.option("--figures-dir", default=None, type=click.Path(file_okay=False))
@click.option("--timestamps", is_flag=True, default=False)
@_store_option
def session_report(session_id, fmt, figures_dir, timestamps, store_dir) -> None:
    try:
        _store, s = _open_session(store_dir, session_id)
    except (SessionError, OSError) as e:
        raise _fail(str(e))
    click.echo(report_mod.generate_report(s, fmt, include_timestamps=timestamps),
               nl=False)
    if figures_dir:
        for path in report_mod.write_report_files(
                s, figures_dir, fmt, include_timestamps=timestamps):
            click.echo(f"wrote {path}", err=True)


@session.command("replay")
@click.argument("program", type=click.Path(exists=True, dir_okay=False))
@click.argument("script", type=click.Path(exists=True, dir_okay=False))
@click.option("--task", "task_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", "catalog_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", default="text",
              type=click.Choice(["text", "structured"]))
@click.option("--save", "save_path", default=None,
              type=click.Path(dir_okay=False),
              help="Also persist the replayed session here.")
def session_replay(program, script, task_path, catalog_path, fmt, save_path) -> None:
    """Re-run a recorded walkthrough deterministically and print its report."""
    catalog_path = catalog_path or str(shipped_catalog_path())
    try:
        steps = json.loads(Path(script).read_text())
        s = replay_session(program, task_path, catalog_path, steps)
        if save_path:
            save_session(s, save_path)
    except (MiniLangError, TaskSpecError, CatalogError, SessionError,
            ValueError, OSError, KeyError) as e:
        raise _fail(str(e))
    click.echo(report_mod.generate_report(s, fmt), nl=False)


@session.command("resume")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", default="text",
              type=click.Choice(["text", "structured"]))
def session_resume(path, fmt) -> None:
    """Load a persisted session file and print its report."""
    try:
        s = load_session(path)
    except (SessionError, OSError, ValueError) as e:
        raise _fail(str(e))
    click.echo(report_mod.generate_report(s, fmt), nl=False)


@main.command()
@click.option("--addr", default=None,
              help="host:port to bind (default: ERRLENS_ADDR or 127.0.0.1:8765).")
@click.option("--store", "store_dir", default=None)
@click.option("--static-dir", default=None, type=click.Path(file_okay=False),
              help="Serve a built UI from this directory under /ui.")
def serve(addr, store_dir, static_dir) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .api import create_app

    addr = addr or os.environ.get("ERRLENS_ADDR", "127.0.0.1:8765")
    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise _fail(f"--addr must look like host:port, got {addr!r}")
    store = SessionStore(store_dir or _default_store())
    app = create_app(store, static_dir=static_dir)
    uvicorn.run(app, host=host, port=int(port_text))


if __name__ == "__main__":
    main()
