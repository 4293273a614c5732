"""Stateful inspection session: inputs, answers, defects, persistence.

A session owns the three inputs (program, task, catalog), recomputes the
ranked site list after every mutation (sites are never stored stale), and
timestamps defect finds in minutes from session start. Timing uses an
injectable clock; the default combines wall time (for the start stamp)
with a monotonic source (for durations), so system clock jumps cannot
produce negative or shrinking defect times.

The persisted form is canonical JSON (sorted keys, fixed indentation), so
identical sessions serialize to identical bytes. Loading re-verifies the
input hashes against disk when the inputs came from files, refuses files
written by a different format version, and recomputes the site list to
check it against the stored one.
"""

from __future__ import annotations

import hashlib
import json
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from . import matcher
from .catalog import Catalog, parse_catalog
from .facts import FactSet, extract_facts
from .minilang import Program, parse_program
from .taskspec import TaskSpec, load_taskspec

FORMAT_VERSION = "1"


class SessionError(Exception):
    """Session-level failure with a stable machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class Clock:
    """Time source: epoch seconds for stamps, monotonic seconds for spans."""

    def now(self) -> float:
        raise NotImplementedError

    def monotonic(self) -> float:
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> float:
        return time.time()

    def monotonic(self) -> float:
        return time.monotonic()


class FakeClock(Clock):
    """Deterministic clock for tests and replays."""

    def __init__(self, start: float = 1_000_000_000.0):
        self._now = start
        self._mono = 0.0

    def advance_minutes(self, minutes: float) -> None:
        self._now += minutes * 60.0
        self._mono += minutes * 60.0

    def advance_to_minutes(self, minutes: float) -> None:
        if minutes * 60.0 > self._mono:
            delta = minutes * 60.0 - self._mono
            self._now += delta
            self._mono = minutes * 60.0

    def now(self) -> float:
        return self._now

    def monotonic(self) -> float:
        return self._mono


@dataclass
class DefectRecord:
    id: str
    description: str
    minutes_from_start: float
    linked_site: str | None = None
    targeted: bool = False

    def to_json(self) -> dict:
        return {"id": self.id, "description": self.description,
                "minutes_from_start": self.minutes_from_start,
                "linked_site": self.linked_site, "targeted": self.targeted}

    @staticmethod
    def from_json(obj: dict) -> "DefectRecord":
        return DefectRecord(obj["id"], obj["description"],
                            float(obj["minutes_from_start"]),
                            obj.get("linked_site"), bool(obj.get("targeted")))


@dataclass
class TimingMetrics:
    targeted_minutes: dict[str, float] = field(default_factory=dict)
    mean_other_minutes: float | None = None
    targeted_count: int = 0
    other_count: int = 0

    def to_json(self) -> dict:
        return {"targeted_minutes": dict(self.targeted_minutes),
                "mean_other_minutes": self.mean_other_minutes,
                "targeted_count": self.targeted_count,
                "other_count": self.other_count}


def compute_timing_metrics(records: list[DefectRecord]) -> TimingMetrics:
    """Split by targeted flag; mean of the others, absent when none."""
    targeted = {r.id: r.minutes_from_start for r in records if r.targeted}
    others = [r.minutes_from_start for r in records if not r.targeted]
    mean = sum(others) / len(others) if others else None
    return TimingMetrics(targeted, mean, len(targeted), len(others))


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class _Input:
    text: str
    path: str | None
    sha256: str

    def to_json(self) -> dict:
        return {"text": self.text, "path": self.path, "sha256": self.sha256}


class Session:
    def __init__(self, session_id: str, program: _Input, task: _Input,
                 catalog: _Input, clock: Clock | None = None,
                 started_at: float | None = None,
                 elapsed_minutes: float = 0.0):
        self.id = session_id
        self.clock = clock or SystemClock()
        self.inputs = {"program": program, "task": task, "catalog": catalog}
        self.started_at = self.clock.now() if started_at is None else started_at
        self._mono_anchor = self.clock.monotonic()
        self._elapsed_base = elapsed_minutes
        self.answers: dict[str, str] = {}
        self.answer_log: list[dict] = []
        self.dismissals: list[str] = []
        self.defects: list[DefectRecord] = []

        # parse eagerly so structural problems surface at creation time
        self.program: Program = parse_program(program.text, program.path)
        self.task: TaskSpec = load_taskspec(json.loads(task.text), task.path)
        self.catalog: Catalog = parse_catalog(catalog.text)
        self.facts: FactSet = extract_facts(self.program, self.task)
        self.sites: list[matcher.Site] = []
        self.recompute()

    # -- construction ------------------------------------------------------

    @staticmethod
    def create(program_text: str, task_text: str, catalog_text: str, *,
               program_path: str | None = None, task_path: str | None = None,
               catalog_path: str | None = None, clock: Clock | None = None,
               session_id: str | None = None) -> "Session":
        return Session(
            session_id or f"s-{uuid.uuid4().hex[:12]}",
            _Input(program_text, program_path, _sha256(program_text)),
            _Input(task_text, task_path, _sha256(task_text)),
            _Input(catalog_text, catalog_path, _sha256(catalog_text)),
            clock=clock,
        )

    @staticmethod
    def from_paths(program_path: str, task_path: str, catalog_path: str, *,
                   clock: Clock | None = None,
                   session_id: str | None = None) -> "Session":
        return Session.create(
            Path(program_path).read_text(), Path(task_path).read_text(),
            Path(catalog_path).read_text(),
            program_path=str(program_path), task_path=str(task_path),
            catalog_path=str(catalog_path), clock=clock, session_id=session_id,
        )

    # -- state -------------------------------------------------------------

    def recompute(self) -> None:
        sites = matcher.match_all(self.catalog, self.facts, self.task, self.answers)
        matcher.apply_dismissals(sites, set(self.dismissals))
        self.sites = matcher.rank_sites(sites)

    def elapsed_minutes(self) -> float:
        delta = (self.clock.monotonic() - self._mono_anchor) / 60.0
        return self._elapsed_base + max(delta, 0.0)

    def pending_questions(self) -> list[matcher.Question]:
        return matcher.pending_questions(self.sites)

    def site(self, key: str) -> matcher.Site | None:
        for s in self.sites:
            if s.key == key:
                return s
        return None

    def flagged_sites(self) -> list[matcher.Site]:
        return [s for s in self.sites if s.flagged]

    # -- mutations ---------------------------------------------------------

    def submit_answer(self, question_id: str, answer: str,
                      overwrite: bool = False) -> None:
        if answer not in matcher.ANSWER_VALUES:
            raise SessionError(
                "invalid_answer",
                f"answer must be one of {'/'.join(matcher.ANSWER_VALUES)}, "
                f"got {answer!r}")
        if question_id in self.answers:
            if self.answers[question_id] == answer:
                return  # idempotent resubmission
            if not overwrite:
                raise SessionError(
                    "conflict",
                    f"question {question_id!r} already answered "
                    f"{self.answers[question_id]!r}; pass overwrite to change it")
            text = self._question_text(question_id)
        else:
            pending = {q.id: q for q in self.pending_questions()}
            if question_id not in pending:
                raise SessionError("unknown_question",
                                   f"no pending question {question_id!r}")
            text = pending[question_id].text
        self.answers[question_id] = answer
        self.answer_log.append({
            "question_id": question_id, "answer": answer, "text": text,
            "minutes_from_start": self.elapsed_minutes(),
        })
        self.recompute()

    def _question_text(self, question_id: str) -> str:
        for entry in reversed(self.answer_log):
            if entry["question_id"] == question_id:
                return entry["text"]
        for q in self.pending_questions():
            if q.id == question_id:
                return q.text
        return ""

    def dismiss(self, site_key: str) -> None:
        if self.site(site_key) is None:
            raise SessionError("unknown_site", f"no site {site_key!r}")
        if site_key not in self.dismissals:
            self.dismissals.append(site_key)
            self.recompute()

    def log_defect(self, description: str,
                   site_key: str | None = None) -> DefectRecord:
        if not description.strip():
            raise SessionError("invalid_defect", "defect description is empty")
        targeted = False
        if site_key is not None:
            site = self.site(site_key)
            if site is None:
                raise SessionError("unknown_site", f"no site {site_key!r}")
            targeted = site.flagged
        minutes = self.elapsed_minutes()
        if self.defects:
            minutes = max(minutes, self.defects[-1].minutes_from_start)
        record = DefectRecord(f"d{len(self.defects) + 1}", description.strip(),
                              minutes, site_key, targeted)
        self.defects.append(record)
        return record

    def timing_metrics(self) -> TimingMetrics:
        return compute_timing_metrics(self.defects)

    # -- persistence -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "id": self.id,
            "started_at": self.started_at,
            "elapsed_minutes": self.elapsed_minutes(),
            "inputs": {k: v.to_json() for k, v in self.inputs.items()},
            "answers": [[k, v] for k, v in self.answers.items()],
            "answer_log": list(self.answer_log),
            "dismissals": list(self.dismissals),
            "defects": [d.to_json() for d in self.defects],
            "sites": [s.to_json() for s in self.sites],
        }

    def source_payload(self) -> dict:
        return {
            "path": self.inputs["program"].path,
            "text": self.inputs["program"].text,
            "anchors": {a: sp.to_json()
                        for a, sp in self.program.source_map().items()},
        }


def canonical_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def save_session(session: Session, path: str | Path) -> None:
    Path(path).write_text(canonical_json(session.to_json()))


def load_session(path: str | Path, clock: Clock | None = None) -> Session:
    """Rehydrate a session; refuses stale or foreign files.

    Checks, in order: format version, input hashes against the files on
    disk (when the inputs were file-backed), and that the stored site
    list matches a from-scratch recomputation.
    """
    obj = json.loads(Path(path).read_text())
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise SessionError(
            "version_mismatch",
            f"session file has format version {version!r}, "
            f"this build reads {FORMAT_VERSION!r}")
    inputs: dict[str, _Input] = {}
    for name in ("program", "task", "catalog"):
        raw = obj["inputs"][name]
        inp = _Input(raw["text"], raw.get("path"), raw["sha256"])
        if inp.path is not None and Path(inp.path).exists():
            on_disk = Path(inp.path).read_text()
            if _sha256(on_disk) != inp.sha256:
                raise SessionError(
                    "hash_mismatch",
                    f"{name} file {inp.path!r} changed since the session "
                    f"was saved")
        inputs[name] = inp
    session = Session(obj["id"], inputs["program"], inputs["task"],
                      inputs["catalog"], clock=clock,
                      started_at=obj["started_at"],
                      elapsed_minutes=float(obj.get("elapsed_minutes", 0.0)))
    session.answers = {k: v for k, v in obj.get("answers", [])}
    session.answer_log = list(obj.get("answer_log", []))
    session.dismissals = list(obj.get("dismissals", []))
    session.defects = [DefectRecord.from_json(d) for d in obj.get("defects", [])]
    session.recompute()
    stored = obj.get("sites", [])
    recomputed = [s.to_json() for s in session.sites]
    if stored != recomputed:
        raise SessionError(
            "state_mismatch",
            "stored site list does not match recomputation; refusing to "
            "resume from inconsistent state")
    return session


class SessionStore:
    """Directory of persisted sessions, one canonical JSON file each."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, session_id: str) -> Path:
        return self.root / f"{session_id}.json"

    def save(self, session: Session) -> Path:
        p = self.path_for(session.id)
        save_session(session, p)
        return p

    def load(self, session_id: str, clock: Clock | None = None) -> Session:
        p = self.path_for(session_id)
        if not p.exists():
            raise SessionError("unknown_session", f"no session {session_id!r}")
        return load_session(p, clock=clock)

    def exists(self, session_id: str) -> bool:
        return self.path_for(session_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))


def replay_session(program_path: str, task_path: str, catalog_path: str,
                   script: dict, *, session_id: str = "replay",
                   clock: FakeClock | None = None) -> Session:
    """Re-run a recorded walkthrough deterministically.

    The script is {"steps": [...]} where each step is one of
      {"do": "answer",  "question_id": q, "answer": a, "overwrite"?: bool}
      {"do": "defect",  "description": text, "site"?: key}
      {"do": "dismiss", "site": key}
    with an optional "at_minutes" moving the injected clock forward.
    """
    clock = clock or FakeClock()
    session = Session.from_paths(program_path, task_path, catalog_path,
                                 clock=clock, session_id=session_id)
    for step in script.get("steps", []):
        if "at_minutes" in step:
            clock.advance_to_minutes(float(step["at_minutes"]))
        kind = step.get("do")
        if kind == "answer":
            session.submit_answer(step["question_id"], step["answer"],
                                  overwrite=bool(step.get("overwrite")))
        elif kind == "defect":
            session.log_defect(step["description"], step.get("site"))
        elif kind == "dismiss":
            session.dismiss(step["site"])
        else:
            raise SessionError("invalid_step",
                               f"replay step kind {kind!r} not recognized")
    return session
