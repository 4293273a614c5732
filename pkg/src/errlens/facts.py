"""Ground facts extracted from a parsed program and its task specification.

Facts are the machine-decidable half of scenario identification: each one
is a named tuple of string bindings plus the evidence (source spans or a
task-spec path) that produced it. The FactSet also carries the context
tables (sample-data blocks, goal table, classified expression forms) that
rule evaluation needs, so a FactSet is self-contained for matching and can
be produced by external frontends via the JSON fact-document format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import minilang as ml
from .taskspec import DataBlock, FitConfig, TaskSpec


@dataclass(frozen=True)
class Evidence:
    """Where a fact came from: a source span or a task-spec path."""

    file: str | None = None
    span: ml.Span | None = None
    task_path: str | None = None

    def describe(self) -> str:
        if self.span is not None:
            name = self.file or "<source>"
            return (f"{name}:{self.span.line}:{self.span.column}-"
                    f"{self.span.end_line}:{self.span.end_column}")
        return self.task_path or "<task>"

    def to_json(self) -> dict:
        out: dict = {}
        if self.file is not None:
            out["file"] = self.file
        if self.span is not None:
            out["span"] = self.span.to_json()
        if self.task_path is not None:
            out["task_path"] = self.task_path
        return out

    @staticmethod
    def from_json(obj: dict) -> "Evidence":
        span = None
        if "span" in obj:
            s = obj["span"]
            span = ml.Span(s["line"], s["column"], s["end_line"], s["end_column"])
        return Evidence(obj.get("file"), span, obj.get("task_path"))


@dataclass(frozen=True)
class Fact:
    name: str
    args: tuple[str, ...]
    evidence: tuple[Evidence, ...]
    extractor: str

    def describe(self) -> str:
        return f"{self.name}({', '.join(self.args)})"

    def to_json(self) -> dict:
        return {"name": self.name, "args": list(self.args),
                "evidence": [e.to_json() for e in self.evidence],
                "extractor": self.extractor}

    @staticmethod
    def from_json(obj: dict) -> "Fact":
        return Fact(obj["name"], tuple(obj["args"]),
                    tuple(Evidence.from_json(e) for e in obj.get("evidence", [])),
                    obj.get("extractor", obj["name"]))


@dataclass(frozen=True)
class SiteEvidence:
    """One evidence item attached to a matched site.

    kind: support (context), omission (a required step is absent) or
    mismatch (code disagrees with the data). Either a ground fact or a
    free-form analysis note with structured detail.
    """

    kind: str
    fact: Fact | None = None
    note: str | None = None
    detail: dict | None = None

    def describe(self) -> str:
        if self.fact is not None:
            where = ", ".join(e.describe() for e in self.fact.evidence)
            return f"{self.fact.describe()} at {where}"
        return self.note or ""

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.fact is not None:
            out["fact"] = self.fact.to_json()
        if self.note is not None:
            out["note"] = self.note
        if self.detail is not None:
            out["detail"] = self.detail
        return out


@dataclass
class GoalInfo:
    id: str
    description: str
    parent_id: str | None
    child_count: int
    code_anchor: str | None
    is_last: bool

    def to_json(self) -> dict:
        return {"id": self.id, "description": self.description,
                "parent_id": self.parent_id, "child_count": self.child_count,
                "code_anchor": self.code_anchor, "is_last": self.is_last}


@dataclass
class FactSet:
    facts: list[Fact] = field(default_factory=list)
    data_blocks: dict[str, DataBlock] = field(default_factory=dict)
    goals: dict[str, GoalInfo] = field(default_factory=dict)
    # anchor -> variable -> classified form (json) for evidence rendering
    expr_forms: dict[str, dict[str, dict]] = field(default_factory=dict)
    fit: FitConfig = field(default_factory=FitConfig)
    program_path: str | None = None
    task_path: str | None = None

    def add(self, fact: Fact) -> None:
        if fact not in self._seen():
            self.facts.append(fact)

    def _seen(self) -> set[Fact]:
        return set(self.facts)

    def named(self, name: str) -> list[Fact]:
        return [f for f in self.facts if f.name == name]

    def to_json(self) -> dict:
        return {
            "facts": [f.to_json() for f in self.facts],
            "data_blocks": {k: v.to_json() for k, v in self.data_blocks.items()},
            "goals": {k: v.to_json() for k, v in self.goals.items()},
            "expr_forms": self.expr_forms,
            "fit": {"tie_epsilon": self.fit.tie_epsilon,
                    "min_points": self.fit.min_points,
                    "superlinearity_margin": self.fit.superlinearity_margin},
            "program_path": self.program_path,
            "task_path": self.task_path,
        }

    @staticmethod
    def from_json(obj: dict) -> "FactSet":
        fs = FactSet()
        for f in obj.get("facts", []):
            fs.facts.append(Fact.from_json(f))
        for k, v in obj.get("data_blocks", {}).items():
            fs.data_blocks[k] = DataBlock.from_json(v)
        for k, v in obj.get("goals", {}).items():
            fs.goals[k] = GoalInfo(v["id"], v["description"], v.get("parent_id"),
                                   v.get("child_count", 0), v.get("code_anchor"),
                                   v.get("is_last", False))
        fs.expr_forms = {k: dict(v) for k, v in obj.get("expr_forms", {}).items()}
        fit = obj.get("fit", {})
        fs.fit = FitConfig(fit.get("tie_epsilon", 0.01), fit.get("min_points", 3),
                           fit.get("superlinearity_margin", 0.2))
        fs.program_path = obj.get("program_path")
        fs.task_path = obj.get("task_path")
        return fs


def load_factset_file(path: str | Path) -> FactSet:
    """Ingest an externally produced fact document (JSON)."""
    obj = json.loads(Path(path).read_text())
    return FactSet.from_json(obj)


def anchor_contains(outer: str | None, inner: str) -> bool:
    """Whether the goal anchor `outer` covers the fact anchor `inner`.

    Accepted outer forms: None (covers everything), a bare function name,
    a full `func@line:col` anchor, or a line range `L<start>-L<end>`.
    """
    if outer is None:
        return True
    if outer == inner:
        return True
    if outer.startswith("L") and "-" in outer:
        try:
            lo, hi = outer[1:].split("-", 1)
            lo_n, hi_n = int(lo), int(hi.lstrip("L"))
        except ValueError:
            return False
        line = ml.anchor_line(inner)
        return line is not None and lo_n <= line <= hi_n
    if "@" not in outer:
        return ml.anchor_function(inner) == outer
    return False


# ---------------------------------------------------------------------------
# Extraction

def _body_has_output(body: tuple[ml.Stmt, ...]) -> bool:
    return any(isinstance(s, (ml.Print, ml.Println)) for s in ml.walk_statements(body))


def _trailing_tokens(body: tuple[ml.Stmt, ...]) -> list[str]:
    tokens: list[str] = []
    for stmt in reversed(body):
        if isinstance(stmt, ml.Print):
            tokens.append("text")
        elif isinstance(stmt, ml.Println):
            tokens.append("blank")
        else:
            break
    tokens.reverse()
    return tokens


def _calls_in_order(fn: ml.Function) -> list[tuple[str, ml.Stmt]]:
    """Every call occurrence in the function, in statement order."""
    out: list[tuple[str, ml.Stmt]] = []

    def scan_expr(e: ml.Expr, stmt: ml.Stmt):
        if isinstance(e, ml.CallExpr):
            out.append((e.name, stmt))
            for a in e.args:
                scan_expr(a, stmt)
        elif isinstance(e, ml.Unary):
            scan_expr(e.operand, stmt)
        elif isinstance(e, ml.BinOp):
            scan_expr(e.left, stmt)
            scan_expr(e.right, stmt)

    for stmt in ml.walk_statements(fn.body):
        if isinstance(stmt, ml.Assign):
            scan_expr(stmt.expr, stmt)
        elif isinstance(stmt, ml.CallStmt):
            scan_expr(stmt.call, stmt)
        elif isinstance(stmt, ml.Print):
            for a in stmt.args:
                scan_expr(a, stmt)
        elif isinstance(stmt, ml.Return):
            scan_expr(stmt.expr, stmt)
        elif isinstance(stmt, ml.For):
            scan_expr(stmt.start, stmt)
            scan_expr(stmt.stop, stmt)
        elif isinstance(stmt, ml.While):
            scan_expr(stmt.cond, stmt)
        elif isinstance(stmt, ml.If):
            scan_expr(stmt.cond, stmt)
    return out


def _classify_targets(program: ml.Program):
    """(function, statement, expression) triples whose forms get extracted.

    Assignments contribute their right-hand side; print statements
    contribute each argument. Bare variable references and expressions
    without free variables carry no modeled relation and are skipped.
    """
    for fn in program.functions:
        for stmt in ml.walk_statements(fn.body):
            if isinstance(stmt, ml.Assign):
                yield fn, stmt, stmt.expr
            elif isinstance(stmt, ml.Print):
                for arg in stmt.args:
                    yield fn, stmt, arg


def extract_facts(program: ml.Program, task: TaskSpec) -> FactSet:
    """Run every registered fact extractor over the program and task.

    Pure and deterministic: the same inputs produce the same FactSet,
    fact for fact, in the same order.
    """
    fs = FactSet(program_path=program.path, task_path=task.path,
                 fit=task.fit)
    src = program.path or "<source>"
    task_ev = Evidence(task_path=task.path or "<task>")
    seen: set[Fact] = set()

    def emit(fact: Fact) -> None:
        if fact not in seen:
            seen.add(fact)
            fs.facts.append(fact)

    # expr_form: classified shapes of assignments and print arguments
    for fn, stmt, expr in _classify_targets(program):
        if isinstance(expr, ml.Var):
            continue
        fv = ml.free_variables(expr)
        if not fv:
            continue
        anchor = ml.anchor_for(fn.name, stmt)
        for var in sorted(fv):
            form = ml.classify_expression(expr, var)
            fs.expr_forms.setdefault(anchor, {})[var] = form.to_json()
            emit(Fact("expr_form", (var, form.family, anchor),
                      (Evidence(file=src, span=stmt.span),), "expr_form"))

    # trailing_output: tail output tokens of output-bearing bodies
    trailer_targets: list[tuple[str, tuple[ml.Stmt, ...], ml.Span]] = []
    for fn in program.functions:
        if _body_has_output(fn.body):
            trailer_targets.append((fn.name, fn.body, fn.span))
        for stmt in ml.walk_statements(fn.body):
            if isinstance(stmt, (ml.For, ml.While)) and _body_has_output(stmt.body):
                trailer_targets.append((ml.anchor_for(fn.name, stmt), stmt.body, stmt.span))
    for anchor, body, span in trailer_targets:
        tokens = _trailing_tokens(body)
        emit(Fact("trailing_output", (anchor, "+".join(tokens)),
                  (Evidence(file=src, span=span),), "trailing_output"))

    # missing_trailer: required trailing tokens absent where the task wants them
    trailer = task.expected_trailer
    if trailer is not None:
        for anchor, body, span in trailer_targets:
            if trailer.anchor is not None:
                if "@" in trailer.anchor or trailer.anchor.startswith("L"):
                    if not anchor_contains(trailer.anchor, anchor) and anchor != trailer.anchor:
                        continue
                elif anchor != trailer.anchor:
                    # bare function name selects the function body itself
                    continue
            tokens = _trailing_tokens(body)
            want = trailer.tokens
            if tokens[len(tokens) - len(want):] != want:
                emit(Fact("missing_trailer", (anchor,),
                          (Evidence(file=src, span=span),), "missing_trailer"))

    # unpaired_call: an acquire with no matching release later in the function
    if task.pair_table:
        for fn in program.functions:
            calls = _calls_in_order(fn)
            for acquire, release in task.pair_table:
                for i, (name, stmt) in enumerate(calls):
                    if name != acquire:
                        continue
                    if any(rel_name == release for rel_name, _ in calls[i + 1:]):
                        continue
                    emit(Fact("unpaired_call", (acquire, ml.anchor_for(fn.name, stmt)),
                              (Evidence(file=src, span=stmt.span),), "unpaired_call"))

    # task-spec facts: goal decomposition, order, necessity, sample data
    goals = task.goals()
    parent_of: dict[str, str | None] = {}
    for g in goals:
        for c in g.children:
            parent_of[c.id] = g.id
    for g in goals:
        parent = parent_of.get(g.id)
        is_last = False
        if parent is not None:
            siblings = next(p for p in goals if p.id == parent).children
            is_last = bool(siblings) and siblings[-1].id == g.id
        fs.goals[g.id] = GoalInfo(g.id, g.description, parent, len(g.children),
                                  g.code_anchor, is_last)
    for g in goals:
        if len(g.children) >= 2:
            emit(Fact("task_decomposed", (g.id,), (task_ev,), "task_decomposed"))
    for g in goals:
        if fs.goals[g.id].is_last:
            emit(Fact("subgoal_is_last", (g.id,), (task_ev,), "subgoal_is_last"))
    for g in goals:
        if g.necessary_for_parent is not None:
            emit(Fact("subgoal_necessary",
                      (g.id, "true" if g.necessary_for_parent else "false"),
                      (task_ev,), "subgoal_necessary"))
    for block in task.sample_data:
        fs.data_blocks[block.id] = block
        emit(Fact("has_sample_data", (block.id,), (task_ev,), "has_sample_data"))

    # anchor_unresolved: diagnostic, not a failure
    known_anchors = program.source_map()
    for g in goals:
        a = g.code_anchor
        if a is None:
            continue
        ok = (a in known_anchors
              or program.function(ml.anchor_function(a)) is not None
              or (a.startswith("L") and "-" in a))
        if not ok:
            emit(Fact("anchor_unresolved", (g.id,), (task_ev,), "anchor_unresolved"))

    return fs
