"""Rule evaluation: bindings, three-valued clause evaluation, ranked sites.

Evaluation is Kleene three-valued (false < unknown < true): `and` is min,
`or` is max, `not x` is true-minus-x. AUTO atoms are always decided
(fact lookup or computed probe); HUMAN atoms read the answer map, then a
prefill probe when the condition declares one, and come back unknown
otherwise. A site's status follows the combined if/when value:

    true    -> flagged_probable when omission/mismatch evidence was
               collected, flagged_attention otherwise
    false   -> unmatched
    unknown -> pending, carrying the unanswered questions

Evidence is only collected from atoms that hold in positive polarity;
an atom satisfied under `not` has nothing concrete to show.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from . import atoms as atom_registry
from .catalog import And, AtomApp, Catalog, Not, Or, Scenario, atom_apps
from .facts import FactSet, SiteEvidence
from .taskspec import TaskSpec

FALSE, UNKNOWN, TRUE = 0, 1, 2

FLAGGED_PROBABLE = "flagged_probable"
FLAGGED_ATTENTION = "flagged_attention"
PENDING = "pending"
UNMATCHED = "unmatched"
DISMISSED = "dismissed"

STATUS_RANK = {
    FLAGGED_PROBABLE: 4,
    FLAGGED_ATTENTION: 3,
    PENDING: 2,
    UNMATCHED: 1,
    DISMISSED: 0,
}

SEVERITY_RANK = {"high": 3, "medium": 2, "low": 1}

ANSWER_VALUES = ("yes", "no", "unknown")

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class Binding:
    scenario_id: str
    assignments: tuple[tuple[str, str], ...]

    def get(self, var: str) -> str | None:
        for k, v in self.assignments:
            if k == var:
                return v
        return None

    def as_dict(self) -> dict[str, str]:
        return dict(self.assignments)

    @property
    def key(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.assignments)
        return f"{self.scenario_id}[{inner}]"


@dataclass
class Question:
    id: str
    site_key: str
    text: str
    answer_domain: tuple[str, ...] = ANSWER_VALUES

    def to_json(self) -> dict:
        return {"id": self.id, "site": self.site_key, "text": self.text,
                "answer_domain": list(self.answer_domain)}


@dataclass
class Site:
    scenario_id: str
    mode_id: str
    severity: str
    tendency: str
    binding: Binding
    status: str
    message: str
    evidence: list[SiteEvidence] = field(default_factory=list)
    pending_questions: list[Question] = field(default_factory=list)

    @property
    def key(self) -> str:
        return self.binding.key

    @property
    def flagged(self) -> bool:
        return self.status in (FLAGGED_PROBABLE, FLAGGED_ATTENTION)

    @property
    def score(self) -> list[int]:
        return [STATUS_RANK[self.status], SEVERITY_RANK.get(self.severity, 0)]

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "scenario": self.scenario_id,
            "mode": self.mode_id,
            "severity": self.severity,
            "tendency": self.tendency,
            "binding": self.binding.as_dict(),
            "status": self.status,
            "message": self.message,
            "score": self.score,
            "evidence": [e.to_json() for e in self.evidence],
            "pending_questions": [q.to_json() for q in self.pending_questions],
        }


def _display(fs: FactSet, value: str) -> str:
    info = fs.goals.get(value)
    if info is not None and info.description:
        return info.description
    return value


def _render(fs: FactSet, template: str, binding: Binding) -> str:
    def sub(m: re.Match) -> str:
        bound = binding.get(m.group(1))
        if bound is None:
            return m.group(0)
        return _display(fs, bound)

    return _PLACEHOLDER_RE.sub(sub, template)


def _resolve_args(app: AtomApp, binding: Binding) -> list[str | None]:
    out: list[str | None] = []
    for a in app.args:
        if a.kind == "var":
            out.append(binding.get(a.value))
        elif a.kind == "lit":
            out.append(a.value)
        else:
            out.append(None)  # wildcard
    return out


def question_id(scenario_id: str, condition_name: str, args: list[str | None]) -> str:
    return f"{scenario_id}:{condition_name}:" + ",".join(a or "_" for a in args)


def enumerate_bindings(cat: Catalog, fs: FactSet,
                       task: TaskSpec | None = None) -> list[Binding]:
    """Candidate bindings per scenario, in deterministic order.

    Candidates for a variable are the values occurring at that variable's
    positions in fact-backed conditions (in fact order), narrowed by sort:
    goal-sorted variables must name a goal, data-sorted ones a data block.
    Scenarios are visited in id order; the rightmost variable varies
    fastest in the cross product.
    """
    out: list[Binding] = []
    for s in sorted(cat.scenarios, key=lambda s: s.id):
        variables = s.variables()
        candidates: dict[str, dict[str, None]] = {v: {} for v in variables}
        sorts: dict[str, set[str]] = {v: set() for v in variables}
        for clause in (s.if_clause, s.when_clause):
            for app in atom_apps(clause):
                cond = s.conditions.get(app.name)
                if cond is None or len(app.args) != cond.arity:
                    continue
                spec = atom_registry.lookup(cond.extractor or cond.prefill or "")
                for i, arg in enumerate(app.args):
                    if arg.kind != "var":
                        continue
                    sort = spec.params[i] if spec else cond.params[i]
                    sorts[arg.value].add(sort)
                    if cond.kind == "AUTO" and spec is not None and spec.kind == "fact":
                        for fact in fs.named(spec.name):
                            if i < len(fact.args):
                                candidates[arg.value].setdefault(fact.args[i])
        rows: list[list[str]] = []
        feasible = True
        for v in variables:
            values = list(candidates[v])
            if "goal" in sorts[v]:
                values = [x for x in values if x in fs.goals]
            if "data" in sorts[v]:
                values = [x for x in values if x in fs.data_blocks]
            if not values:
                feasible = False
                break
            rows.append(values)
        if not feasible or not variables:
            continue
        for combo in itertools.product(*rows):
            out.append(Binding(s.id, tuple(zip(variables, combo))))
    return out


def _eval_human(s: Scenario, cond, resolved: list[str | None],
                fs: FactSet, answers: dict) -> tuple[int, Question | None]:
    qid = question_id(s.id, cond.name, resolved)
    if qid in answers:
        a = answers[qid]
        if a == "yes":
            return TRUE, None
        if a == "no":
            return FALSE, None
        value = UNKNOWN
    else:
        value = UNKNOWN
        if cond.prefill is not None:
            spec = atom_registry.lookup(cond.prefill)
            if spec is not None and spec.fn is not None:
                probe = spec.fn(fs, tuple(a or "" for a in resolved))
                if probe is True:
                    return TRUE, None
                if probe is False:
                    return FALSE, None
    text_binding = Binding(s.id, tuple(zip(cond.params, [a or "_" for a in resolved])))
    question = Question(qid, "", _render(fs, cond.question_template or "", text_binding))
    return value, question


def evaluate_scenario(s: Scenario, b: Binding, f: FactSet,
                      answers: dict | None = None) -> Site:
    """Evaluate one scenario instance; total, never raises on valid input."""
    answers = answers or {}
    evidence: list[SiteEvidence] = []
    questions: dict[str, Question] = {}

    def eval_expr(expr, positive: bool) -> int:
        if isinstance(expr, Not):
            return TRUE - eval_expr(expr.operand, not positive)
        if isinstance(expr, And):
            return min(eval_expr(expr.left, positive), eval_expr(expr.right, positive))
        if isinstance(expr, Or):
            return max(eval_expr(expr.left, positive), eval_expr(expr.right, positive))
        return eval_atom(expr, positive)

    def eval_atom(app: AtomApp, positive: bool) -> int:
        cond = s.conditions.get(app.name)
        if cond is None:
            return FALSE
        resolved = _resolve_args(app, b)
        if cond.kind == "HUMAN":
            value, question = _eval_human(s, cond, resolved, f, answers)
            if question is not None and question.id not in questions:
                questions[question.id] = question
            return value
        spec = atom_registry.lookup(cond.extractor or "")
        if spec is None:
            return FALSE
        if spec.kind == "fact":
            hits = []
            for fact in f.named(spec.name):
                if len(fact.args) != len(resolved):
                    continue
                if all(want is None or want == got
                       for want, got in zip(resolved, fact.args)):
                    hits.append(fact)
            if hits:
                if positive:
                    evidence.extend(SiteEvidence(spec.evidence_kind, fact=h)
                                    for h in hits)
                return TRUE
            return FALSE
        ok, ev = spec.fn(f, tuple(a or "" for a in resolved))
        if ok:
            if positive:
                evidence.extend(ev)
            return TRUE
        return FALSE

    if_val = eval_expr(s.if_clause, True)
    when_val = eval_expr(s.when_clause, True)
    overall = min(if_val, when_val)

    if overall == TRUE:
        probable = any(e.kind in (atom_registry.OMISSION, atom_registry.MISMATCH)
                       for e in evidence)
        status = FLAGGED_PROBABLE if probable else FLAGGED_ATTENTION
        pending: list[Question] = []
    elif overall == FALSE:
        status = UNMATCHED
        pending = []
    else:
        status = PENDING
        pending = list(questions.values())

    site = Site(
        scenario_id=s.id,
        mode_id=s.mode_id,
        severity=s.severity,
        tendency=s.then_clause.tendency,
        binding=b,
        status=status,
        message=_render(f, s.then_clause.message_template, b),
        evidence=evidence,
        pending_questions=pending,
    )
    for q in site.pending_questions:
        q.site_key = site.key
    return site


def match_all(cat: Catalog, fs: FactSet, task: TaskSpec | None = None,
              answers: dict | None = None) -> list[Site]:
    """Evaluate every scenario over every binding; deterministic order."""
    by_id = {s.id: s for s in cat.scenarios}
    sites: list[Site] = []
    for binding in enumerate_bindings(cat, fs, task):
        scenario = by_id[binding.scenario_id]
        sites.append(evaluate_scenario(scenario, binding, fs, answers))
    return sites


def rank_sites(sites: list[Site]) -> list[Site]:
    """Status class first, severity second, original order breaks ties."""
    return sorted(sites, key=lambda s: (-STATUS_RANK[s.status],
                                        -SEVERITY_RANK.get(s.severity, 0)))


def apply_dismissals(sites: list[Site], dismissed: set[str]) -> list[Site]:
    """Inspector overrides: dismissed sites drop their questions and sink."""
    for site in sites:
        if site.key in dismissed:
            site.status = DISMISSED
            site.pending_questions = []
    return sites


def pending_questions(sites: list[Site]) -> list[Question]:
    out: list[Question] = []
    for site in sites:
        out.extend(site.pending_questions)
    return out
