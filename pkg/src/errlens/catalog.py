"""Rule catalog: error modes, condition atoms and the scenario DSL.

A catalog document looks like:

    catalog "1" {

    mode habit_capture {
      title: "Strong habit capture";
      note: "...";
      source: "Reason 1990";
    }

    conditions {
      step_is_last(goal): AUTO subgoal_is_last;
      not_needed(goal): HUMAN "Is {goal} optional?" prefill subgoal_not_necessary;
    }

    eps "some_rule" {
      mode: habit_capture;
      if: step_is_last(goal);
      when: not_needed(goal);
      then: omission(goal) "the step {goal} tends to be skipped";
      severity: high;
    }
    }

Atom applications take variables (bare identifiers), quoted literals, or
`_` wildcards. `if` clauses must be fully machine-decidable (AUTO only);
HUMAN conditions belong in `when`. A HUMAN condition may name a prefill
probe that settles the answer from task facts before anyone is asked.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import atoms as atom_registry

SEVERITIES = ("low", "medium", "high")
TENDENCIES = ("omission", "mismatch")
_ID_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int = 0
    column: int = 0

    def __str__(self) -> str:
        if self.line:
            return f"{self.line}:{self.column}: {self.message}"
        return self.message


class CatalogError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ErrorMode:
    id: str
    title: str
    note: str = ""
    source: str = ""
    line: int = field(compare=False, default=0)
    column: int = field(compare=False, default=0)


@dataclass(frozen=True)
class ConditionAtom:
    """One declared condition: machine-backed (AUTO) or asked (HUMAN)."""

    name: str
    params: tuple[str, ...]
    kind: str  # AUTO | HUMAN
    extractor: str | None = None          # AUTO only
    question_template: str | None = None  # HUMAN only
    prefill: str | None = None            # HUMAN only, optional probe
    line: int = field(compare=False, default=0)
    column: int = field(compare=False, default=0)

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Arg:
    kind: str  # var | lit | wild
    value: str | None = None

    @staticmethod
    def var(name: str) -> "Arg":
        return Arg("var", name)

    @staticmethod
    def lit(value: str) -> "Arg":
        return Arg("lit", value)

    @staticmethod
    def wild() -> "Arg":
        return Arg("wild", None)


@dataclass(frozen=True)
class AtomApp:
    name: str
    args: tuple[Arg, ...]
    line: int = field(compare=False, default=0)
    column: int = field(compare=False, default=0)


@dataclass(frozen=True)
class And:
    left: "CondExpr"
    right: "CondExpr"


@dataclass(frozen=True)
class Or:
    left: "CondExpr"
    right: "CondExpr"


@dataclass(frozen=True)
class Not:
    operand: "CondExpr"


CondExpr = AtomApp | And | Or | Not


@dataclass(frozen=True)
class ThenClause:
    tendency: str  # omission | mismatch
    target: str    # variable name bound by if/when
    message_template: str = ""


@dataclass
class Scenario:
    id: str
    mode_id: str
    if_clause: CondExpr
    when_clause: CondExpr
    then_clause: ThenClause
    severity: str = "high"
    # resolved view and positions; not part of structural equality
    conditions: dict[str, ConditionAtom] = field(compare=False, repr=False,
                                                 default_factory=dict)
    source_index: int = field(compare=False, default=0)
    line: int = field(compare=False, default=0)
    column: int = field(compare=False, default=0)

    def variables(self) -> list[str]:
        """Scenario variables in first-occurrence order (if, then when)."""
        seen: dict[str, None] = {}
        for app in atom_apps(self.if_clause):
            for a in app.args:
                if a.kind == "var":
                    seen.setdefault(a.value)
        for app in atom_apps(self.when_clause):
            for a in app.args:
                if a.kind == "var":
                    seen.setdefault(a.value)
        return list(seen)


@dataclass
class Catalog:
    version: str
    modes: list[ErrorMode] = field(default_factory=list)
    atoms: list[ConditionAtom] = field(default_factory=list)
    scenarios: list[Scenario] = field(default_factory=list)

    def mode(self, mode_id: str) -> ErrorMode | None:
        for m in self.modes:
            if m.id == mode_id:
                return m
        return None

    def condition(self, name: str) -> ConditionAtom | None:
        for a in self.atoms:
            if a.name == name:
                return a
        return None

    def scenario(self, scenario_id: str) -> Scenario | None:
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        return None

    def resolve(self) -> None:
        """Attach the condition table and document order to each scenario."""
        table = {a.name: a for a in self.atoms}
        for i, s in enumerate(self.scenarios):
            s.conditions = table
            s.source_index = i


def atom_apps(expr: CondExpr):
    """All atom applications in an expression, left to right."""
    if isinstance(expr, AtomApp):
        yield expr
    elif isinstance(expr, (And, Or)):
        yield from atom_apps(expr.left)
        yield from atom_apps(expr.right)
    elif isinstance(expr, Not):
        yield from atom_apps(expr.operand)


# ---------------------------------------------------------------------------
# Lexer

@dataclass(frozen=True)
class _Tok:
    kind: str  # IDENT, STRING, a symbol, EOF
    text: str
    line: int
    column: int


_SYMS = "{}():;,"
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
_UNESCAPES = {"\n": "\\n", "\t": "\\t", '"': '\\"', "\\": "\\\\"}


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            sl, sc = line, col
            i, col = i + 1, col + 1
            buf: list[str] = []
            while i < n and text[i] != '"':
                c = text[i]
                if c == "\n":
                    raise CatalogError([Diagnostic("unterminated string", sl, sc)])
                if c == "\\" and i + 1 < n:
                    buf.append(_ESCAPES.get(text[i + 1], text[i + 1]))
                    i, col = i + 2, col + 2
                    continue
                buf.append(c)
                i, col = i + 1, col + 1
            if i >= n:
                raise CatalogError([Diagnostic("unterminated string", sl, sc)])
            i, col = i + 1, col + 1
            toks.append(_Tok("STRING", "".join(buf), sl, sc))
            continue
        if ch.isalnum() or ch == "_":
            sc = col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("IDENT", text[i:j], line, sc))
            col += j - i
            i = j
            continue
        if ch in _SYMS:
            toks.append(_Tok(ch, ch, line, col))
            i, col = i + 1, col + 1
            continue
        raise CatalogError([Diagnostic(f"unexpected character {ch!r}", line, col)])
    toks.append(_Tok("EOF", "", line, col))
    return toks


def _escape(s: str) -> str:
    return "".join(_UNESCAPES.get(c, c) for c in s)


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def fail(self, expected: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        found = tok.text or "end of input"
        raise CatalogError([Diagnostic(f"expected {expected}, found {found!r}",
                                       tok.line, tok.column)])

    def expect(self, kind: str) -> _Tok:
        if self.peek().kind != kind:
            self.fail(f"'{kind}'" if kind in _SYMS else kind)
        return self.next()

    def keyword(self, word: str) -> _Tok:
        t = self.peek()
        if t.kind != "IDENT" or t.text != word:
            self.fail(f"'{word}'")
        return self.next()

    def ident(self, what: str = "identifier") -> _Tok:
        t = self.peek()
        if t.kind != "IDENT":
            self.fail(what)
        return self.next()

    def parse(self) -> Catalog:
        self.keyword("catalog")
        version = self.expect("STRING").text
        self.expect("{")
        cat = Catalog(version)
        while self.peek().kind != "}":
            t = self.peek()
            if t.kind != "IDENT":
                self.fail("'mode', 'conditions' or 'eps'")
            if t.text == "mode":
                cat.modes.append(self.parse_mode())
            elif t.text == "conditions":
                cat.atoms.extend(self.parse_conditions())
            elif t.text == "eps":
                cat.scenarios.append(self.parse_eps())
            else:
                self.fail("'mode', 'conditions' or 'eps'", t)
        self.expect("}")
        if self.peek().kind != "EOF":
            self.fail("end of input")
        cat.resolve()
        return cat

    def parse_mode(self) -> ErrorMode:
        start = self.keyword("mode")
        mode_id = self.ident("mode id")
        self.expect("{")
        fields = {"title": "", "note": "", "source": ""}
        seen: set[str] = set()
        while self.peek().kind != "}":
            key = self.ident("'title', 'note' or 'source'")
            if key.text not in fields:
                self.fail("'title', 'note' or 'source'", key)
            if key.text in seen:
                raise CatalogError([Diagnostic(
                    f"duplicate field {key.text!r} in mode {mode_id.text!r}",
                    key.line, key.column)])
            seen.add(key.text)
            self.expect(":")
            fields[key.text] = self.expect("STRING").text
            self.expect(";")
        self.expect("}")
        return ErrorMode(mode_id.text, fields["title"], fields["note"],
                         fields["source"], line=start.line, column=start.column)

    def parse_conditions(self) -> list[ConditionAtom]:
        self.keyword("conditions")
        self.expect("{")
        out: list[ConditionAtom] = []
        while self.peek().kind != "}":
            name = self.ident("condition name")
            self.expect("(")
            params: list[str] = []
            if self.peek().kind != ")":
                params.append(self.ident("parameter").text)
                while self.peek().kind == ",":
                    self.next()
                    params.append(self.ident("parameter").text)
            self.expect(")")
            self.expect(":")
            kind = self.ident("'AUTO' or 'HUMAN'")
            if kind.text == "AUTO":
                extractor = self.ident("extractor name").text
                out.append(ConditionAtom(name.text, tuple(params), "AUTO",
                                         extractor=extractor,
                                         line=name.line, column=name.column))
            elif kind.text == "HUMAN":
                template = self.expect("STRING").text
                prefill = None
                if self.peek().kind == "IDENT" and self.peek().text == "prefill":
                    self.next()
                    prefill = self.ident("prefill extractor").text
                out.append(ConditionAtom(name.text, tuple(params), "HUMAN",
                                         question_template=template, prefill=prefill,
                                         line=name.line, column=name.column))
            else:
                self.fail("'AUTO' or 'HUMAN'", kind)
            self.expect(";")
        self.expect("}")
        return out

    def parse_eps(self) -> Scenario:
        start = self.keyword("eps")
        sid = self.expect("STRING")
        self.expect("{")
        mode_id: str | None = None
        if_clause: CondExpr | None = None
        when_clause: CondExpr | None = None
        then_clause: ThenClause | None = None
        severity = "high"
        seen: set[str] = set()
        while self.peek().kind != "}":
            key = self.ident("'mode', 'if', 'when', 'then' or 'severity'")
            if key.text not in ("mode", "if", "when", "then", "severity"):
                self.fail("'mode', 'if', 'when', 'then' or 'severity'", key)
            if key.text in seen:
                raise CatalogError([Diagnostic(
                    f"duplicate field {key.text!r} in eps {sid.text!r}",
                    key.line, key.column)])
            seen.add(key.text)
            self.expect(":")
            if key.text == "mode":
                mode_id = self.ident("mode id").text
            elif key.text == "if":
                if_clause = self.parse_expr()
            elif key.text == "when":
                when_clause = self.parse_expr()
            elif key.text == "then":
                then_clause = self.parse_then()
            else:
                severity = self.ident("severity level").text
            self.expect(";")
        end = self.expect("}")
        for fld, val in (("mode", mode_id), ("if", if_clause),
                         ("when", when_clause), ("then", then_clause)):
            if val is None:
                raise CatalogError([Diagnostic(
                    f"eps {sid.text!r} is missing its {fld!r} field",
                    end.line, end.column)])
        return Scenario(sid.text, mode_id, if_clause, when_clause, then_clause,
                        severity, line=start.line, column=start.column)

    def parse_then(self) -> ThenClause:
        tendency = self.ident("'omission' or 'mismatch'")
        if tendency.text not in TENDENCIES:
            self.fail("'omission' or 'mismatch'", tendency)
        self.expect("(")
        target = self.ident("target variable").text
        self.expect(")")
        message = ""
        if self.peek().kind == "STRING":
            message = self.next().text
        return ThenClause(tendency.text, target, message)

    # or < and < not < atom
    def parse_expr(self) -> CondExpr:
        left = self.parse_and()
        while self.peek().kind == "IDENT" and self.peek().text == "or":
            self.next()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> CondExpr:
        left = self.parse_not()
        while self.peek().kind == "IDENT" and self.peek().text == "and":
            self.next()
            left = And(left, self.parse_not())
        return left

    def parse_not(self) -> CondExpr:
        if self.peek().kind == "IDENT" and self.peek().text == "not":
            self.next()
            return Not(self.parse_not())
        return self.parse_atom()

    def parse_atom(self) -> CondExpr:
        t = self.peek()
        if t.kind == "(":
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if t.kind != "IDENT":
            self.fail("condition application")
        name = self.next()
        self.expect("(")
        args: list[Arg] = []
        if self.peek().kind != ")":
            args.append(self.parse_arg())
            while self.peek().kind == ",":
                self.next()
                args.append(self.parse_arg())
        self.expect(")")
        return AtomApp(name.text, tuple(args), line=name.line, column=name.column)

    def parse_arg(self) -> Arg:
        t = self.peek()
        if t.kind == "STRING":
            self.next()
            return Arg.lit(t.text)
        if t.kind == "IDENT":
            self.next()
            if t.text == "_":
                return Arg.wild()
            return Arg.var(t.text)
        self.fail("argument (variable, string or '_')")


def parse_catalog(text: str) -> Catalog:
    """Parse and validate a catalog document.

    Raises CatalogError carrying every diagnostic found; a returned
    Catalog always validates clean.
    """
    cat = _Parser(_lex(text)).parse()
    problems = validate_catalog(cat)
    if problems:
        raise CatalogError(problems)
    return cat


def load_catalog_file(path) -> Catalog:
    from pathlib import Path
    return parse_catalog(Path(path).read_text())


# ---------------------------------------------------------------------------
# Serializer

def _fmt_arg(a: Arg) -> str:
    if a.kind == "var":
        return a.value
    if a.kind == "wild":
        return "_"
    return f'"{_escape(a.value)}"'


def _fmt_expr(e: CondExpr, ctx: int = 0) -> str:
    """Minimal-paren rendering; right operands of the same precedence keep
    their parens so the parse tree survives the round trip."""
    if isinstance(e, AtomApp):
        return f"{e.name}({', '.join(_fmt_arg(a) for a in e.args)})"
    if isinstance(e, Not):
        s = f"not {_fmt_expr(e.operand, 3)}"
        prec = 3
    elif isinstance(e, And):
        s = f"{_fmt_expr(e.left, 2)} and {_fmt_expr(e.right, 3)}"
        prec = 2
    else:
        s = f"{_fmt_expr(e.left, 1)} or {_fmt_expr(e.right, 2)}"
        prec = 1
    return f"({s})" if prec < ctx else s


def serialize_catalog(cat: Catalog) -> str:
    """Canonical catalog text; parse_catalog(serialize_catalog(c)) == c."""
    out: list[str] = [f'catalog "{_escape(cat.version)}" {{', ""]
    for m in cat.modes:
        out.append(f"mode {m.id} {{")
        out.append(f'  title: "{_escape(m.title)}";')
        if m.note:
            out.append(f'  note: "{_escape(m.note)}";')
        if m.source:
            out.append(f'  source: "{_escape(m.source)}";')
        out.append("}")
        out.append("")
    if cat.atoms:
        out.append("conditions {")
        for a in cat.atoms:
            head = f"  {a.name}({', '.join(a.params)}): "
            if a.kind == "AUTO":
                out.append(f"{head}AUTO {a.extractor};")
            else:
                line = f'{head}HUMAN "{_escape(a.question_template or "")}"'
                if a.prefill:
                    line += f" prefill {a.prefill}"
                out.append(line + ";")
        out.append("}")
        out.append("")
    for s in cat.scenarios:
        out.append(f'eps "{_escape(s.id)}" {{')
        out.append(f"  mode: {s.mode_id};")
        out.append(f"  if: {_fmt_expr(s.if_clause)};")
        out.append(f"  when: {_fmt_expr(s.when_clause)};")
        then = f"  then: {s.then_clause.tendency}({s.then_clause.target})"
        if s.then_clause.message_template:
            then += f' "{_escape(s.then_clause.message_template)}"'
        out.append(then + ";")
        out.append(f"  severity: {s.severity};")
        out.append("}")
        out.append("")
    out.append("}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Validation

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


def validate_catalog(cat: Catalog) -> list[Diagnostic]:
    """Structural and cross-reference checks; empty result means valid."""
    out: list[Diagnostic] = []

    def bad(msg: str, line: int = 0, column: int = 0):
        out.append(Diagnostic(msg, line, column))

    seen_modes: set[str] = set()
    for m in cat.modes:
        if not _ID_RE.match(m.id):
            bad(f"mode id {m.id!r} must match [a-z][a-z0-9_]*", m.line, m.column)
        if m.id in seen_modes:
            bad(f"duplicate mode id {m.id!r}", m.line, m.column)
        seen_modes.add(m.id)
        if not m.title:
            bad(f"mode {m.id!r} has an empty title", m.line, m.column)

    conditions: dict[str, ConditionAtom] = {}
    for a in cat.atoms:
        if not _ID_RE.match(a.name):
            bad(f"condition name {a.name!r} must match [a-z][a-z0-9_]*",
                a.line, a.column)
        if a.name in conditions:
            bad(f"duplicate condition {a.name!r}", a.line, a.column)
        conditions[a.name] = a
        if len(set(a.params)) != len(a.params):
            bad(f"condition {a.name!r} repeats a parameter name", a.line, a.column)
        if a.kind == "AUTO":
            spec = atom_registry.lookup(a.extractor or "")
            if spec is None or spec.kind == "prefill":
                bad(f"condition {a.name!r} names unknown extractor {a.extractor!r}",
                    a.line, a.column)
            elif spec.arity != a.arity:
                bad(f"condition {a.name!r} has {a.arity} parameters but "
                    f"extractor {a.extractor!r} takes {spec.arity}",
                    a.line, a.column)
        else:
            if not (a.question_template or "").strip():
                bad(f"HUMAN condition {a.name!r} has an empty question",
                    a.line, a.column)
            else:
                for ph in _PLACEHOLDER_RE.findall(a.question_template):
                    if ph not in a.params:
                        bad(f"question for {a.name!r} references unknown "
                            f"placeholder {{{ph}}}", a.line, a.column)
            if a.prefill is not None:
                spec = atom_registry.lookup(a.prefill)
                if spec is None or spec.kind != "prefill":
                    bad(f"condition {a.name!r} names unknown prefill probe "
                        f"{a.prefill!r}", a.line, a.column)
                elif spec.arity != a.arity:
                    bad(f"prefill probe {a.prefill!r} takes {spec.arity} "
                        f"arguments, condition {a.name!r} declares {a.arity}",
                        a.line, a.column)

    seen_ids: set[str] = set()
    for s in cat.scenarios:
        if not _ID_RE.match(s.id):
            bad(f"scenario id {s.id!r} must match [a-z][a-z0-9_]*", s.line, s.column)
        if s.id in seen_ids:
            bad(f"duplicate scenario id {s.id!r}", s.line, s.column)
        seen_ids.add(s.id)
        if cat.mode(s.mode_id) is None:
            bad(f"scenario {s.id!r} references undeclared mode {s.mode_id!r}",
                s.line, s.column)
        if s.severity not in SEVERITIES:
            bad(f"scenario {s.id!r} has unknown severity {s.severity!r}",
                s.line, s.column)

        fact_bound: set[str] = set()
        all_vars: dict[str, None] = {}
        for clause_name, clause in (("if", s.if_clause), ("when", s.when_clause)):
            for app in atom_apps(clause):
                cond = conditions.get(app.name)
                if cond is None:
                    bad(f"scenario {s.id!r} references undeclared condition "
                        f"{app.name!r}", app.line, app.column)
                    continue
                if len(app.args) != cond.arity:
                    bad(f"condition {app.name!r} takes {cond.arity} arguments, "
                        f"got {len(app.args)}", app.line, app.column)
                if cond.kind == "HUMAN" and clause_name == "if":
                    bad(f"HUMAN condition {app.name!r} is not allowed in the "
                        f"'if' clause (must stay machine-decidable)",
                        app.line, app.column)
                spec = atom_registry.lookup(cond.extractor or "")
                is_fact = cond.kind == "AUTO" and spec is not None and spec.kind == "fact"
                needs_concrete = cond.kind == "HUMAN" or (
                    spec is not None and spec.kind == "computed")
                for a in app.args:
                    if a.kind == "var":
                        all_vars.setdefault(a.value)
                        if is_fact:
                            fact_bound.add(a.value)
                    elif a.kind == "wild" and needs_concrete:
                        bad(f"condition {app.name!r} cannot take a wildcard "
                            f"argument", app.line, app.column)

        for v in all_vars:
            if v not in fact_bound:
                bad(f"variable {v!r} in scenario {s.id!r} is never bound by a "
                    f"fact-backed condition", s.line, s.column)
        if s.then_clause.tendency not in TENDENCIES:
            bad(f"scenario {s.id!r} then-clause tendency must be omission or "
                f"mismatch", s.line, s.column)
        if s.then_clause.target not in all_vars:
            bad(f"scenario {s.id!r} then-clause target {s.then_clause.target!r} "
                f"is unbound", s.line, s.column)
        for ph in _PLACEHOLDER_RE.findall(s.then_clause.message_template):
            if ph not in all_vars:
                bad(f"scenario {s.id!r} message references unbound placeholder "
                    f"{{{ph}}}", s.line, s.column)
    return out
