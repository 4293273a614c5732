"""Random-instance generation and a brute-force matching oracle.

The generator builds catalogs that pass validation by construction: every
scenario variable is seeded by a fact-backed atom whose parameter sort
matches the variable's pool, HUMAN atoms only appear in when-clauses, and
message placeholders only name bound variables. The oracle re-derives
bindings and statuses from the written contracts (explicit truth tables,
set-based candidate collection) rather than reusing the matcher's code.
"""

from __future__ import annotations

import random

from errlens.catalog import (And, Arg, AtomApp, Catalog, ConditionAtom,
                             ErrorMode, Not, Or, Scenario, ThenClause,
                             atom_apps)
from errlens.facts import Evidence, Fact, FactSet, GoalInfo
from errlens.taskspec import DataBlock

GOALS = ["g1", "g2", "g3"]
ANCHORS = ["f@2:3", "f@4:3", "main@7:3"]
BLOCKS = ["heights", "widths"]
VARNAMES = ["n", "m"]
FAMILIES = ["linear", "polynomial", "exponential", "constant"]
TOKENS = ["blank", "text", "text+blank"]
CALLEES = ["open_file", "lock"]
FLAGS = ["true", "false"]

# fact extractor -> (param sorts, literal pool per position)
FACT_EXTRACTORS = {
    "expr_form": (("var", "family", "anchor"), (VARNAMES, FAMILIES, ANCHORS)),
    "trailing_output": (("anchor", "tokens"), (ANCHORS, TOKENS)),
    "missing_trailer": (("anchor",), (ANCHORS,)),
    "unpaired_call": (("callee", "anchor"), (CALLEES, ANCHORS)),
    "task_decomposed": (("goal",), (GOALS,)),
    "subgoal_is_last": (("goal",), (GOALS,)),
    "subgoal_necessary": (("goal", "flag"), (GOALS, FLAGS)),
    "has_sample_data": (("data",), (BLOCKS,)),
    "anchor_unresolved": (("goal",), (GOALS,)),
}

OMISSION_FACTS = {"missing_trailer", "unpaired_call"}

# sorts the binding enumerator filters on, and an extractor with a
# position of that sort usable to seed a variable
SEED_POSITIONS = {
    "goal": [("task_decomposed", 0), ("subgoal_is_last", 0),
             ("subgoal_necessary", 0), ("anchor_unresolved", 0)],
    "anchor": [("missing_trailer", 0), ("trailing_output", 0),
               ("unpaired_call", 1), ("expr_form", 2)],
    "data": [("has_sample_data", 0)],
}

NASTY = ['"', "\\", "\n", "\t", "#", "(", ")", ";", ",", "'", "{", "}"]


def _text(rng: random.Random, words: int = 3, nasty: bool = False) -> str:
    pool = ["step", "gets", "skipped", "grows", "fast", "check", "after",
            "figure", "output", "final"]
    parts = [rng.choice(pool) for _ in range(words)]
    s = " ".join(parts)
    if nasty and rng.random() < 0.5:
        ch = rng.choice(NASTY)
        if ch in "{}":
            s += " {}"  # braces only as a matched empty pair
        else:
            s += " " + ch
    return s


def make_catalog(rng: random.Random) -> Catalog:
    modes = [ErrorMode(f"mode_{i}", _text(rng, 2, nasty=True) or "m",
                       note=_text(rng, 4, nasty=True) if rng.random() < 0.6 else "",
                       source=_text(rng, 2) if rng.random() < 0.5 else "")
             for i in range(rng.randint(1, 2))]

    atoms: list[ConditionAtom] = []
    auto_by_sort: dict[str, list[ConditionAtom]] = {"goal": [], "anchor": [],
                                                    "data": []}
    used_extractors = set()
    wanted = rng.sample(list(FACT_EXTRACTORS), rng.randint(4, 7))
    for sort in ("goal", "anchor", "data"):  # guarantee one seed per sort
        name, _pos = rng.choice(SEED_POSITIONS[sort])
        if name not in wanted:
            wanted.append(name)
    for i, ext in enumerate(wanted):
        if ext in used_extractors:
            continue
        used_extractors.add(ext)
        params = FACT_EXTRACTORS[ext][0]
        cond = ConditionAtom(f"c{i}_{ext}", params, "AUTO", extractor=ext)
        atoms.append(cond)
        for sort in auto_by_sort:
            if sort in params:
                auto_by_sort[sort].append(cond)

    human_atoms: list[ConditionAtom] = []
    for i in range(rng.randint(1, 3)):
        sort = rng.choice(["goal", "data", "anchor"])
        template = f"Is {{{sort}}} " + _text(rng, 2, nasty=True) + "?"
        cond = ConditionAtom(f"q{i}_ask", (sort,), "HUMAN",
                             question_template=template)
        human_atoms.append(cond)
        atoms.append(cond)

    scenarios: list[Scenario] = []
    var_sorts = [("x", "goal"), ("y", "anchor"), ("z", "data")]
    for i in range(rng.randint(1, 3)):
        picked = rng.sample(var_sorts, rng.randint(1, 3))
        bound = {v: sort for v, sort in picked}

        def seed_app(var: str, sort: str) -> AtomApp:
            choices = [c for c in auto_by_sort[sort] if c.params.count(sort)]
            cond = rng.choice(choices)
            pos = cond.params.index(sort)
            args = []
            pools = FACT_EXTRACTORS[cond.extractor][1]
            for j, p in enumerate(cond.params):
                if j == pos:
                    args.append(Arg.var(var))
                elif rng.random() < 0.3:
                    args.append(Arg.wild())
                else:
                    args.append(Arg.lit(rng.choice(pools[j])))
            return AtomApp(cond.name, tuple(args))

        def extra_app(allow_human: bool) -> AtomApp:
            if allow_human and human_atoms and rng.random() < 0.5:
                cond = rng.choice(human_atoms)
                sort = cond.params[0]
                vs = [v for v, s in bound.items() if s == sort]
                arg = Arg.var(rng.choice(vs)) if vs else Arg.lit(
                    rng.choice({"goal": GOALS, "anchor": ANCHORS,
                                "data": BLOCKS}[sort]))
                return AtomApp(cond.name, (arg,))
            cond = rng.choice([a for a in atoms if a.kind == "AUTO"])
            pools = FACT_EXTRACTORS[cond.extractor][1]
            args = []
            for j, p in enumerate(cond.params):
                vs = [v for v, s in bound.items() if s == p]
                r = rng.random()
                if vs and r < 0.5:
                    args.append(Arg.var(rng.choice(vs)))
                elif r < 0.7:
                    args.append(Arg.wild())
                else:
                    args.append(Arg.lit(rng.choice(pools[j])))
            return AtomApp(cond.name, tuple(args))

        def tree(depth: int, allow_human: bool):
            if depth <= 0 or rng.random() < 0.4:
                app = extra_app(allow_human)
                return Not(app) if rng.random() < 0.3 else app
            op = rng.choice([And, Or])
            node = op(tree(depth - 1, allow_human), tree(depth - 1, allow_human))
            return Not(node) if rng.random() < 0.2 else node

        if_clause = None
        for v, sort in picked:
            app = seed_app(v, sort)
            if_clause = app if if_clause is None else And(if_clause, app)
        if rng.random() < 0.4:
            if_clause = And(if_clause, tree(1, allow_human=False))
        when_clause = tree(2, allow_human=True)

        target = rng.choice(list(bound))
        message = ""
        if rng.random() < 0.8:
            message = _text(rng, 3, nasty=True) + " {" + target + "}"
        then = ThenClause(rng.choice(["omission", "mismatch"]), target, message)
        scenarios.append(Scenario(
            id=f"s{i}_rule", mode_id=rng.choice(modes).id,
            if_clause=if_clause, when_clause=when_clause, then_clause=then,
            severity=rng.choice(["low", "medium", "high"]),
        ))

    version = ".".join(str(rng.randint(0, 9)) for _ in range(rng.randint(1, 3)))
    cat = Catalog(version, modes, atoms, scenarios)
    cat.resolve()
    return cat


def make_factset(rng: random.Random) -> FactSet:
    fs = FactSet(program_path="prog.mini", task_path="t.json")
    ev = (Evidence(task_path="t.json"),)
    for ext, (_sorts, pools) in FACT_EXTRACTORS.items():
        count = rng.randint(0, 3)
        seen = set()
        for _ in range(count):
            args = tuple(rng.choice(pool) for pool in pools)
            if args in seen:
                continue
            seen.add(args)
            fs.facts.append(Fact(ext, args, ev, ext))
    for i, g in enumerate(GOALS):
        if rng.random() < 0.85:
            fs.goals[g] = GoalInfo(g, f"goal {g}", "root" if i else None,
                                   0, None, rng.random() < 0.5)
    for b in BLOCKS:
        if rng.random() < 0.85:
            fs.data_blocks[b] = DataBlock(b, "n", "h",
                                          [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])
    return fs


# ---------------------------------------------------------------------------
# Brute-force oracle

TT_NOT = {0: 2, 1: 1, 2: 0}
TT_AND = {(a, b): min(a, b) for a in (0, 1, 2) for b in (0, 1, 2)}
TT_OR = {(a, b): max(a, b) for a in (0, 1, 2) for b in (0, 1, 2)}


def _bf_variables(s: Scenario) -> list[str]:
    out: list[str] = []
    for clause in (s.if_clause, s.when_clause):
        for app in atom_apps(clause):
            for a in app.args:
                if a.kind == "var" and a.value not in out:
                    out.append(a.value)
    return out


def _bf_sort_of(cond: ConditionAtom, i: int) -> str:
    if cond.kind == "AUTO":
        return FACT_EXTRACTORS[cond.extractor][0][i]
    return cond.params[i]


def _bf_candidates(s: Scenario, fs: FactSet) -> dict[str, list[str]] | None:
    table = s.conditions
    values: dict[str, list[str]] = {}
    sorts: dict[str, set[str]] = {}
    for clause in (s.if_clause, s.when_clause):
        for app in atom_apps(clause):
            cond = table[app.name]
            for i, arg in enumerate(app.args):
                if arg.kind != "var":
                    continue
                sorts.setdefault(arg.value, set()).add(_bf_sort_of(cond, i))
                if cond.kind != "AUTO" or cond.extractor not in FACT_EXTRACTORS:
                    continue
                vals = values.setdefault(arg.value, [])
                for fact in fs.facts:
                    if fact.name == cond.extractor and fact.args[i] not in vals:
                        vals.append(fact.args[i])
    out: dict[str, list[str]] = {}
    for v in _bf_variables(s):
        vals = values.get(v, [])
        if "goal" in sorts.get(v, set()):
            vals = [x for x in vals if x in fs.goals]
        if "data" in sorts.get(v, set()):
            vals = [x for x in vals if x in fs.data_blocks]
        if not vals:
            return None
        out[v] = vals
    return out


def _bf_bindings(s: Scenario, fs: FactSet) -> list[dict[str, str]]:
    variables = _bf_variables(s)
    if not variables:
        return []
    pools = _bf_candidates(s, fs)
    if pools is None:
        return []
    combos: list[dict[str, str]] = [{}]
    for v in variables:
        combos = [dict(c, **{v: val}) for c in combos for val in pools[v]]
    return combos


def bf_question_id(s: Scenario, app: AtomApp, env: dict[str, str]) -> str:
    parts = []
    for a in app.args:
        if a.kind == "var":
            parts.append(env.get(a.value, "_"))
        elif a.kind == "lit":
            parts.append(a.value)
        else:
            parts.append("_")
    return f"{s.id}:{app.name}:" + ",".join(parts)


def bf_match(cat: Catalog, fs: FactSet,
             answers: dict[str, str]) -> dict[str, tuple[str, frozenset]]:
    """Site key -> (status, pending question ids) by direct substitution."""
    results: dict[str, tuple[str, frozenset]] = {}
    for s in sorted(cat.scenarios, key=lambda sc: sc.id):
        variables = _bf_variables(s)
        for env in _bf_bindings(s, fs):
            occs: list[tuple[AtomApp, bool, int]] = []

            def atom_value(app: AtomApp) -> int:
                cond = s.conditions[app.name]
                if cond.kind == "HUMAN":
                    got = answers.get(bf_question_id(s, app, env))
                    return {"yes": 2, "no": 0}.get(got, 1)
                want = []
                for a in app.args:
                    if a.kind == "var":
                        want.append(env[a.value])
                    elif a.kind == "lit":
                        want.append(a.value)
                    else:
                        want.append(None)
                for fact in fs.facts:
                    if fact.name != cond.extractor:
                        continue
                    if len(fact.args) == len(want) and all(
                            w is None or w == g
                            for w, g in zip(want, fact.args)):
                        return 2
                return 0

            def ev(expr, positive: bool) -> int:
                if isinstance(expr, AtomApp):
                    v = atom_value(expr)
                    occs.append((expr, positive, v))
                    return v
                if isinstance(expr, Not):
                    return TT_NOT[ev(expr.operand, not positive)]
                if isinstance(expr, And):
                    return TT_AND[(ev(expr.left, positive),
                                   ev(expr.right, positive))]
                return TT_OR[(ev(expr.left, positive),
                              ev(expr.right, positive))]

            overall = TT_AND[(ev(s.if_clause, True), ev(s.when_clause, True))]
            qids = frozenset(
                bf_question_id(s, app, env)
                for app, _pos, v in occs
                if s.conditions[app.name].kind == "HUMAN" and v == 1)
            if overall == 2:
                probable = any(
                    pos and v == 2
                    and s.conditions[app.name].kind == "AUTO"
                    and s.conditions[app.name].extractor in OMISSION_FACTS
                    for app, pos, v in occs)
                status = "flagged_probable" if probable else "flagged_attention"
                qids = frozenset()
            elif overall == 0:
                status = "unmatched"
                qids = frozenset()
            else:
                status = "pending"
            key = s.id + "[" + ",".join(
                f"{v}={env[v]}" for v in variables) + "]"
            results[key] = (status, qids)
    return results


def all_question_ids(cat: Catalog, fs: FactSet) -> list[str]:
    out: list[str] = []
    for s in sorted(cat.scenarios, key=lambda sc: sc.id):
        for env in _bf_bindings(s, fs):
            for clause in (s.if_clause, s.when_clause):
                for app in atom_apps(clause):
                    if s.conditions[app.name].kind != "HUMAN":
                        continue
                    qid = bf_question_id(s, app, env)
                    if qid not in out:
                        out.append(qid)
    return out


def make_instance(seed: int):
    rng = random.Random(seed)
    cat = make_catalog(rng)
    fs = make_factset(rng)
    answers: dict[str, str] = {}
    for qid in all_question_ids(cat, fs):
        r = rng.random()
        if r < 0.25:
            answers[qid] = "yes"
        elif r < 0.5:
            answers[qid] = "no"
        elif r < 0.6:
            answers[qid] = "unknown"
    return cat, fs, answers
