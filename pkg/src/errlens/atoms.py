"""Registry of condition-atom extractors.

Three kinds:
  fact      -- satisfied by a matching ground fact in the FactSet
  computed  -- evaluated on demand against the FactSet context tables
  prefill   -- a tristate probe that can settle a HUMAN atom without
               asking (returns True/False/None for unknown)

Catalog validation resolves every atom reference against this registry,
so an unknown extractor is a load-time diagnostic rather than a silent
non-match.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .facts import Fact, FactSet, SiteEvidence, anchor_contains
from .fitting import FitError, is_superlinear, select_family

SUPPORT = "support"
OMISSION = "omission"
MISMATCH = "mismatch"

ComputedFn = Callable[[FactSet, tuple[str, ...]], tuple[bool, list[SiteEvidence]]]
PrefillFn = Callable[[FactSet, tuple[str, ...]], "bool | None"]


@dataclass(frozen=True)
class ExtractorSpec:
    name: str
    params: tuple[str, ...]
    kind: str  # fact | computed | prefill
    evidence_kind: str = SUPPORT
    fn: ComputedFn | PrefillFn | None = None

    @property
    def arity(self) -> int:
        return len(self.params)


def _fact_evidence(fact: Fact, kind: str) -> SiteEvidence:
    return SiteEvidence(kind=kind, fact=fact)


def _superlinear_vs_code(fs: FactSet, args: tuple[str, ...]):
    data_id, anchor = args
    block = fs.data_blocks.get(data_id)
    if block is None:
        return False, []
    form = fs.expr_forms.get(anchor, {}).get(block.x_name)
    if form is None or form.get("family") != "linear":
        return False, []
    try:
        selection = select_family(block.points, tie_epsilon=fs.fit.tie_epsilon,
                                  min_points=fs.fit.min_points)
    except FitError:
        return False, []
    if not is_superlinear(selection, fs.fit.superlinearity_margin):
        return False, []
    code_fact = next((f for f in fs.named("expr_form")
                      if f.args == (block.x_name, "linear", anchor)), None)
    note = (f"{block.label()} is best fit by {selection.best.label()} "
            f"(nrmse {selection.best.nrmse:.4g}) but the code at {anchor} "
            f"computes a linear form")
    detail = {"selection": selection.to_json(), "code_form": form,
              "data_block": data_id, "anchor": anchor}
    ev = [SiteEvidence(kind=MISMATCH, fact=code_fact, note=note, detail=detail)]
    return True, ev


def _parent_decomposed(fs: FactSet, args: tuple[str, ...]):
    (goal_id,) = args
    info = fs.goals.get(goal_id)
    if info is None or info.parent_id is None:
        return False, []
    fact = next((f for f in fs.named("task_decomposed")
                 if f.args == (info.parent_id,)), None)
    if fact is None:
        return False, []
    return True, [_fact_evidence(fact, SUPPORT)]


def _omission_in_code(fs: FactSet, args: tuple[str, ...]):
    (goal_id,) = args
    info = fs.goals.get(goal_id)
    if info is None:
        return False, []
    hits: list[SiteEvidence] = []
    for fact in fs.facts:
        if fact.name == "missing_trailer":
            anchor = fact.args[0]
        elif fact.name == "unpaired_call":
            anchor = fact.args[1]
        else:
            continue
        if anchor_contains(info.code_anchor, anchor):
            hits.append(_fact_evidence(fact, OMISSION))
    return bool(hits), hits


def _prefill_subgoal_necessity(fs: FactSet, args: tuple[str, ...]):
    """True/False when the task states whether the goal is necessary."""
    (goal_id,) = args
    for fact in fs.named("subgoal_necessary"):
        if fact.args[0] != goal_id:
            continue
        return fact.args[1] == "true"
    return None


_SPECS = [
    # fact extractors (arguments name the sorts they range over)
    ExtractorSpec("expr_form", ("var", "family", "anchor"), "fact"),
    ExtractorSpec("trailing_output", ("anchor", "tokens"), "fact"),
    ExtractorSpec("missing_trailer", ("anchor",), "fact", OMISSION),
    ExtractorSpec("unpaired_call", ("callee", "anchor"), "fact", OMISSION),
    ExtractorSpec("task_decomposed", ("goal",), "fact"),
    ExtractorSpec("subgoal_is_last", ("goal",), "fact"),
    ExtractorSpec("subgoal_necessary", ("goal", "flag"), "fact"),
    ExtractorSpec("has_sample_data", ("data",), "fact"),
    ExtractorSpec("anchor_unresolved", ("goal",), "fact"),
    # computed extractors
    ExtractorSpec("superlinear_vs_code", ("data", "anchor"), "computed",
                  MISMATCH, _superlinear_vs_code),
    ExtractorSpec("parent_decomposed", ("goal",), "computed",
                  SUPPORT, _parent_decomposed),
    ExtractorSpec("omission_in_code", ("goal",), "computed",
                  OMISSION, _omission_in_code),
    # prefill probes for HUMAN atoms
    ExtractorSpec("subgoal_necessity", ("goal",), "prefill",
                  SUPPORT, _prefill_subgoal_necessity),
]

REGISTRY: dict[str, ExtractorSpec] = {s.name: s for s in _SPECS}


def lookup(name: str) -> ExtractorSpec | None:
    return REGISTRY.get(name)
