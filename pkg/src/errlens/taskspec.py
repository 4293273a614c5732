"""Task specification documents: goal decomposition, sample data, expected
output trailer, and acquire/release pair table.

Loaded from JSON (schema shipped at errlens/data/taskspec.schema.json) and
validated structurally before use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema


class TaskSpecError(Exception):
    """Invalid task specification document."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class GoalNode:
    id: str
    description: str
    children: list["GoalNode"] = field(default_factory=list)
    # True / False when the task states it, None when unknown (ask the inspector)
    necessary_for_parent: bool | None = None
    code_anchor: str | None = None


@dataclass
class DataBlock:
    """One sample-data series: y observed against x."""

    id: str
    x_name: str
    y_name: str
    points: list[tuple[float, float]]
    units: dict[str, str] = field(default_factory=dict)

    def label(self) -> str:
        return f"sample data '{self.id}' ({self.y_name} against {self.x_name})"

    def to_json(self) -> dict:
        return {"id": self.id, "x": self.x_name, "y": self.y_name,
                "units": dict(self.units),
                "points": [[x, y] for x, y in self.points]}

    @staticmethod
    def from_json(obj: dict) -> "DataBlock":
        return DataBlock(obj["id"], obj["x"], obj["y"],
                         [(float(p[0]), float(p[1])) for p in obj["points"]],
                         dict(obj.get("units", {})))


@dataclass
class TrailerSpec:
    """Required trailing output tokens; `anchor` narrows where they must appear."""

    tokens: list[str]
    anchor: str | None = None


@dataclass
class FitConfig:
    tie_epsilon: float = 0.01
    min_points: int = 3
    superlinearity_margin: float = 0.2


@dataclass
class TaskSpec:
    name: str
    root: GoalNode | None = None
    sample_data: list[DataBlock] = field(default_factory=list)
    expected_trailer: TrailerSpec | None = None
    pair_table: list[tuple[str, str]] = field(default_factory=list)
    fit: FitConfig = field(default_factory=FitConfig)
    path: str | None = None

    def goals(self) -> list[GoalNode]:
        """All goal nodes in document (pre-order) order."""
        out: list[GoalNode] = []

        def visit(g: GoalNode):
            out.append(g)
            for c in g.children:
                visit(c)

        if self.root is not None:
            visit(self.root)
        return out


_SCHEMA = None


def schema() -> dict:
    global _SCHEMA
    if _SCHEMA is None:
        text = resources.files("errlens").joinpath("data/taskspec.schema.json").read_text()
        _SCHEMA = json.loads(text)
    return _SCHEMA


def _parse_goal(obj: dict) -> GoalNode:
    necessary = obj.get("necessary_for_parent", "unknown")
    if necessary == "unknown":
        necessary = None
    return GoalNode(
        id=obj["id"],
        description=obj.get("description", obj["id"]),
        children=[_parse_goal(c) for c in obj.get("children", [])],
        necessary_for_parent=necessary,
        code_anchor=obj.get("code_anchor"),
    )


def load_taskspec(obj: dict, path: str | None = None) -> TaskSpec:
    """Build a validated TaskSpec from a parsed JSON document."""
    diagnostics: list[str] = []
    validator = jsonschema.Draft202012Validator(schema())
    for err in sorted(validator.iter_errors(obj), key=str):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        diagnostics.append(f"{where}: {err.message}")
    if diagnostics:
        raise TaskSpecError(diagnostics)

    goals = obj.get("goals", [])
    if len(goals) > 1:
        raise TaskSpecError(["goals: a task has a single root goal"])
    root = _parse_goal(goals[0]) if goals else None

    # goal ids must be unique across the tree
    seen: set[str] = set()
    spec = TaskSpec(name=obj.get("task", "task"), root=root, path=path)
    for g in spec.goals():
        if g.id in seen:
            diagnostics.append(f"duplicate goal id {g.id!r}")
        seen.add(g.id)

    blocks: list[DataBlock] = []
    for i, blk in enumerate(obj.get("sample_data", [])):
        block_id = blk.get("name", f"data{i}")
        points = [(float(p[0]), float(p[1])) for p in blk["points"]]
        blocks.append(DataBlock(block_id, blk["x"], blk["y"], points,
                                dict(blk.get("units", {}))))
    ids = [b.id for b in blocks]
    if len(set(ids)) != len(ids):
        diagnostics.append("sample_data: duplicate block names")
    spec.sample_data = blocks

    trailer = obj.get("expected_trailer")
    if trailer is not None:
        spec.expected_trailer = TrailerSpec(list(trailer["tokens"]), trailer.get("anchor"))

    spec.pair_table = [(p[0], p[1]) for p in obj.get("pair_table", [])]

    fit = obj.get("fit", {})
    spec.fit = FitConfig(
        tie_epsilon=float(fit.get("tie_epsilon", 0.01)),
        min_points=int(fit.get("min_points", 3)),
        superlinearity_margin=float(fit.get("superlinearity_margin", 0.2)),
    )

    if diagnostics:
        raise TaskSpecError(diagnostics)
    return spec


def load_taskspec_file(path: str | Path) -> TaskSpec:
    p = Path(path)
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise TaskSpecError([f"{p}: not valid JSON: {e}"]) from e
    return load_taskspec(obj, str(p))
