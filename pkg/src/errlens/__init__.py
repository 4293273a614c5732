"""Rule-driven code inspection: flag the places humans get wrong first.

The toolkit parses a small demo language plus a structured task document,
extracts facts about both, and evaluates a catalog of inspection rules
(IF applicability / WHEN condition / THEN tendency) over them. Matched
rule instances become ranked sites with evidence, open questions for the
inspector, and timing metrics over the defects they help find.
"""

from .catalog import (Catalog, CatalogError, parse_catalog, serialize_catalog,
                      validate_catalog)
from .facts import FactSet, extract_facts
from .fitting import FamilySelection, FitError, ModelFit, fit_family, select_family
from .matcher import (Binding, Question, Site, enumerate_bindings,
                      evaluate_scenario, match_all, rank_sites)
from .minilang import MiniLangError, Program, classify_expression, parse_program
from .session import (DefectRecord, FakeClock, Session, SessionError,
                      SessionStore, SystemClock, TimingMetrics,
                      compute_timing_metrics, load_session, replay_session,
                      save_session)
from .taskspec import TaskSpec, TaskSpecError, load_taskspec, load_taskspec_file

__version__ = "0.1.0"

__all__ = [
    "Binding", "Catalog", "CatalogError", "DefectRecord", "FactSet",
    "FakeClock", "FamilySelection", "FitError", "MiniLangError", "ModelFit",
    "Program", "Question", "Session", "SessionError", "SessionStore", "Site",
    "SystemClock", "TaskSpec", "TaskSpecError", "TimingMetrics",
    "classify_expression", "compute_timing_metrics", "enumerate_bindings",
    "evaluate_scenario", "extract_facts", "fit_family", "load_session",
    "load_taskspec", "load_taskspec_file", "match_all", "parse_catalog",
    "parse_program", "rank_sites", "replay_session", "save_session",
    "select_family", "serialize_catalog", "validate_catalog", "__version__",
]
