"""Report generation: one content model, several surfaces.

The text and structured renderings carry identical content, so the JSON
form re-ingests to an equal Report. The file writer can also drop the
site/defect tables as CSV and render the fit-curve and defect-timeline
figures next to them.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .session import Session, canonical_json


@dataclass
class Report:
    catalog_version: str
    session_id: str
    inputs: dict = field(default_factory=dict)   # name -> {path, sha256}
    counts: dict = field(default_factory=dict)
    sites: list = field(default_factory=list)
    questions: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    defects: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    started_at: float | None = None

    def to_json(self) -> dict:
        out = {
            "catalog_version": self.catalog_version,
            "session_id": self.session_id,
            "inputs": self.inputs,
            "counts": self.counts,
            "sites": self.sites,
            "questions": self.questions,
            "transcript": self.transcript,
            "defects": self.defects,
            "timing": self.timing,
        }
        if self.started_at is not None:
            out["started_at"] = self.started_at
        return out

    @staticmethod
    def from_json(obj: dict) -> "Report":
        return Report(
            catalog_version=obj["catalog_version"],
            session_id=obj["session_id"],
            inputs=obj["inputs"],
            counts=obj["counts"],
            sites=obj["sites"],
            questions=obj["questions"],
            transcript=obj["transcript"],
            defects=obj["defects"],
            timing=obj["timing"],
            started_at=obj.get("started_at"),
        )


def build_report(session: Session, include_timestamps: bool = False) -> Report:
    sites = [s.to_json() for s in session.sites]
    by_status: dict[str, int] = {}
    for s in session.sites:
        by_status[s.status] = by_status.get(s.status, 0) + 1
    timing = session.timing_metrics().to_json()
    return Report(
        catalog_version=session.catalog.version,
        session_id=session.id,
        inputs={name: {"path": inp.path, "sha256": inp.sha256}
                for name, inp in session.inputs.items()},
        counts={"sites": len(sites), "by_status": by_status,
                "flagged": len(session.flagged_sites()),
                "pending_questions": len(session.pending_questions()),
                "defects": len(session.defects)},
        sites=sites,
        questions=[q.to_json() for q in session.pending_questions()],
        transcript=list(session.answer_log),
        defects=[d.to_json() for d in session.defects],
        timing=timing,
        started_at=session.started_at if include_timestamps else None,
    )


def _minutes(m: float) -> str:
    return f"{m:g} min"


def render_text(report: Report) -> str:
    lines: list[str] = []
    w = lines.append
    w("INSPECTION REPORT")
    w("=================")
    w(f"session: {report.session_id}")
    if report.started_at is not None:
        w(f"started at: {report.started_at}")
    w(f"catalog version: {report.catalog_version}")
    for name in ("program", "task", "catalog"):
        meta = report.inputs.get(name, {})
        path = meta.get("path") or "<inline>"
        w(f"{name}: {path} sha256={meta.get('sha256', '')}")
    w("")

    w(f"SITES ({report.counts.get('sites', 0)})")
    w("-----")
    if not report.sites:
        w("no sites")
    for i, s in enumerate(report.sites, start=1):
        w(f"S{i}. [{s['status']}] {s['scenario']} "
          f"(severity {s['severity']}, mode {s['mode']})")
        w(f"    site: {s['key']}")
        if s.get("message"):
            w(f"    note: {s['message']}")
        if s.get("evidence"):
            w("    evidence:")
            for e in s["evidence"]:
                w(f"      - {_evidence_line(e)}")
        if s.get("pending_questions"):
            w("    open questions:")
            for q in s["pending_questions"]:
                w(f"      - [{q['id']}] {q['text']}")
    w("")

    w(f"QUESTIONS ({len(report.questions)})")
    w("---------")
    if not report.questions:
        w("none pending")
    for q in report.questions:
        w(f"- [{q['id']}] {q['text']}")
    w("")

    w(f"ANSWERS ({len(report.transcript)})")
    w("-------")
    if not report.transcript:
        w("none recorded")
    for entry in report.transcript:
        w(f"- [{entry['question_id']}] {entry['answer']} "
          f"at {_minutes(entry['minutes_from_start'])}: {entry['text']}")
    w("")

    w(f"DEFECTS ({len(report.defects)})")
    w("-------")
    if not report.defects:
        w("none logged")
    for d in report.defects:
        mark = "targeted" if d["targeted"] else "other"
        site = f" (site {d['linked_site']})" if d.get("linked_site") else ""
        w(f"- {d['id']} [{mark}] at {_minutes(d['minutes_from_start'])}"
          f"{site}: {d['description']}")
    w("")

    w("TIMING")
    w("------")
    targeted = report.timing.get("targeted_minutes", {})
    if targeted:
        for did in sorted(targeted):
            w(f"targeted {did}: {_minutes(targeted[did])}")
    else:
        w("no targeted defects")
    mean = report.timing.get("mean_other_minutes")
    if mean is None:
        w("no other defects")
    else:
        w(f"mean time for other defects: {_minutes(mean)}")
    return "\n".join(lines) + "\n"


def _evidence_line(e: dict) -> str:
    kind = e.get("kind", "support")
    if e.get("note"):
        return f"{kind}: {e['note']}"
    fact = e.get("fact")
    if fact:
        where = ", ".join(_evidence_where(v) for v in fact.get("evidence", []))
        args = ", ".join(fact.get("args", []))
        loc = f" at {where}" if where else ""
        return f"{kind} fact: {fact['name']}({args}){loc}"
    return kind


def _evidence_where(ev: dict) -> str:
    span = ev.get("span")
    if span:
        name = ev.get("file") or "<source>"
        return (f"{name}:{span['line']}:{span['column']}-"
                f"{span['end_line']}:{span['end_column']}")
    return ev.get("task_path") or "<task>"


def render_json(report: Report) -> str:
    return canonical_json(report.to_json())


def report_from_json(text: str) -> Report:
    return Report.from_json(json.loads(text))


def generate_report(session: Session, fmt: str = "text",
                    include_timestamps: bool = False) -> str:
    report = build_report(session, include_timestamps=include_timestamps)
    if fmt == "text":
        return render_text(report)
    if fmt == "structured":
        return render_json(report)
    raise ValueError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# File outputs: CSV tables and figures

def _safe_name(key: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", key).strip("_")


def write_csv_tables(report: Report, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sites_path = out / "sites.csv"
    with sites_path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["rank", "key", "scenario", "mode", "status", "severity",
                     "tendency", "binding", "message"])
        for i, s in enumerate(report.sites, start=1):
            binding = ";".join(f"{k}={v}" for k, v in s["binding"].items())
            wr.writerow([i, s["key"], s["scenario"], s["mode"], s["status"],
                         s["severity"], s["tendency"], binding, s["message"]])
    defects_path = out / "defects.csv"
    with defects_path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["id", "minutes_from_start", "targeted", "linked_site",
                     "description"])
        for d in report.defects:
            wr.writerow([d["id"], d["minutes_from_start"],
                         str(bool(d["targeted"])).lower(),
                         d.get("linked_site") or "", d["description"]])
    return [sites_path, defects_path]


def _predict(fit: dict, x: float) -> float:
    params = fit["params"]
    family = fit["family"]
    if family == "LINEAR":
        return params["a"] * x + params.get("b", 0.0)
    if family == "POWER":
        return params["a"] * x ** params["p"]
    return params["a"] * params["d"] ** x


def render_figures(session: Session, out_dir: str | Path) -> list[Path]:
    """Fit-curve plots for data/code mismatches plus a defect timeline."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    for site in session.sites:
        for e in site.evidence:
            detail = e.detail or {}
            selection = detail.get("selection")
            block = session.facts.data_blocks.get(detail.get("data_block", ""))
            if not selection or block is None:
                continue
            xs = [p[0] for p in block.points]
            ys = [p[1] for p in block.points]
            lo, hi = min(xs), max(xs)
            grid = [lo + (hi - lo) * i / 99.0 for i in range(100)]
            fig, ax = plt.subplots(figsize=(6, 4))
            ax.scatter(xs, ys, color="black", zorder=3, label="sample data")
            best = selection["best"]
            ax.plot(grid, [_predict(best, x) for x in grid],
                    label=f"best fit: {best['family']}")
            code_form = detail.get("code_form") or {}
            if code_form.get("family") == "linear":
                a = code_form["coefficients"].get("a", 0.0)
                b = code_form["coefficients"].get("b", 0.0)
                ax.plot(grid, [a * x + b for x in grid], linestyle="--",
                        label="as coded (linear)")
            ax.set_xlabel(block.x_name)
            ax.set_ylabel(block.y_name)
            ax.set_title(f"{site.scenario_id}: data vs code at "
                         f"{detail.get('anchor', '?')}")
            ax.legend()
            fig.tight_layout()
            path = out / f"fit_{_safe_name(site.key)}.png"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)

    if session.defects:
        fig, ax = plt.subplots(figsize=(6, 2.5))
        for d in session.defects:
            color = "tab:red" if d.targeted else "tab:blue"
            ax.scatter([d.minutes_from_start], [0], color=color, zorder=3)
            ax.annotate(d.id, (d.minutes_from_start, 0),
                        textcoords="offset points", xytext=(0, 8),
                        ha="center", fontsize=8)
        ax.set_yticks([])
        ax.set_xlabel("minutes from session start")
        ax.set_title("defect timeline (red: targeted)")
        fig.tight_layout()
        path = out / "timeline.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


def write_report_files(session: Session, out_dir: str | Path, fmt: str = "text",
                       include_timestamps: bool = False) -> list[Path]:
    """Report + CSV tables + figures in one directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = build_report(session, include_timestamps=include_timestamps)
    written: list[Path] = []
    if fmt == "structured":
        report_path = out / "report.json"
        report_path.write_text(render_json(report))
    else:
        report_path = out / "report.txt"
        report_path.write_text(render_text(report))
    written.append(report_path)
    written.extend(write_csv_tables(report, out))
    written.extend(render_figures(session, out))
    return written
