"""Report documents for every command, rendered as text or JSON.

Each builder returns an ordered mapping with a ``version`` and a
``command`` field.  :func:`emit_report` renders that mapping either as
indented text or as JSON with sorted keys; both carry the same data.
A validity counterexample is embedded as a frame-file mapping, so a JSON
report can be passed back to ``eval --frame``.
"""

from __future__ import annotations

import json

from .lang.parser import format_formula
from .model.fileio import FrameDocument, document_data
from .model.semantics import ValidityReport
from .proof import Proof, ProofVerdict

REPORT_VERSION = 1
FORMATS = ("text", "structured")


def _doc(command: str, **fields) -> dict:
    return {"version": REPORT_VERSION, "command": command, **fields}


def proof_report(path: str, proof: Proof, verdict: ProofVerdict) -> dict:
    lines = [f"{k}. {format_formula(ln.formula)} ; {ln.justification}" for k, ln in enumerate(proof.lines, 1)]
    doc = _doc("prove", file=path, verdict=verdict.summary(), accepted=verdict.accepted,
               premises=[format_formula(f) for f in proof.premises], lines=lines)
    if not verdict.accepted:
        doc["failed_line"] = verdict.line
        doc["source_line"] = verdict.source_line
        doc["reason"] = verdict.reason
    return doc


def validity_report(report: ValidityReport, timing: bool = False) -> dict:
    doc = _doc("validity", formula=format_formula(report.formula), kind=report.kind, bounds=dict(report.bounds),
               verdict=report.verdict, incomplete=report.incomplete,
               counts={"frames_checked": report.frames_checked,
                       "interpretations_checked": report.interpretations_checked,
                       "valuations_checked": report.valuations_checked,
                       "skipped_non_normal": report.skipped_non_normal,
                       "skipped_premises": report.skipped_premises},
               skipped_frames=[f"{label}: {why}" for label, why in report.skipped_frames])
    ce = report.counterexample
    if ce is not None:
        doc["counterexample"] = document_data(
            FrameDocument(ce.frame, ce.denotation, ce.valuation, report.formula))
    if timing:
        doc["elapsed_seconds"] = round(report.elapsed, 4)
    return doc


def emit_report(doc: dict, fmt: str = "text") -> str:
    """Render a report document; ``fmt`` is ``text`` or ``structured`` (JSON)."""
    if fmt == "structured":
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    return "\n".join(_text_lines(doc, 0)) + "\n"


def _scalar(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def _text_lines(value, indent: int) -> list[str]:
    pad = "  " * indent
    out: list[str] = []
    if isinstance(value, dict):
        for k, v in value.items():
            if k == "version" and indent == 0:
                continue
            if isinstance(v, (dict, list)) and v:
                out.append(f"{pad}{k}:")
                out.extend(_text_lines(v, indent + 1))
            elif isinstance(v, (dict, list)):
                out.append(f"{pad}{k}: (none)")
            else:
                out.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, dict):
                inner = _text_lines(v, indent + 1)
                out.append(f"{pad}- {inner[0].strip()}")
                out.extend(inner[1:])
            elif isinstance(v, list):
                out.append(f"{pad}- [{', '.join(_scalar(x) for x in v)}]")
            else:
                out.append(f"{pad}- {_scalar(v)}")
    else:
        out.append(pad + _scalar(value))
    return out
