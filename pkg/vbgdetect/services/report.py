"""Report serialization: CSV, JSON and a markdown table in the Operation/Parameter/Accuracy layout."""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

from vbgdetect.errors import FrameFormatError, InvalidInputError, MissingArtifactError
from vbgdetect.models.schemas import EvalReport, EvalRow, ReportFormat

logger = logging.getLogger(__name__)

CSV_FIELDS = ["scenario", "detector", "condition", "parameter", "accuracy", "n_test", "tp", "tn", "fp", "fn"]
NOTE_PREFIX = "# "

_SUFFIX_FORMATS = {".csv": ReportFormat.CSV, ".json": ReportFormat.JSON, ".md": ReportFormat.MARKDOWN}


def format_for(path: str | Path) -> ReportFormat:
    try:
        return _SUFFIX_FORMATS[Path(path).suffix.lower()]
    except KeyError as exc:
        raise InvalidInputError(f"cannot infer report format from '{path}'") from exc


def _row_dict(row: EvalRow) -> dict:
    d = row.model_dump()
    d["accuracy"] = row.accuracy_pct
    return {k: d[k] for k in CSV_FIELDS}


def render_csv(report: EvalReport) -> str:
    """Rows as CSV; notes follow as trailing ``# key: value`` comment lines."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        writer.writerow(_row_dict(row))
    for key in sorted(report.notes):
        buf.write(f"{NOTE_PREFIX}{key}: {report.notes[key]}\n")
    return buf.getvalue()


def render_json(report: EvalReport) -> str:
    payload = {"rows": [_row_dict(r) for r in report.rows], "notes": report.notes}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render_markdown(report: EvalReport) -> str:
    lines = [
        "| Scenario | Detector | Operation | Parameter | Accuracy | n_test |",
        "|---|---|---|---|---:|---:|",
    ]
    for r in report.rows:
        lines.append(f"| {r.scenario} | {r.detector} | {r.condition} | {r.parameter} | {r.accuracy_pct} | {r.n_test} |")
    for key in sorted(report.notes):
        lines.append("")
        lines.append(f"- {key}: {report.notes[key]}")
    return "\n".join(lines) + "\n"


_RENDERERS = {
    ReportFormat.CSV: render_csv,
    ReportFormat.JSON: render_json,
    ReportFormat.MARKDOWN: render_markdown,
}


def emit_report(report: EvalReport, path: str | Path, fmt: ReportFormat | str | None = None) -> Path:
    path = Path(path)
    fmt = format_for(path) if fmt is None else ReportFormat(fmt)
    text = _RENDERERS[fmt](report)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info("Wrote %d report rows to %s (%s)", len(report.rows), path, fmt.value)
    return path


def _parse_row(d: dict, origin: str) -> EvalRow:
    try:
        row = EvalRow(
            scenario=d["scenario"],
            detector=d["detector"],
            condition=d["condition"],
            parameter=d["parameter"],
            n_test=int(d["n_test"]),
            tp=int(d["tp"]),
            tn=int(d["tn"]),
            fp=int(d["fp"]),
            fn=int(d["fn"]),
        )
    except (KeyError, ValueError) as exc:
        raise FrameFormatError(f"{origin}: malformed report row ({exc})") from exc
    if d.get("accuracy") not in (None, row.accuracy_pct):
        raise FrameFormatError(
            f"{origin}: stored accuracy {d['accuracy']} disagrees with counts ({row.accuracy_pct})"
        )
    return row


def load_report(path: str | Path) -> EvalReport:
    """Parse a CSV or JSON report; markdown is output-only."""
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"report not found: {path}")
    fmt = format_for(path)
    text = path.read_text(encoding="utf-8")
    if fmt is ReportFormat.CSV:
        lines = text.splitlines()
        notes = dict(
            line[len(NOTE_PREFIX) :].split(": ", 1) for line in lines if line.startswith(NOTE_PREFIX)
        )
        body = [line for line in lines if not line.startswith(NOTE_PREFIX)]
        rows = [_parse_row(d, str(path)) for d in csv.DictReader(body)]
        return EvalReport(rows=rows, notes=notes)
    if fmt is ReportFormat.JSON:
        payload = json.loads(text)
        rows = [_parse_row(d, str(path)) for d in payload.get("rows", [])]
        return EvalReport(rows=rows, notes=payload.get("notes", {}))
    raise InvalidInputError("markdown reports cannot be loaded; use csv or json")
