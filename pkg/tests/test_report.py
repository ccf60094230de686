"""Tests for report rows and their CSV / JSON / markdown renderings."""

from __future__ import annotations

import pytest
from pydantic import ValidationError

from vbgdetect.errors import FrameFormatError, InvalidInputError, MissingArtifactError
from vbgdetect.models.schemas import EvalReport, EvalRow
from vbgdetect.services.report import (
    CSV_FIELDS,
    emit_report,
    format_for,
    load_report,
    render_csv,
    render_markdown,
)


@pytest.fixture
def report():
    return EvalReport(
        rows=[
            EvalRow(scenario="robustness", detector="cnn_comat", condition="clean", n_test=3, tp=1, tn=1, fp=1, fn=0),
            EvalRow(
                scenario="robustness",
                detector="cnn_comat",
                condition="median",
                parameter="3",
                n_test=8,
                tp=4,
                tn=4,
                fp=0,
                fn=0,
            ),
        ],
        notes={"model_path": "runs/cnn.vbgm"},
    )


# ------------------------------------------------------------------
# Rows
# ------------------------------------------------------------------


def test_accuracy_is_formatted_with_two_decimals(report):
    assert report.rows[0].accuracy_pct == "66.67%"
    assert report.rows[1].accuracy_pct == "100.00%"


def test_counts_must_add_up():
    with pytest.raises(ValidationError):
        EvalRow(scenario="s", detector="d", condition="c", n_test=4, tp=1, tn=1, fp=1, fn=0)


def test_row_lookup(report):
    assert report.row("median", "3").n_test == 8
    with pytest.raises(KeyError):
        report.row("gamma", "0.9")


# ------------------------------------------------------------------
# Rendering
# ------------------------------------------------------------------


def test_csv_layout(report):
    lines = render_csv(report).splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    assert lines[1] == "robustness,cnn_comat,clean,-,66.67%,3,1,1,1,0"
    assert len(lines) == 1 + len(report.rows) + len(report.notes)
    assert lines[-1] == "# model_path: runs/cnn.vbgm"


def test_markdown_table(report):
    text = render_markdown(report)
    assert text.startswith("| Scenario | Detector | Operation | Parameter | Accuracy | n_test |")
    assert "| robustness | cnn_comat | median | 3 | 100.00% | 8 |" in text
    assert "- model_path: runs/cnn.vbgm" in text


@pytest.mark.parametrize("suffix", [".csv", ".json"])
def test_written_reports_load_back(tmp_path, report, suffix):
    path = emit_report(report, tmp_path / f"r{suffix}")
    loaded = load_report(path)
    assert loaded.rows == report.rows
    assert loaded.notes == report.notes


def test_rendering_is_deterministic(tmp_path, report):
    a = emit_report(report, tmp_path / "a.json").read_bytes()
    b = emit_report(report, tmp_path / "b.json").read_bytes()
    assert a == b


def test_tampered_accuracy_is_detected(tmp_path, report):
    path = emit_report(report, tmp_path / "r.csv")
    path.write_text(path.read_text().replace("66.67%", "99.00%"))
    with pytest.raises(FrameFormatError):
        load_report(path)


def test_format_inference_and_errors(tmp_path, report):
    assert format_for("x.md").value == "markdown"
    with pytest.raises(InvalidInputError):
        format_for("x.txt")
    with pytest.raises(MissingArtifactError):
        load_report(tmp_path / "absent.csv")
    md = emit_report(report, tmp_path / "r.md")
    with pytest.raises(InvalidInputError):
        load_report(md)


# ------------------------------------------------------------------
# Run trace
# ------------------------------------------------------------------


def test_trace_records_steps_and_totals(tmp_path):
    import json

    import numpy as np

    from vbgdetect.utils.trace import RunTrace

    trace = RunTrace()
    with trace.step("load: a", "load") as ev:
        ev.output_summary = "3 frames"
    with trace.step("train: cnn_comat", "train") as ev:
        ev.details = {"final_loss": np.float32(0.25), "epochs": np.int64(2)}
    with pytest.raises(RuntimeError):
        with trace.step("evaluate: clean", "evaluate"):
            raise RuntimeError("boom")

    assert len(trace) == 3
    assert trace.steps[2].failed and trace.steps[2].error == "RuntimeError: boom"
    assert set(trace.totals()) == {"load", "train", "evaluate"}

    path = trace.write(tmp_path / "out.csv")
    assert path.name == "out.csv.trace.json"
    payload = json.loads(path.read_text())
    assert [s["kind"] for s in payload["steps"]] == ["load", "train", "evaluate"]
    assert payload["steps"][1]["details"] == {"final_loss": 0.25, "epochs": 2}


def test_trace_rejects_unknown_kind():
    from vbgdetect.utils.trace import RunTrace

    with pytest.raises(ValueError):
        with RunTrace().step("x", "upload"):
            pass
