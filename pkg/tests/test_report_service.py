"""Tests for :mod:`santalab.services.report_service`."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from santalab.services.report_service import ReportService, format_value


@pytest.fixture()
def reports() -> ReportService:
    return ReportService()


def test_format_value() -> None:
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(3) == "3"
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value("uniform") == "uniform"


def test_render_csv(reports: ReportService) -> None:
    text = reports.render_csv(["policy", "value"], [["sgr", 0.5], ["greedy", None]])
    assert text == "policy,value\nsgr,0.5\ngreedy,\n"


def test_render_json_rounds_floats(reports: ReportService) -> None:
    text = reports.render_json({"z": 2 / 3, "a": [0.1 + 0.2]})

    assert json.loads(text) == {"a": [0.3], "z": 0.666666666667}
    assert text.index('"a"') < text.index('"z"')
    assert text.endswith("\n")


def test_emit_to_stdout(
    reports: ReportService, capsys: pytest.CaptureFixture[str]
) -> None:
    reports.emit("hello\n")
    assert capsys.readouterr().out == "hello\n"


def test_emit_to_file(reports: ReportService, tmp_path: Path) -> None:
    target = tmp_path / "deep" / "run.csv"
    reports.emit("a,b\n", target)
    assert target.read_text(encoding="utf-8") == "a,b\n"
