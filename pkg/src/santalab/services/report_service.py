"""Rendering of run and experiment results as CSV or JSON text."""

from __future__ import annotations

import csv
import io
import json
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Final

from santalab.services.file_service import FileService

SIGNIFICANT_DIGITS: Final = 12


def format_value(value: object) -> str:
    """Return the locale-free CSV spelling of ``value``.

    Floats carry 12 significant digits; ``None`` becomes an empty cell.
    """

    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def _round_floats(payload: object) -> object:
    if isinstance(payload, float):
        return float(format_value(payload))
    if isinstance(payload, dict):
        return {key: _round_floats(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_round_floats(value) for value in payload]
    return payload


class ReportService:
    """Turn result rows into text and deliver it to a file or stdout."""

    def __init__(self, file_service: FileService | None = None) -> None:
        self._file_service = file_service or FileService()

    def render_csv(
        self, header: Sequence[str], rows: Iterable[Sequence[object]]
    ) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
        return buffer.getvalue()

    def render_json(self, payload: object) -> str:
        """Return ``payload`` as sorted, indented JSON with 12-digit floats."""

        return (
            json.dumps(
                _round_floats(payload), indent=2, sort_keys=True, allow_nan=False
            )
            + "\n"
        )

    def emit(self, text: str, out: Path | None = None) -> None:
        """Write ``text`` to ``out`` or to standard output when ``out`` is None."""

        if out is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        self._file_service.write_text(out, text)


__all__ = ["SIGNIFICANT_DIGITS", "ReportService", "format_value"]
