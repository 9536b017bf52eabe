"""File IO routines for santalab instances, orders and reports."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Final, NoReturn

from santalab.core import ArrivalOrder, Instance
from santalab.errors import ConfigError, DataError

logger = logging.getLogger(__name__)


def _reject_constant(token: str) -> NoReturn:
    msg = f"Non-finite number {token!r} is not permitted."
    raise DataError(msg)


class FileService:
    """Read and write the JSON files the laboratory exchanges.

    Instances use the canonical layout ``{"n", "m", "values", "metadata"}``
    in that field order; NaN and infinities are rejected in both directions.
    Reports are written with sorted keys so reruns diff cleanly.
    """

    _ENCODING: Final = "utf-8"
    _JSON_SUFFIX: Final = ".json"

    def read_json(self, path: Path) -> Any:
        """Return the decoded JSON document stored at ``path``."""

        if path.suffix.lower() != self._JSON_SUFFIX:
            msg = f"Unsupported file format: {path.suffix}"
            raise DataError(msg)
        try:
            text = path.read_text(encoding=self._ENCODING)
        except UnicodeDecodeError as exc:
            msg = f"{path} is not valid UTF-8: {exc.reason}"
            raise DataError(msg) from exc
        try:
            return json.loads(text, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            msg = f"Malformed JSON in {path}: {exc}"
            raise DataError(msg) from exc

    def read_instance(self, path: Path) -> Instance:
        """Load and validate the instance stored at ``path``."""

        payload = self.read_json(path)
        if not isinstance(payload, dict):
            msg = f"{path} does not contain a JSON object."
            raise DataError(msg)
        instance = Instance.from_payload(payload)
        logger.debug(
            "read instance %s (n=%d, m=%d)", path, instance.n_agents, instance.n_items
        )
        return instance

    def write_instance(self, path: Path, instance: Instance) -> None:
        """Persist ``instance`` to ``path`` in canonical field order."""

        text = json.dumps(instance.to_payload(), allow_nan=False) + "\n"
        self.write_text(path, text)
        logger.info(
            "wrote instance %s (n=%d, m=%d)", path, instance.n_agents, instance.n_items
        )

    def read_order(self, path: Path) -> ArrivalOrder:
        """Load an arrival order stored as a JSON list of item indices."""

        payload = self.read_json(path)
        if not isinstance(payload, list) or not all(
            isinstance(index, int) and not isinstance(index, bool) for index in payload
        ):
            msg = f"{path} must contain a JSON list of item indices."
            raise DataError(msg)
        try:
            return ArrivalOrder(tuple(payload))
        except ConfigError as exc:
            raise DataError(str(exc)) from exc

    def write_order(self, path: Path, order: ArrivalOrder) -> None:
        self.write_text(path, json.dumps(list(order.permutation)) + "\n")

    def write_json(self, path: Path, payload: object) -> None:
        """Write ``payload`` as indented JSON with sorted keys."""

        self.write_text(
            path, json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"
        )

    def write_text(self, path: Path, text: str) -> None:
        """Write ``text`` to ``path`` creating parent directories as needed."""

        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding=self._ENCODING)


__all__ = ["FileService"]
