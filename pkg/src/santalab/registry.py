"""Name-keyed registries for solvers, bounds and experiments."""

from __future__ import annotations

from collections.abc import Iterable
from typing import Generic, TypeVar

from santalab.errors import ConfigError

T = TypeVar("T")


class Registry(Generic[T]):
    """Solvers, bounds or experiments looked up by name.

    Parameters
    ----------
    kind:
        Human readable label used in error messages (``"solver"``,
        ``"experiment"`` ...).
    """

    def __init__(self, kind: str) -> None:
        self._kind = kind
        self._handlers: dict[str, T] = {}

    def register(self, name: str, handler: T) -> None:
        """File ``handler`` under ``name``; a later registration wins."""

        self._handlers[name] = handler

    def unregister(self, name: str) -> None:
        """Drop ``name``; unknown names are ignored."""

        self._handlers.pop(name, None)

    def available(self) -> Iterable[str]:
        """Names in the order they were first filed."""

        return tuple(self._handlers.keys())

    def get(self, name: str) -> T:
        """Return the entry for ``name``.

        Raises :class:`ConfigError` naming the known entries otherwise.
        """

        if name not in self._handlers:
            known = ", ".join(self._handlers) or "none"
            msg = f"No {self._kind} registered as '{name}' (known: {known})."
            raise ConfigError(msg)
        return self._handlers[name]

    def __contains__(self, name: object) -> bool:
        return name in self._handlers


__all__ = ["Registry"]
