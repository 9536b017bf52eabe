"""Tests for :mod:`santalab.registry`."""

from __future__ import annotations

import pytest

from santalab.errors import ConfigError
from santalab.registry import Registry


def test_register_and_get() -> None:
    registry: Registry[int] = Registry("widget")
    registry.register("one", 1)
    registry.register("two", 2)

    assert registry.get("two") == 2
    assert tuple(registry.available()) == ("one", "two")
    assert "one" in registry


def test_register_replaces_existing() -> None:
    registry: Registry[str] = Registry("widget")
    registry.register("name", "old")
    registry.register("name", "new")
    assert registry.get("name") == "new"


def test_unknown_name_lists_known_entries() -> None:
    registry: Registry[int] = Registry("solver")
    registry.register("lp", 1)

    with pytest.raises(ConfigError, match=r"No solver registered as 'simplex'.*lp"):
        registry.get("simplex")


def test_unregister_is_tolerant() -> None:
    registry: Registry[int] = Registry("widget")
    registry.register("a", 1)
    registry.unregister("a")
    registry.unregister("a")
    assert "a" not in registry
