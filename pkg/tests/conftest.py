"""Test configuration for the santalab project."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest


def pytest_configure() -> None:
    """Ensure the `src` directory is importable during local test runs."""

    root = Path(__file__).resolve().parent.parent
    src_path = root / "src"
    if str(src_path) not in sys.path:
        sys.path.insert(0, str(src_path))


@pytest.fixture()
def rng() -> np.random.Generator:
    """Fixed-seed generator for property tests."""

    from santalab.seeding import make_rng

    return make_rng(20240601)
