"""Tests for :mod:`santalab.seeding`."""

from __future__ import annotations

import numpy as np
import pytest

from santalab.errors import ConfigError
from santalab.seeding import derive_seed, make_rng, validate_seed


def test_make_rng_is_reproducible() -> None:
    first = make_rng(42).random(5)
    assert np.array_equal(first, make_rng(42).random(5))
    assert not np.array_equal(first, make_rng(43).random(5))


def test_derive_seed_depends_on_every_argument() -> None:
    base = derive_seed(1, "trial", 0)
    assert base == derive_seed(1, "trial", 0)
    assert len({base, derive_seed(2, "trial", 0), derive_seed(1, "order", 0)}) == 3
    assert base != derive_seed(1, "trial", 1)
    assert 0 <= base < 2**64


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5, True, "7"])
def test_validate_seed_rejects(seed: object) -> None:
    with pytest.raises(ConfigError):
        validate_seed(seed)  # type: ignore[arg-type]


def test_validate_seed_accepts_numpy_integers() -> None:
    assert validate_seed(np.uint64(2**63)) == 2**63
    assert validate_seed(2**64 - 1) == 2**64 - 1
