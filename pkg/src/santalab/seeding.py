"""Seed derivation and the counter-based random generator used everywhere.

Every random stream in the library is a Philox generator keyed by an unsigned
64-bit integer. Independent streams for trials and sub-tasks are derived by
hashing ``(master_seed, tag, index)``; the derivation depends only on its
arguments, so parallel trials reproduce exactly regardless of scheduling.
"""

from __future__ import annotations

import hashlib
from typing import Final

import numpy as np

from santalab.errors import ConfigError

SEED_BITS: Final = 64
_SEED_LIMIT: Final = 1 << SEED_BITS


def validate_seed(seed: int) -> int:
    """Return ``seed`` when it is a valid unsigned 64-bit integer."""

    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        msg = f"Seed must be an integer, got {type(seed).__name__}."
        raise ConfigError(msg)
    value = int(seed)
    if not 0 <= value < _SEED_LIMIT:
        msg = f"Seed must lie in [0, 2**64), got {value}."
        raise ConfigError(msg)
    return value


def derive_seed(master_seed: int, tag: str, index: int) -> int:
    """Return the 64-bit seed of stream ``index`` for purpose ``tag``."""

    master = validate_seed(master_seed)
    payload = f"{master}:{tag}:{int(index)}".encode()
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    """Return a Philox generator keyed directly by ``seed``."""

    return np.random.Generator(np.random.Philox(key=validate_seed(seed)))


__all__ = ["SEED_BITS", "derive_seed", "make_rng", "validate_seed"]
