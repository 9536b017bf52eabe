"""Tests for :mod:`santalab.analysis.prefix`."""

from __future__ import annotations

import numpy as np
import pytest

from santalab.analysis.prefix import prefix_stats
from santalab.core import ArrivalOrder, Instance
from santalab.errors import DimensionError, DomainError
from santalab.instances import gen_binomial_public_private, gen_public_private


def test_public_items_first_hide_private_type() -> None:
    instance = gen_public_private(2, 2)
    stats = prefix_stats(instance, ArrivalOrder((2, 3, 0, 1)), 0.5)

    assert stats.eps_fraction == 0.5
    assert stats.prefix_len == 2
    assert stats.public_count == 2
    assert stats.public_fraction_of_k == 1.0
    assert stats.missing_private_types == (0,)
    assert not stats.all_private_types_seen


def test_full_stream_sees_every_type() -> None:
    instance = gen_public_private(5, 3)
    stats = prefix_stats(instance, ArrivalOrder.identity(instance.n_items), 1.0)

    assert stats.public_count == 3
    assert stats.all_private_types_seen


def test_prefix_length_rounds_down() -> None:
    instance = gen_public_private(3, 3)
    stats = prefix_stats(instance, ArrivalOrder.identity(9), 0.3)
    assert stats.eps_fraction == 0.3
    assert stats.prefix_len == 2
    assert stats.public_count == 0
    assert stats.missing_private_types == (1,)


def test_agents_without_private_items_are_never_missing() -> None:
    instance = gen_binomial_public_private(3, 4, 0.0, seed=0)
    stats = prefix_stats(instance, ArrivalOrder.identity(12), 0.1)
    assert stats.missing_private_types == ()


def test_prefix_requires_flags_and_valid_eps() -> None:
    instance = gen_public_private(2, 2)
    with pytest.raises(DomainError):
        prefix_stats(instance, ArrivalOrder.identity(4), 0.0)
    with pytest.raises(DimensionError):
        prefix_stats(instance, ArrivalOrder.identity(3), 0.5)
    with pytest.raises(DomainError):
        prefix_stats(Instance(np.ones((2, 2))), ArrivalOrder.identity(2), 0.5)
