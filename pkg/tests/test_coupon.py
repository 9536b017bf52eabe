"""Tests for :mod:`santalab.analysis.coupon`."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest

from santalab.analysis.coupon import (
    coupon_expectation,
    coupon_expectation_exact,
    coupon_with_replacement,
    simulate_coupon,
)
from santalab.analysis.montecarlo import monte_carlo
from santalab.errors import ConfigError, SizeCapError
from santalab.seeding import make_rng


@pytest.mark.parametrize(
    ("n", "k", "expected"),
    [
        (1, 1, Fraction(1)),
        (1, 7, Fraction(1)),
        (2, 1, Fraction(2)),
        (2, 2, Fraction(7, 3)),
    ],
)
def test_small_expectations(n: int, k: int, expected: Fraction) -> None:
    assert coupon_expectation_exact(n, k) == expected
    assert coupon_expectation(n, k) == pytest.approx(float(expected), rel=1e-10)


def test_closed_form_matches_exact_values() -> None:
    for n in range(1, 7):
        for k in range(1, 6):
            exact = float(coupon_expectation_exact(n, k))
            assert coupon_expectation(n, k) == pytest.approx(exact, rel=1e-9)


def test_single_copy_needs_every_draw() -> None:
    assert coupon_expectation(9, 1) == pytest.approx(9.0)


def test_large_k_approaches_replacement_value() -> None:
    value = coupon_expectation(1000, 10_000)
    assert math.isfinite(value)
    assert value == pytest.approx(coupon_with_replacement(1000), rel=1e-3)
    assert value < coupon_with_replacement(1000)


def test_exact_expectation_size_cap() -> None:
    with pytest.raises(SizeCapError):
        coupon_expectation_exact(50, 50)


def test_invalid_sizes() -> None:
    with pytest.raises(ConfigError):
        coupon_expectation(0, 3)
    with pytest.raises(ConfigError):
        simulate_coupon(3, 0, make_rng(0))


def test_simulation_range() -> None:
    rng = make_rng(5)
    draws = [simulate_coupon(4, 3, rng) for _ in range(200)]
    assert min(draws) >= 4
    assert max(draws) <= 4 * 3 - 3 + 1
    assert simulate_coupon(1, 5, rng) == 1


@pytest.mark.parametrize(("n", "k"), [(2, 1), (5, 3), (10, 2)])
def test_simulation_agrees_with_closed_form(n: int, k: int) -> None:
    report = monte_carlo("coupon", {"n": n, "k": k}, 20_000, master_seed=11)

    assert report.bound == pytest.approx(coupon_expectation(n, k))
    assert abs(report.mean - coupon_expectation(n, k)) <= 3 * report.std_error + 1e-9
    assert report.passed
