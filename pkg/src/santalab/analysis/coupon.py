"""Coupon collection without replacement.

A bag holds ``k`` copies of each of ``n`` coupon types and is emptied in a
uniformly random order. ``N`` is the number of draws until every type has been
seen at least once.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Final

import numpy as np
from scipy.special import digamma, gammaln

from santalab.errors import ConfigError, SizeCapError

EXACT_COUPON_CAP: Final = 2000


def _require_sizes(n: int, k: int) -> tuple[int, int]:
    if n < 1 or k < 1:
        msg = f"Coupon collection needs n >= 1 and k >= 1, got n={n}, k={k}."
        raise ConfigError(msg)
    return int(n), int(k)


def coupon_expectation(n: int, k: int) -> float:
    """Return the closed form ``(nk + 1)(1 - n! G(1 + 1/k) / G(n + 1 + 1/k))``.

    The gamma ratio is evaluated in log space, so large ``n`` and ``k`` do not
    overflow.
    """

    n, k = _require_sizes(n, k)
    inverse = 1.0 / k
    log_ratio = gammaln(n + 1) + gammaln(1.0 + inverse) - gammaln(n + 1 + inverse)
    return float((n * k + 1) * -np.expm1(log_ratio))


def coupon_expectation_exact(n: int, k: int) -> Fraction:
    """Return ``E[N]`` as an exact fraction by inclusion-exclusion.

    ``P(N > t)`` is the chance that some type is still missing after ``t``
    draws; summing it over ``t`` gives the expectation.
    """

    n, k = _require_sizes(n, k)
    total = n * k
    if total > EXACT_COUPON_CAP:
        msg = f"Exact coupon expectation is limited to nk <= {EXACT_COUPON_CAP}."
        raise SizeCapError(msg)
    expectation = Fraction(0)
    for draws in range(total):
        missing = sum(
            (-1) ** (j + 1) * math.comb(n, j) * math.comb((n - j) * k, draws)
            for j in range(1, n + 1)
        )
        expectation += Fraction(missing, math.comb(total, draws))
    return expectation


def coupon_with_replacement(n: int) -> float:
    """Return ``n H_n``, the classic expectation when draws are replaced."""

    if n < 1:
        msg = f"n must be at least 1, got {n}."
        raise ConfigError(msg)
    harmonic = float(digamma(n + 1)) + np.euler_gamma
    return float(n * harmonic)


def simulate_coupon(n: int, k: int, rng: np.random.Generator) -> int:
    """Draw one shuffled bag and return the number of draws ``N``."""

    n, k = _require_sizes(n, k)
    bag = rng.permutation(np.repeat(np.arange(n), k))
    _, first_seen = np.unique(bag, return_index=True)
    return int(first_seen.max()) + 1


__all__ = [
    "EXACT_COUPON_CAP",
    "coupon_expectation",
    "coupon_expectation_exact",
    "coupon_with_replacement",
    "simulate_coupon",
]
