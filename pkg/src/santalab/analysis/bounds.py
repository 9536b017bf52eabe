"""Closed-form bound evaluators keyed by tag.

Formulas written with ``lg`` use base 2 (``k_threshold``,
``opt_gamma_threshold``); every other logarithm is natural.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

from santalab.analysis.coupon import coupon_with_replacement
from santalab.errors import ConfigError, DomainError
from santalab.registry import Registry

Params = Mapping[str, float]


@dataclass(frozen=True, slots=True)
class BoundQuery:
    """A bound tag plus its named parameters."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class BoundSpec:
    required: tuple[str, ...]
    evaluate: Callable[[Params], float]
    summary: str


# ----------------------------------------------------------------------
# Parameter checks
# ----------------------------------------------------------------------
def _open_unit(params: Params, name: str = "eps") -> float:
    value = float(params[name])
    if not 0.0 < value < 1.0:
        msg = f"{name} must lie in (0, 1), got {value!r}."
        raise DomainError(msg)
    return value


def _unit(params: Params, name: str = "p") -> float:
    value = float(params[name])
    if not 0.0 <= value <= 1.0:
        msg = f"{name} must lie in [0, 1], got {value!r}."
        raise DomainError(msg)
    return value


def _at_least(params: Params, name: str, minimum: float) -> float:
    value = float(params[name])
    if not (math.isfinite(value) and value >= minimum):
        msg = f"{name} must be at least {minimum}, got {value!r}."
        raise DomainError(msg)
    return value


def _positive(params: Params, name: str) -> float:
    value = float(params[name])
    if not (math.isfinite(value) and value > 0.0):
        msg = f"{name} must be positive, got {value!r}."
        raise DomainError(msg)
    return value


# ----------------------------------------------------------------------
# Formulas
# ----------------------------------------------------------------------
def _public_prefix(params: Params) -> float:
    eps, k = _open_unit(params), _at_least(params, "k", 0.0)
    return 2.0 * math.exp(-eps * k / 8.0)


def _private_all_appear(params: Params) -> float:
    eps, k = _open_unit(params), _at_least(params, "k", 0.0)
    n = _at_least(params, "n", 2.0)
    return math.exp(-(4.0 ** (-eps / (1.0 - eps) * k)) * (n - 1.0))


def _k_threshold(params: Params) -> float:
    eps, n = _open_unit(params), _at_least(params, "n", 2.0)
    return (1.0 - eps) / (2.0 * eps) * math.log2(n - 1.0)


def _opt_gamma_threshold(params: Params) -> float:
    gamma, n = _positive(params, "gamma"), _at_least(params, "n", 2.0)
    return (5.0 / (24.0 * gamma) - 1.0) / 2.0 * math.log2(n - 1.0)


def _min_private_gauss(params: Params) -> float:
    k, n = _at_least(params, "k", 0.0), _at_least(params, "n", 1.0)
    return k / 2.0 - math.sqrt(k * math.log(n) / 2.0)


def _binom_private(params: Params) -> float:
    k, p, n = _at_least(params, "k", 0.0), _unit(params), _at_least(params, "n", 1.0)
    return k * p - math.sqrt(4.0 * k * p * (1.0 - p) * math.log(n))


def _binom_public_share(params: Params) -> float:
    k, p, n = _at_least(params, "k", 0.0), _unit(params), _at_least(params, "n", 1.0)
    return k * (1.0 - p) - math.sqrt(6.0 * (1.0 - p) * k * math.log(n))


def _binom_total(params: Params) -> float:
    k, p, n = _at_least(params, "k", 0.0), _unit(params), _at_least(params, "n", 1.0)
    spread = math.sqrt(k * (1.0 - p) * math.log(n))
    return k - spread * (math.sqrt(4.0 * p) + math.sqrt(6.0))


def _rounding_tail(params: Params) -> float:
    eps, opt = _open_unit(params), _at_least(params, "opt", 0.0)
    return math.exp(-(eps**2) / 3.0 * (1.0 - eps) * opt)


def _rounding_opt_threshold(params: Params) -> float:
    eps, n = _open_unit(params), _at_least(params, "n", 1.0)
    return 6.0 * math.log(n) / (eps**2 * (1.0 - eps))


def _adversarial_chernoff(params: Params) -> float:
    eps, n = _open_unit(params), _at_least(params, "n", 1.0)
    opt = _at_least(params, "opt", 0.0)
    return math.exp(-0.5 * eps**2 / 4.0 * opt / n)


def _public_agent_cap(params: Params) -> float:
    eps, k = _open_unit(params), _at_least(params, "k", 0.0)
    return (1.0 - 5.0 * eps / 24.0) * k


def _opt_floor(params: Params) -> float:
    eps, n = _open_unit(params), _at_least(params, "n", 1.0)
    return max(_at_least(params, "opt", 0.0), math.log(n) / eps**2)


def _smoothing_gap(params: Params) -> float:
    eps, n = _positive(params, "eps"), _at_least(params, "n", 1.0)
    return math.log(n) / eps


def _sampling_rhs(params: Params) -> float:
    eps, n = _positive(params, "eps"), _at_least(params, "n", 1.0)
    m, k = _at_least(params, "m", 1.0), _at_least(params, "k", 1.0)
    if k > m:
        msg = f"k={k} cannot exceed m={m}."
        raise DomainError(msg)
    min_mean = _at_least(params, "min_mean", 0.0)
    return math.exp(-eps) * min_mean - math.log(n) / (eps * (m - k + 1.0))


def _coupon_with_replacement(params: Params) -> float:
    return coupon_with_replacement(int(_at_least(params, "n", 1.0)))


def _coupon_large_k(params: Params) -> float:
    n = _at_least(params, "n", 1.0)
    return n * math.log(n)


def _coupon_small_k(params: Params) -> float:
    return _at_least(params, "n", 1.0) * _at_least(params, "k", 1.0)


def default_bounds() -> Registry[BoundSpec]:
    """Return a registry holding every built-in bound."""

    registry: Registry[BoundSpec] = Registry("bound")

    def add(
        name: str,
        required: tuple[str, ...],
        evaluate: Callable[[Params], float],
        summary: str,
    ) -> None:
        registry.register(name, BoundSpec(required, evaluate, summary))

    add(
        "public_prefix",
        ("eps", "k"),
        _public_prefix,
        "P[eps-prefix holds < 5 eps k / 12 public items] <= 2 exp(-eps k / 8)",
    )
    add(
        "private_all_appear",
        ("eps", "k", "n"),
        _private_all_appear,
        "P[every private type appears in the eps-prefix]",
    )
    add("k_threshold", ("eps", "n"), _k_threshold, "(1 - eps) / (2 eps) lg(n - 1)")
    add(
        "opt_gamma_threshold",
        ("gamma", "n"),
        _opt_gamma_threshold,
        "OPT below which a ratio of 1 - gamma is out of reach",
    )
    add("min_private_gauss", ("k", "n"), _min_private_gauss, "k/2 - sqrt(k ln n / 2)")
    add("binom_private", ("k", "p", "n"), _binom_private, "kp - sqrt(4kp(1-p) ln n)")
    add(
        "binom_public_share",
        ("k", "p", "n"),
        _binom_public_share,
        "k(1-p) - sqrt(6(1-p) k ln n)",
    )
    add(
        "binom_total",
        ("k", "p", "n"),
        _binom_total,
        "k - sqrt(k(1-p) ln n) (sqrt(4p) + sqrt(6))",
    )
    add("rounding_tail", ("eps", "opt"), _rounding_tail, "exp(-eps^2/3 (1-eps) OPT)")
    add(
        "rounding_opt_threshold",
        ("eps", "n"),
        _rounding_opt_threshold,
        "OPT above which the rounding tail is at most 1/n^2",
    )
    add(
        "adversarial_chernoff",
        ("eps", "n", "opt"),
        _adversarial_chernoff,
        "exp(-1/2 eps^2/4 OPT/n)",
    )
    add("public_agent_cap", ("eps", "k"), _public_agent_cap, "(1 - 5 eps / 24) k")
    add("opt_floor", ("eps", "n", "opt"), _opt_floor, "max(OPT, ln n / eps^2)")
    add("smoothing_gap", ("eps", "n"), _smoothing_gap, "ln n / eps")
    add(
        "sampling_rhs",
        ("eps", "n", "m", "k", "min_mean"),
        _sampling_rhs,
        "exp(-eps) min_mean - ln n / (eps (m - k + 1))",
    )
    add("coupon_with_replacement", ("n",), _coupon_with_replacement, "n H_n")
    add("coupon_large_k", ("n",), _coupon_large_k, "n ln n")
    add("coupon_small_k", ("n", "k"), _coupon_small_k, "n k")
    return registry


BOUNDS = default_bounds()


def bound_value(query: BoundQuery) -> float:
    """Evaluate the closed form named by ``query.name``."""

    spec = BOUNDS.get(query.name)
    missing = [name for name in spec.required if name not in query.params]
    if missing:
        msg = f"Bound '{query.name}' is missing parameters: {', '.join(missing)}."
        raise ConfigError(msg)
    return spec.evaluate(query.params)


def bound(name: str, **params: float) -> float:
    """Shorthand for ``bound_value(BoundQuery(name, params))``."""

    return bound_value(BoundQuery(name, params))


__all__ = [
    "BOUNDS",
    "BoundQuery",
    "BoundSpec",
    "bound",
    "bound_value",
    "default_bounds",
]
