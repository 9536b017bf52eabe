"""Named offline oracles used by the command line and the experiments."""

from __future__ import annotations

from collections.abc import Callable

from santalab.core import AssignmentMode, Instance, InstanceFamily, OptResult
from santalab.errors import ConfigError
from santalab.oracles.closed_form import opt_public_private_closed_form
from santalab.oracles.exhaustive import opt_exhaustive_integral
from santalab.oracles.flow import opt_unit_flow
from santalab.oracles.simplex import opt_fractional_lp
from santalab.registry import Registry

Solver = Callable[[Instance], OptResult]


def _flow_integral(instance: Instance) -> OptResult:
    return opt_unit_flow(instance, AssignmentMode.INTEGRAL)


def _flow_fractional(instance: Instance) -> OptResult:
    return opt_unit_flow(instance, AssignmentMode.FRACTIONAL)


def _closed_form(instance: Instance) -> OptResult:
    metadata = instance.metadata
    if metadata.family is not InstanceFamily.PUBLIC_PRIVATE or metadata.k is None:
        msg = "The closed form only applies to public_private instances."
        raise ConfigError(msg)
    return opt_public_private_closed_form(instance.n_agents, metadata.k)


def default_oracles() -> Registry[Solver]:
    """Return a registry holding every built-in solver."""

    registry: Registry[Solver] = Registry("solver")
    registry.register("exhaustive", opt_exhaustive_integral)
    registry.register("flow_integral", _flow_integral)
    registry.register("flow_fractional", _flow_fractional)
    registry.register("lp", opt_fractional_lp)
    registry.register("closed_form", _closed_form)
    return registry


ORACLES = default_oracles()


def solve(name: str, instance: Instance) -> OptResult:
    """Run the built-in solver registered as ``name``."""

    return ORACLES.get(name)(instance)


__all__ = ["ORACLES", "Solver", "default_oracles", "solve"]
