"""Tests for the offline optimum oracles."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linprog

from santalab.core import (
    AssignmentMode,
    Instance,
    InstanceMetadata,
    certificate_min_load,
)
from santalab.errors import ConfigError, DomainError, SizeCapError
from santalab.instances import gen_iid_bernoulli, gen_public_private
from santalab.oracles import (
    ORACLES,
    opt_exhaustive_integral,
    opt_fractional_lp,
    opt_public_private_closed_form,
    opt_unit_flow,
    solve,
)


def _reference_lp(instance: Instance) -> float:
    n, m = instance.n_agents, instance.n_items
    cost = np.zeros(1 + n * m)
    cost[0] = -1.0
    a_ub = np.zeros((n + m, 1 + n * m))
    for agent in range(n):
        a_ub[agent, 0] = 1.0
        a_ub[agent, 1 + np.arange(m) * n + agent] = -instance.values[:, agent]
    for item in range(m):
        a_ub[n + item, 1 + item * n : 1 + (item + 1) * n] = 1.0
    b_ub = np.concatenate([np.zeros(n), np.ones(m)])
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    assert result.success
    return float(-result.fun)


def _random_unit_instance(rng: np.random.Generator) -> Instance:
    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, 9))
    return Instance((rng.random((m, n)) < 0.6).astype(float))


# ----------------------------------------------------------------------
# Examples
# ----------------------------------------------------------------------
def test_public_private_optimum_is_k() -> None:
    instance = gen_public_private(4, 3)

    assert opt_unit_flow(instance, "integral").value == 3.0
    assert solve("closed_form", instance).value == 3.0
    assert opt_exhaustive_integral(gen_public_private(3, 2)).value == 2.0


def test_single_public_item_between_two_agents() -> None:
    instance = Instance(np.array([[1.0, 1.0]]))

    assert opt_unit_flow(instance, AssignmentMode.INTEGRAL).value == 0.0
    fractional = opt_unit_flow(instance, AssignmentMode.FRACTIONAL)
    assert fractional.value == pytest.approx(0.5, abs=1e-8)
    assert fractional.kind is AssignmentMode.FRACTIONAL


def test_lp_splits_half_valued_item() -> None:
    result = opt_fractional_lp(Instance(np.array([[0.5, 0.5]])))
    assert result.value == pytest.approx(0.25)
    assert certificate_min_load(
        Instance(np.array([[0.5, 0.5]])), result.certificate
    ) == pytest.approx(0.25)


def test_closed_form_certificate_is_feasible() -> None:
    for n, k in [(2, 1), (3, 4), (6, 2)]:
        result = opt_public_private_closed_form(n, k)
        assert certificate_min_load(gen_public_private(n, k), result.certificate) == k
    with pytest.raises(ConfigError):
        opt_public_private_closed_form(1, 3)


# ----------------------------------------------------------------------
# Cross checks
# ----------------------------------------------------------------------
def test_solvers_agree_on_random_unit_instances(rng: np.random.Generator) -> None:
    for _ in range(100):
        instance = _random_unit_instance(rng)
        exhaustive = opt_exhaustive_integral(instance)
        integral = opt_unit_flow(instance, AssignmentMode.INTEGRAL)
        fractional = opt_unit_flow(instance, AssignmentMode.FRACTIONAL)
        lp = opt_fractional_lp(instance)

        assert exhaustive.value == integral.value
        assert lp.value == pytest.approx(fractional.value, abs=1e-7)
        assert integral.value <= lp.value + 1e-9
        assert certificate_min_load(instance, exhaustive.certificate) == pytest.approx(
            exhaustive.value
        )
        assert certificate_min_load(instance, lp.certificate) == pytest.approx(
            lp.value, abs=1e-8
        )


def test_lp_matches_reference_solver(rng: np.random.Generator) -> None:
    for _ in range(30):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 10))
        instance = Instance(rng.random((m, n)))
        assert opt_fractional_lp(instance).value == pytest.approx(
            _reference_lp(instance), abs=1e-7
        )


def test_closed_form_matches_flow_on_public_private() -> None:
    for n in range(2, 7):
        for k in (1, 2):
            instance = gen_public_private(n, k)
            assert solve("closed_form", instance).value == solve(
                "flow_integral", instance
            ).value


# ----------------------------------------------------------------------
# Errors
# ----------------------------------------------------------------------
def test_exhaustive_size_cap() -> None:
    with pytest.raises(SizeCapError):
        opt_exhaustive_integral(gen_public_private(4, 3), cap=1000)


def test_lp_size_cap() -> None:
    with pytest.raises(SizeCapError):
        opt_fractional_lp(gen_public_private(4, 3), cap=10)


def test_flow_requires_unit_values() -> None:
    with pytest.raises(DomainError):
        opt_unit_flow(Instance(np.array([[0.5, 1.0]])), "fractional")
    with pytest.raises(ConfigError):
        opt_unit_flow(Instance(np.array([[1.0, 1.0]])), "optimal")


def test_closed_form_requires_family() -> None:
    instance = gen_iid_bernoulli(2, 4, [0.5, 0.5], seed=0)
    with pytest.raises(ConfigError):
        solve("closed_form", instance)
    untagged = Instance(np.ones((2, 2)), InstanceMetadata())
    with pytest.raises(ConfigError):
        solve("closed_form", untagged)


def test_registry_lists_solvers() -> None:
    assert tuple(ORACLES.available()) == (
        "exhaustive",
        "flow_integral",
        "flow_fractional",
        "lp",
        "closed_form",
    )
    with pytest.raises(ConfigError):
        solve("gurobi", gen_public_private(2, 1))
