"""Unit tests for :mod:`santalab.policies`."""

from __future__ import annotations

import math

import numpy as np
import pytest

from santalab.core import (
    ArrivalOrder,
    AssignmentMode,
    Instance,
    LoadVector,
    Trace,
    replay,
)
from santalab.errors import ConfigError, DataError, DimensionError, ProtocolError
from santalab.instances import (
    OrderModel,
    gen_binomial_public_private,
    gen_public_private,
    make_order,
)
from santalab.policies import (
    PolicyConfig,
    PolicyKind,
    PolicyState,
    exp_potential_reward,
    exp_potential_step,
    greedy_least_loaded_step,
    randomized_round,
    remaining_potential,
    run_adversarial_trap,
    run_online,
    smooth_greedy_with_restart_step,
    uniform_random_step,
)
from santalab.seeding import make_rng
from santalab.smoothing import smooth_min


@pytest.fixture()
def public_private() -> Instance:
    return gen_public_private(3, 4)


def test_config_rejects_fractional_for_integral_policies() -> None:
    with pytest.raises(ConfigError):
        PolicyConfig(kind=PolicyKind.UNIFORM_RANDOM)
    with pytest.raises(ConfigError):
        PolicyConfig(eps=0.0)
    with pytest.raises(ConfigError):
        PolicyConfig(
            kind=PolicyKind.EXP_POTENTIAL, mode=AssignmentMode.INTEGRAL, alpha=1.0
        )


def test_resolve_beta_variants() -> None:
    integral = AssignmentMode.INTEGRAL
    kind = PolicyKind.EXP_POTENTIAL
    assert PolicyConfig(kind=kind, mode=integral, beta=0.3).resolve_beta(4) == 0.3
    assert PolicyConfig(kind=kind, mode=integral, eps=0.2).resolve_beta(4) == 0.2

    derived = PolicyConfig(kind=kind, mode=integral, alpha=2.0, opt_estimate=100.0)
    assert derived.resolve_beta(4) == pytest.approx(2.0 * math.log(4) / 100.0)

    clamped = PolicyConfig(
        kind=kind,
        mode=integral,
        eps=0.5,
        alpha=1.0,
        opt_estimate=1.0,
        clamp_opt=True,
    )
    assert clamped.resolve_beta(4) == pytest.approx(0.25)


def test_two_agent_trace_example() -> None:
    instance = gen_public_private(2, 1)
    trace = run_online(instance, ArrivalOrder.identity(2), PolicyConfig(eps=0.1))

    assert trace.assignments.tolist() == [[1.0, 0.0], [0.5, 0.5]]
    assert trace.final_loads.loads.tolist() == pytest.approx([1.5, 0.5])
    assert trace.min_load == pytest.approx(0.5)


def test_restart_moves_anchor_at_half_stream() -> None:
    state = PolicyState.start(2, 5)
    cfg = PolicyConfig(eps=0.5)
    for _ in range(3):
        smooth_greedy_with_restart_step(state, [1.0, 1.0], cfg)
    assert state.anchor == 0
    smooth_greedy_with_restart_step(state, [1.0, 1.0], cfg)
    assert state.anchor == 3
    assert state.loads_since_anchor.sum() == pytest.approx(1.0)
    assert state.total_loads.sum() == pytest.approx(4.0)


def test_step_past_end_is_protocol_error() -> None:
    state = PolicyState.start(2, 1)
    cfg = PolicyConfig()
    smooth_greedy_with_restart_step(state, [1.0, 0.0], cfg)
    with pytest.raises(ProtocolError):
        smooth_greedy_with_restart_step(state, [1.0, 0.0], cfg)


def test_step_rejects_wrong_length() -> None:
    with pytest.raises(DimensionError):
        smooth_greedy_with_restart_step(PolicyState.start(2, 2), [1.0], PolicyConfig())


def test_fractional_run_replays(public_private: Instance) -> None:
    order = make_order(public_private, OrderModel(seed=5))
    trace = run_online(public_private, order, PolicyConfig(eps=0.2))

    assert trace.assignments.shape == (public_private.n_items, 3)
    assert np.allclose(trace.assignments.sum(axis=1), 1.0)
    replayed = replay(public_private, order, trace.assignments)
    assert np.allclose(replayed.loads, trace.final_loads.loads, atol=1e-9)


def test_integral_runs_are_vertices(public_private: Instance) -> None:
    order = make_order(public_private, OrderModel(seed=1))
    for kind in PolicyKind:
        cfg = PolicyConfig(kind=kind, mode=AssignmentMode.INTEGRAL, rng_seed=9)
        trace = run_online(public_private, order, cfg)
        assert trace.assignments.shape == (public_private.n_items,)
        assert replay(public_private, order, trace.assignments) == trace.final_loads


def test_uniform_policy_is_reproducible(public_private: Instance) -> None:
    order = ArrivalOrder.identity(public_private.n_items)
    cfg = PolicyConfig(
        kind=PolicyKind.UNIFORM_RANDOM, mode=AssignmentMode.INTEGRAL, rng_seed=3
    )
    assert run_online(public_private, order, cfg) == run_online(
        public_private, order, cfg
    )


def test_decisions_after_restart_ignore_the_first_half(
    rng: np.random.Generator,
) -> None:
    cfg = PolicyConfig(eps=0.3)
    for _ in range(50):
        n, m = int(rng.integers(2, 6)), int(rng.integers(3, 31))
        values = rng.random((m, n))
        altered = values.copy()
        restart = (m + 1) // 2
        altered[:restart] = rng.random((restart, n)) * (rng.random((restart, n)) < 0.7)
        order = ArrivalOrder.identity(m)

        original = run_online(Instance(values), order, cfg)
        changed = run_online(Instance(altered), order, cfg)
        assert np.array_equal(
            original.assignments[restart:], changed.assignments[restart:]
        )


@pytest.mark.parametrize("kind", list(PolicyKind))
def test_decisions_depend_only_on_items_seen(
    kind: PolicyKind, rng: np.random.Generator
) -> None:
    mode = (
        AssignmentMode.FRACTIONAL
        if kind is PolicyKind.SMOOTH_GREEDY_RESTART
        else AssignmentMode.INTEGRAL
    )
    cfg = PolicyConfig(kind=kind, mode=mode, beta=0.5, rng_seed=21)
    for _ in range(20):
        n, m = int(rng.integers(2, 6)), int(rng.integers(2, 25))
        values = rng.random((m, n))
        cut = int(rng.integers(1, m))
        order = ArrivalOrder.identity(m)
        full = run_online(Instance(values), order, cfg)

        altered = values.copy()
        altered[cut:] = rng.random((m - cut, n))
        changed = run_online(Instance(altered), order, cfg)
        assert np.array_equal(full.assignments[:cut], changed.assignments[:cut])

        if kind is not PolicyKind.SMOOTH_GREEDY_RESTART:
            # no restart, so the stream length does not enter the decisions
            prefix = Instance(values[:cut])
            truncated = run_online(prefix, ArrivalOrder.identity(cut), cfg)
            assert np.array_equal(full.assignments[:cut], truncated.assignments)


@pytest.mark.parametrize(
    "instance",
    [
        gen_public_private(2, 1),
        gen_public_private(3, 4),
        gen_public_private(5, 6),
        gen_binomial_public_private(4, 8, 0.5, seed=3),
    ],
    ids=["pp-2-1", "pp-3-4", "pp-5-6", "binomial-4-8"],
)
def test_each_step_beats_every_vertex(instance: Instance) -> None:
    eps = 0.2
    cfg = PolicyConfig(eps=eps)
    order = make_order(instance, OrderModel(seed=8))
    state = PolicyState.start(instance.n_agents, instance.n_items)
    for values in instance.values[order.as_array()]:
        assignment = smooth_greedy_with_restart_step(state, values, cfg)
        after = state.loads_since_anchor.copy()
        before = after - values * assignment.weights
        for agent in range(instance.n_agents):
            vertex = before.copy()
            vertex[agent] += values[agent]
            assert smooth_min(after, eps) >= smooth_min(vertex, eps) - 1e-9


def test_greedy_gives_to_least_loaded_valuer() -> None:
    state = PolicyState.start(3, 3)
    assert greedy_least_loaded_step(state, [1.0, 1.0, 1.0]).agent == 0
    assert greedy_least_loaded_step(state, [1.0, 1.0, 0.0]).agent == 1
    assert greedy_least_loaded_step(state, [0.0, 0.0, 0.0]).degenerate


def test_uniform_step_ignores_values() -> None:
    state = PolicyState.start(4, 200)
    rng = make_rng(11)
    item = [1.0, 0.0, 0.0, 0.0]
    agents = {uniform_random_step(state, item, rng).agent for _ in range(200)}
    assert agents == {0, 1, 2, 3}


def test_uniform_step_frequencies_are_uniform() -> None:
    n, draws = 4, 20_000
    state = PolicyState.start(n, draws)
    rng = make_rng(29)
    counts = np.zeros(n)
    for _ in range(draws):
        counts[uniform_random_step(state, [1.0, 0.5, 0.0, 0.2], rng).agent] += 1

    frequency = counts / draws
    sigma = math.sqrt((1 / n) * (1 - 1 / n) / draws)
    assert np.abs(frequency - 1 / n).max() <= 3 * sigma


def test_exp_potential_reward_example() -> None:
    reward = exp_potential_reward([0.0, 1.0], [0.5, 0.5], 1.0)
    assert reward[0] == pytest.approx(0.393469, abs=1e-6)
    assert reward[1] == pytest.approx(0.393469 * math.exp(-1.0), abs=1e-6)
    assert remaining_potential([0.0, 0.0], 2.0) == 2.0


def test_exp_potential_step_maximises_reward() -> None:
    state = PolicyState.start(2, 1)
    cfg = PolicyConfig(
        kind=PolicyKind.EXP_POTENTIAL, mode=AssignmentMode.INTEGRAL, beta=1.0
    )
    state.total_loads[:] = [2.0, 0.0]
    assert exp_potential_step(state, [1.0, 0.2], cfg).agent == 1


def test_exp_potential_step_survives_large_loads() -> None:
    state = PolicyState.start(2, 1)
    cfg = PolicyConfig(
        kind=PolicyKind.EXP_POTENTIAL, mode=AssignmentMode.INTEGRAL, beta=5.0
    )
    state.total_loads[:] = [2000.0, 1000.0]
    assert exp_potential_step(state, [1.0, 1.0], cfg).agent == 1


def test_randomized_round_of_vertices_is_identity(public_private: Instance) -> None:
    order = ArrivalOrder.identity(public_private.n_items)
    cfg = PolicyConfig(mode=AssignmentMode.INTEGRAL)
    integral = run_online(public_private, order, cfg)
    as_matrix = Trace(
        assignments=integral.fractional_matrix(),
        final_loads=integral.final_loads,
        min_load=integral.min_load,
        policy_tag=integral.policy_tag,
        seed=0,
    )

    rounded = randomized_round(public_private, order, as_matrix, seed=4)
    assert rounded.assignments.tolist() == integral.assignments.tolist()
    assert rounded.policy_tag.endswith("+rounded")


def test_randomized_round_is_reproducible(public_private: Instance) -> None:
    order = make_order(public_private, OrderModel(seed=2))
    trace = run_online(public_private, order, PolicyConfig(eps=0.5))
    first = randomized_round(public_private, order, trace, seed=17)
    assert first == randomized_round(public_private, order, trace, seed=17)
    assert first.mode is AssignmentMode.INTEGRAL


def test_randomized_round_rejects_bad_probabilities(public_private: Instance) -> None:
    order = ArrivalOrder.identity(public_private.n_items)
    trace = run_online(public_private, order, PolicyConfig())
    broken = Trace(
        assignments=np.full(trace.assignments.shape, 0.5),
        final_loads=trace.final_loads,
        min_load=trace.min_load,
        policy_tag="broken",
        seed=0,
    )
    with pytest.raises(DataError):
        randomized_round(public_private, order, broken, seed=1)


def test_randomized_round_of_even_split_counts() -> None:
    items = 10_000
    instance = Instance(np.ones((items, 2)))
    order = ArrivalOrder.identity(items)
    half = Trace(
        assignments=np.full((items, 2), 0.5),
        final_loads=LoadVector(np.full(2, items / 2)),
        min_load=items / 2,
        policy_tag="half",
        seed=0,
    )

    rounded = randomized_round(instance, order, half, seed=31)
    counts = np.bincount(rounded.assignments, minlength=2)
    sigma = math.sqrt(items * 0.25)
    assert counts.sum() == items
    assert np.abs(counts - items / 2).max() <= 4 * sigma


def test_rounding_keeps_most_of_the_fractional_load() -> None:
    instance = gen_public_private(16, 2000)
    order = make_order(instance, OrderModel(seed=0))
    fractional = run_online(instance, order, PolicyConfig(eps=0.1))
    assert fractional.min_load >= 0.8 * 2000

    good = 0
    for seed in range(200):
        rounded = randomized_round(instance, order, fractional, seed)
        good += rounded.min_load >= 0.7 * fractional.min_load
    assert good >= (1 - 1 / 16) * 200


@pytest.mark.parametrize(
    "kind", [PolicyKind.GREEDY_LEAST_LOADED, PolicyKind.EXP_POTENTIAL]
)
def test_adversarial_trap_starves_one_agent(kind: PolicyKind) -> None:
    cfg = PolicyConfig(kind=kind, mode=AssignmentMode.INTEGRAL, beta=1.0)
    outcome = run_adversarial_trap(cfg, 5)

    assert outcome.trace.min_load == 0.0
    assert outcome.trace.final_loads.loads[outcome.excluded_agent] == 0.0
    assert outcome.instance.n_items == 5
    assert replay(outcome.instance, outcome.order, outcome.trace.assignments) == (
        outcome.trace.final_loads
    )


def test_adversarial_trap_rejects_randomised_policies() -> None:
    with pytest.raises(ConfigError):
        run_adversarial_trap(PolicyConfig(), 3)
    cfg = PolicyConfig(kind=PolicyKind.UNIFORM_RANDOM, mode=AssignmentMode.INTEGRAL)
    with pytest.raises(ConfigError):
        run_adversarial_trap(cfg, 3)
