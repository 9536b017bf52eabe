"""Online allocation policies, the run loop and online randomized rounding.

Every policy sees one item at a time and commits before the next item is
revealed. Step functions mutate a :class:`PolicyState` owned by a single run;
:func:`run_online` drives them over an instance and records a
:class:`~santalab.core.Trace` of the true total loads.

The smooth greedy policy restarts at ``ceil(m/2)``: from that step on its
decisions only look at loads accumulated after the restart, while the reported
loads keep counting everything.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from santalab.core import (
    ArrivalOrder,
    AssignmentMode,
    FloatArray,
    FractionalAssignment,
    Instance,
    InstanceFamily,
    InstanceMetadata,
    LoadVector,
    Trace,
    as_vector,
    replay,
)
from santalab.errors import ConfigError, DataError, DimensionError, ProtocolError
from santalab.seeding import make_rng, validate_seed
from santalab.smoothing import (
    AgentChoice,
    ResponseMethod,
    SmoothingParam,
    single_winner_response,
    water_fill,
)

logger = logging.getLogger(__name__)

DEFAULT_EPS: Final = 0.1
ROUNDING_TOLERANCE: Final = 1e-9


class PolicyKind(Enum):
    """Supported online policies."""

    SMOOTH_GREEDY_RESTART = "smooth_greedy_restart"
    GREEDY_LEAST_LOADED = "greedy_least_loaded"
    UNIFORM_RANDOM = "uniform_random"
    EXP_POTENTIAL = "exp_potential"


@dataclass(frozen=True, slots=True)
class PolicyConfig:
    """Parameters of one online policy.

    ``beta`` drives the exponential potential directly. When it is omitted and
    both ``alpha`` and ``opt_estimate`` are given, ``beta = alpha ln(n) / OPT``;
    with ``clamp_opt`` the estimate is first raised to ``ln(n) / eps**2``.
    Otherwise ``beta`` defaults to ``eps``.
    """

    kind: PolicyKind = PolicyKind.SMOOTH_GREEDY_RESTART
    eps: float = DEFAULT_EPS
    mode: AssignmentMode = AssignmentMode.FRACTIONAL
    beta: float | None = None
    opt_estimate: float | None = None
    alpha: float | None = None
    clamp_opt: bool = False
    rng_seed: int = 0
    method: ResponseMethod = "sort"

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", SmoothingParam(self.eps).eps)
        if (
            self.mode is AssignmentMode.FRACTIONAL
            and self.kind is not PolicyKind.SMOOTH_GREEDY_RESTART
        ):
            msg = f"Policy {self.kind.value} only supports integral mode."
            raise ConfigError(msg)
        for name in ("beta", "opt_estimate", "alpha"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0.0):
                msg = f"{name} must be a positive number, got {value!r}."
                raise ConfigError(msg)
        if (self.opt_estimate is None) != (self.alpha is None):
            msg = "opt_estimate and alpha must be given together."
            raise ConfigError(msg)
        if self.method not in ("sort", "bisection"):
            msg = f"Unknown best-response method: {self.method!r}"
            raise ConfigError(msg)
        validate_seed(self.rng_seed)

    @property
    def tag(self) -> str:
        return f"{self.kind.value}/{self.mode.value}"

    def resolve_beta(self, n_agents: int) -> float:
        """Return the potential's rate for an instance with ``n_agents``."""

        if self.beta is not None:
            return self.beta
        if self.opt_estimate is not None and self.alpha is not None:
            log_n = math.log(n_agents)
            opt = self.opt_estimate
            if self.clamp_opt:
                opt = max(opt, log_n / self.eps**2)
            beta = self.alpha * log_n / opt
            if beta <= 0.0:
                msg = "beta derived from alpha ln(n) / OPT is zero; set beta directly."
                raise ConfigError(msg)
            return beta
        return self.eps


@dataclass(slots=True)
class PolicyState:
    """Mutable bookkeeping of one run.

    ``loads_since_anchor`` counts only items at or after ``anchor``;
    ``total_loads`` counts every item.
    """

    n: int
    m: int
    loads_since_anchor: FloatArray
    total_loads: FloatArray
    anchor: int = 0
    t: int = 0

    @classmethod
    def start(cls, n: int, m: int) -> PolicyState:
        if n < 1 or m < 1:
            msg = f"A run needs n >= 1 and m >= 1, got n={n}, m={m}."
            raise DimensionError(msg)
        return cls(n=n, m=m, loads_since_anchor=np.zeros(n), total_loads=np.zeros(n))

    @property
    def restart_index(self) -> int:
        return (self.m + 1) // 2

    @property
    def anchor_loads(self) -> LoadVector:
        return LoadVector(self.loads_since_anchor.copy())

    def open_step(self, item_values: ArrayLike) -> FloatArray:
        """Validate the next item and move the anchor when the restart is due."""

        if self.t >= self.m:
            msg = f"Policy stepped past the end of a {self.m}-item stream."
            raise ProtocolError(msg)
        values = as_vector(item_values, name="Item values")
        if values.shape[0] != self.n:
            msg = f"Item has {values.shape[0]} values for {self.n} agents."
            raise DimensionError(msg)
        if self.anchor == 0 and self.t >= self.restart_index:
            self.anchor = self.restart_index
            self.loads_since_anchor = np.zeros(self.n)
            logger.debug("restart at step %d", self.t)
        return values

    def close_step(self, values: FloatArray, weights: FloatArray) -> None:
        gained = values * weights
        self.loads_since_anchor = self.loads_since_anchor + gained
        self.total_loads = self.total_loads + gained
        self.t += 1

    def close_integral(self, values: FloatArray, agent: int) -> None:
        self.loads_since_anchor[agent] += values[agent]
        self.total_loads[agent] += values[agent]
        self.t += 1


# ----------------------------------------------------------------------
# Rewards
# ----------------------------------------------------------------------
def _require_beta(beta: float) -> float:
    if not (math.isfinite(beta) and beta > 0.0):
        msg = f"beta must be positive, got {beta!r}."
        raise ConfigError(msg)
    return float(beta)


def exp_potential_reward(
    loads: ArrayLike, item_values: ArrayLike, beta: float
) -> FloatArray:
    """Return ``exp(-beta c_i) (1 - exp(-beta v_i))`` for every agent."""

    rate = _require_beta(beta)
    coverage = as_vector(loads, name="Loads")
    values = as_vector(item_values, name="Item values")
    if coverage.shape != values.shape:
        msg = "Loads and item values must have the same length."
        raise DimensionError(msg)
    reward: FloatArray = np.exp(-rate * coverage) * -np.expm1(-rate * values)
    return reward


def remaining_potential(loads: ArrayLike, beta: float) -> float:
    """Return ``sum_i exp(-beta c_i)``, the potential left to collect."""

    rate = _require_beta(beta)
    return float(np.exp(-rate * as_vector(loads, name="Loads")).sum())


# ----------------------------------------------------------------------
# Steps
# ----------------------------------------------------------------------
def smooth_greedy_with_restart_step(
    state: PolicyState, item_values: ArrayLike, cfg: PolicyConfig
) -> FractionalAssignment:
    """Greedily maximise the smoothed minimum of the loads since the anchor."""

    values = state.open_step(item_values)
    if cfg.mode is AssignmentMode.FRACTIONAL:
        x, degenerate = water_fill(
            state.loads_since_anchor, values, cfg.eps, cfg.method
        )
        assignment = FractionalAssignment(x, degenerate=degenerate)
    else:
        choice = single_winner_response(state.loads_since_anchor, values, cfg.eps)
        assignment = FractionalAssignment.vertex(
            state.n, choice.agent, degenerate=choice.degenerate
        )
    state.close_step(values, assignment.weights)
    return assignment


def uniform_random_step(
    state: PolicyState, item_values: ArrayLike, rng: np.random.Generator
) -> AgentChoice:
    """Give the item to an agent drawn uniformly, ignoring its values."""

    values = state.open_step(item_values)
    agent = int(rng.integers(state.n))
    state.close_integral(values, agent)
    return AgentChoice(agent)


def greedy_least_loaded_step(
    state: PolicyState, item_values: ArrayLike
) -> AgentChoice:
    """Give the item to the least loaded agent among those who value it."""

    values = state.open_step(item_values)
    positive = values > 0.0
    if not positive.any():
        state.close_integral(values, 0)
        return AgentChoice(0, degenerate=True)
    agent = int(np.argmin(np.where(positive, state.total_loads, np.inf)))
    state.close_integral(values, agent)
    return AgentChoice(agent)


def exp_potential_step(
    state: PolicyState, item_values: ArrayLike, cfg: PolicyConfig
) -> AgentChoice:
    """Give the item to the agent whose potential drops the most."""

    values = state.open_step(item_values)
    beta = cfg.resolve_beta(state.n)
    if not (values > 0.0).any():
        state.close_integral(values, 0)
        return AgentChoice(0, degenerate=True)
    with np.errstate(divide="ignore"):
        log_reward = -beta * state.total_loads + np.log(-np.expm1(-beta * values))
    agent = int(np.argmax(log_reward))
    state.close_integral(values, agent)
    return AgentChoice(agent)


def _integral_step(
    state: PolicyState,
    item_values: FloatArray,
    cfg: PolicyConfig,
    rng: np.random.Generator,
) -> AgentChoice:
    if cfg.kind is PolicyKind.SMOOTH_GREEDY_RESTART:
        assignment = smooth_greedy_with_restart_step(state, item_values, cfg)
        agent = assignment.agent
        assert agent is not None
        return AgentChoice(agent, assignment.degenerate)
    if cfg.kind is PolicyKind.GREEDY_LEAST_LOADED:
        return greedy_least_loaded_step(state, item_values)
    if cfg.kind is PolicyKind.UNIFORM_RANDOM:
        return uniform_random_step(state, item_values, rng)
    return exp_potential_step(state, item_values, cfg)


# ----------------------------------------------------------------------
# Runs
# ----------------------------------------------------------------------
def run_online(instance: Instance, order: ArrivalOrder, cfg: PolicyConfig) -> Trace:
    """Feed the items of ``instance`` in ``order`` through the policy.

    Parameters
    ----------
    instance:
        Items and values.
    order:
        Presentation order; must cover every item.
    cfg:
        Policy configuration. ``cfg.rng_seed`` seeds the uniform policy and is
        recorded on the trace.

    Returns
    -------
    Trace
        Decisions in arrival order and the true total loads.
    """

    if len(order) != instance.n_items:
        msg = f"Order has {len(order)} items, instance has {instance.n_items}."
        raise DimensionError(msg)
    n, m = instance.n_agents, instance.n_items
    state = PolicyState.start(n, m)
    rng = make_rng(cfg.rng_seed)
    rows = instance.values[order.as_array()]
    degenerate = 0

    if cfg.mode is AssignmentMode.FRACTIONAL:
        record: NDArray[Any] = np.zeros((m, n))
        for step in range(m):
            assignment = smooth_greedy_with_restart_step(state, rows[step], cfg)
            record[step] = assignment.weights
            degenerate += assignment.degenerate
    else:
        record = np.zeros(m, dtype=np.int64)
        for step in range(m):
            choice = _integral_step(state, rows[step], cfg, rng)
            record[step] = choice.agent
            degenerate += choice.degenerate

    loads = LoadVector(state.total_loads)
    if degenerate:
        logger.debug("%s: %d degenerate steps", cfg.tag, degenerate)
    return Trace(
        assignments=record,
        final_loads=loads,
        min_load=float(loads.loads.min()),
        policy_tag=cfg.tag,
        seed=cfg.rng_seed,
        mode=cfg.mode,
        degenerate_steps=degenerate,
    )


def randomized_round(
    instance: Instance, order: ArrivalOrder, fractional_trace: Trace, seed: int
) -> Trace:
    """Sample one agent per item with the trace's fractional probabilities."""

    matrix = fractional_trace.fractional_matrix()
    if len(order) != instance.n_items or matrix.shape != instance.values.shape:
        msg = (
            f"Trace of shape {matrix.shape} does not match the instance "
            f"{instance.values.shape} and order of length {len(order)}."
        )
        raise DimensionError(msg)
    if (matrix < -ROUNDING_TOLERANCE).any() or (
        np.abs(matrix.sum(axis=1) - 1.0) > ROUNDING_TOLERANCE
    ).any():
        msg = "Every fractional assignment must be a probability vector."
        raise DataError(msg)

    rng = make_rng(seed)
    cdf = np.cumsum(np.clip(matrix, 0.0, None), axis=1)
    cdf[:, -1] = 1.0
    draws = rng.random(instance.n_items)
    agents = np.minimum((cdf <= draws[:, None]).sum(axis=1), instance.n_agents - 1)
    agents = agents.astype(np.int64)

    loads = replay(instance, order, agents)
    return Trace(
        assignments=agents,
        final_loads=loads,
        min_load=float(loads.loads.min()),
        policy_tag=f"{fractional_trace.policy_tag}+rounded",
        seed=validate_seed(seed),
        mode=AssignmentMode.INTEGRAL,
        degenerate_steps=fractional_trace.degenerate_steps,
    )


@dataclass(frozen=True, slots=True)
class TrapOutcome:
    """Instance built by the adaptive adversary and the policy's run on it."""

    instance: Instance
    order: ArrivalOrder
    trace: Trace
    excluded_agent: int


def run_adversarial_trap(cfg: PolicyConfig, n: int) -> TrapOutcome:
    """Play the adaptive adversary against a deterministic integral policy.

    The first item is valued 1 by everyone. Once the policy has picked its
    recipient ``a``, the adversary sends ``n - 1`` items valued 1 by every agent
    except one agent ``e != a``. The offline optimum is 1; the policy leaves
    agent ``e`` with nothing.
    """

    if n < 2:
        msg = "The adversary needs at least two agents."
        raise ConfigError(msg)
    if cfg.mode is AssignmentMode.FRACTIONAL or cfg.kind is PolicyKind.UNIFORM_RANDOM:
        msg = "The adaptive adversary targets deterministic integral policies."
        raise ConfigError(msg)

    state = PolicyState.start(n, n)
    rng = make_rng(cfg.rng_seed)
    record = np.zeros(n, dtype=np.int64)
    first = _integral_step(state, np.ones(n), cfg, rng)
    record[0] = first.agent

    excluded = n - 1 if first.agent != n - 1 else 0
    rest = np.ones((n - 1, n))
    rest[:, excluded] = 0.0
    for step, row in enumerate(rest, start=1):
        record[step] = _integral_step(state, row, cfg, rng).agent

    instance = Instance(
        np.vstack([np.ones((1, n)), rest]),
        InstanceMetadata(family=InstanceFamily.ADVERSARIAL_TRAP),
    )
    loads = LoadVector(state.total_loads)
    trace = Trace(
        assignments=record,
        final_loads=loads,
        min_load=float(loads.loads.min()),
        policy_tag=cfg.tag,
        seed=cfg.rng_seed,
        mode=AssignmentMode.INTEGRAL,
    )
    return TrapOutcome(instance, ArrivalOrder.identity(n), trace, excluded)


__all__ = [
    "DEFAULT_EPS",
    "PolicyConfig",
    "PolicyKind",
    "PolicyState",
    "TrapOutcome",
    "exp_potential_reward",
    "exp_potential_step",
    "greedy_least_loaded_step",
    "randomized_round",
    "remaining_potential",
    "run_adversarial_trap",
    "run_online",
    "smooth_greedy_with_restart_step",
    "uniform_random_step",
]
