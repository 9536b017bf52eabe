"""Max-flow feasibility oracle for unit-valued instances.

A level ``lam`` is achievable iff the network

    source -> item (capacity 1) -> agent (where v = 1) -> sink (capacity lam)

carries flow ``n * lam``. Binary search over ``lam`` gives the integral optimum
(integer levels, integral flows) and the fractional optimum (real levels).
"""

from __future__ import annotations

import logging
from typing import Any, Final

import networkx as nx
import numpy as np
from networkx.algorithms.flow import edmonds_karp

from santalab.core import AssignmentMode, FloatArray, Instance, OptResult
from santalab.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

FLOW_TOLERANCE: Final = 1e-9
LEVEL_TOLERANCE: Final = 1e-9
SOURCE: Final = "source"
SINK: Final = "sink"

FlowDict = dict[Any, dict[Any, float]]


class FlowNetwork:
    """Bipartite item/agent network for one unit-valued instance.

    Parameters
    ----------
    instance:
        Instance whose values are all 0 or 1.
    """

    def __init__(self, instance: Instance) -> None:
        if not instance.is_unit_valued():
            msg = "The flow oracle requires values in {0, 1}."
            raise DomainError(msg)
        self._instance = instance
        graph = nx.DiGraph()
        for item in range(instance.n_items):
            graph.add_edge(SOURCE, ("item", item), capacity=1.0)
        for item, agent in zip(*np.nonzero(instance.values == 1.0), strict=True):
            graph.add_edge(("item", int(item)), ("agent", int(agent)), capacity=1.0)
        for agent in range(instance.n_agents):
            graph.add_edge(("agent", agent), SINK, capacity=0.0)
        self._graph = graph

    @property
    def graph(self) -> nx.DiGraph:
        return self._graph

    def max_flow(self, level: float) -> tuple[float, FlowDict]:
        """Return the maximum flow when every agent may absorb ``level``."""

        for agent in range(self._instance.n_agents):
            self._graph[("agent", agent)][SINK]["capacity"] = float(level)
        value, flow = nx.maximum_flow(self._graph, SOURCE, SINK, flow_func=edmonds_karp)
        return float(value), flow

    def feasible(self, level: float) -> tuple[bool, FlowDict]:
        """Return whether every agent can be covered to ``level``."""

        value, flow = self.max_flow(level)
        return value >= self._instance.n_agents * level - FLOW_TOLERANCE, flow

    def certificate(self, flow: FlowDict) -> FloatArray:
        """Translate a flow into an item-indexed assignment matrix."""

        matrix = np.zeros(self._instance.values.shape)
        for item in range(self._instance.n_items):
            for node, amount in flow[("item", item)].items():
                matrix[item, node[1]] = amount
        return matrix


def _integral(network: FlowNetwork, instance: Instance) -> OptResult:
    low, high = 0, instance.n_items // instance.n_agents
    while low < high:
        middle = (low + high + 1) // 2
        ok, _ = network.feasible(middle)
        if ok:
            low = middle
        else:
            high = middle - 1
        logger.debug("integral level bracket [%d, %d]", low, high)
    _, flow = network.feasible(low)
    return OptResult(
        float(low), AssignmentMode.INTEGRAL, "flow_integral", network.certificate(flow)
    )


def _fractional(network: FlowNetwork, instance: Instance) -> OptResult:
    coverage = instance.values.sum(axis=0)
    high = min(instance.n_items / instance.n_agents, float(coverage.min()))
    low = 0.0
    ok, _ = network.feasible(high)
    if ok:
        low = high
    while high - low > LEVEL_TOLERANCE:
        middle = 0.5 * (low + high)
        ok, _ = network.feasible(middle)
        if ok:
            low = middle
        else:
            high = middle
    logger.debug("fractional level converged to %.12g", low)
    _, flow = network.feasible(low)
    return OptResult(
        low, AssignmentMode.FRACTIONAL, "flow_fractional", network.certificate(flow)
    )


def opt_unit_flow(instance: Instance, kind: AssignmentMode | str) -> OptResult:
    """Return the integral or fractional optimum of a unit-valued instance."""

    try:
        mode = AssignmentMode(kind)
    except ValueError as exc:
        msg = f"Unknown optimum kind: {kind!r}"
        raise ConfigError(msg) from exc
    network = FlowNetwork(instance)
    if mode is AssignmentMode.INTEGRAL:
        return _integral(network, instance)
    return _fractional(network, instance)


__all__ = ["FLOW_TOLERANCE", "LEVEL_TOLERANCE", "FlowNetwork", "opt_unit_flow"]
