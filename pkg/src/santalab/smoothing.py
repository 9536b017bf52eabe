"""Smoothed minimum, its gradient and the one-item best responses.

The smoothed minimum ``phi(u) = -(1/eps) ln sum_i exp(-eps u_i)`` is a concave
under-approximation of ``min(u)`` within ``ln(n)/eps``. Evaluation shifts by
``min(u)`` before exponentiating so long streams never overflow.

:func:`best_fractional_response` maximises ``phi(loads + values * x)`` over the
simplex. With ``c_i = exp(-eps loads_i)`` this is the separable convex program
``min sum_i c_i exp(-eps v_i x_i)`` subject to ``sum x = 1, x >= 0`` whose KKT
point is a water level: ``x_i = max(0, (ln(eps v_i c_i) - ln mu) / (eps v_i))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Final, Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import softmax

from santalab.core import (
    FloatArray,
    FractionalAssignment,
    LoadVector,
    as_vector,
    require_finite,
)
from santalab.errors import ConfigError, DimensionError, DomainError

logger = logging.getLogger(__name__)

MAX_EPS: Final = 10.0
BISECTION_ITERATIONS: Final = 200
BISECTION_TOLERANCE: Final = 1e-10

ResponseMethod = Literal["sort", "bisection"]


@dataclass(frozen=True, slots=True)
class SmoothingParam:
    """Smoothing parameter ``eps`` in ``(0, 10]``."""

    eps: float

    def __post_init__(self) -> None:
        eps = float(self.eps)
        if not np.isfinite(eps) or eps <= 0.0 or eps > MAX_EPS:
            msg = f"eps must lie in (0, {MAX_EPS}], got {self.eps!r}."
            raise ConfigError(msg)
        object.__setattr__(self, "eps", eps)


@dataclass(frozen=True, slots=True)
class AgentChoice:
    """A single receiving agent, flagged when no agent valued the item."""

    agent: int
    degenerate: bool = False


def _eps(eps: SmoothingParam | float) -> float:
    if isinstance(eps, SmoothingParam):
        return eps.eps
    return SmoothingParam(eps).eps


def _loads(loads: LoadVector | ArrayLike) -> FloatArray:
    if isinstance(loads, LoadVector):
        return loads.loads
    array = as_vector(loads, name="Loads")
    require_finite(array, name="Loads")
    return array


def _item(item_values: ArrayLike, n_agents: int) -> FloatArray:
    values = as_vector(item_values, name="Item values")
    require_finite(values, name="Item values")
    if values.shape[0] != n_agents:
        msg = f"Item has {values.shape[0]} values for {n_agents} agents."
        raise DimensionError(msg)
    if (values < 0.0).any() or (values > 1.0).any():
        msg = "Item values must lie in [0, 1]."
        raise DomainError(msg)
    return values


# ----------------------------------------------------------------------
# Smoothed minimum
# ----------------------------------------------------------------------
def smooth_min(u: ArrayLike, eps: SmoothingParam | float) -> float:
    """Return ``-(1/eps) ln sum_i exp(-eps u_i)``.

    Exact for a single agent; stable for ``|u_i|`` up to ``1e8``.
    """

    array = as_vector(u, name="u")
    require_finite(array, name="u")
    scale = _eps(eps)
    shift = float(array.min())
    total = float(np.exp(-scale * (array - shift)).sum())
    return shift - float(np.log(total)) / scale


def smooth_min_gradient(u: ArrayLike, eps: SmoothingParam | float) -> FloatArray:
    """Return the gradient of :func:`smooth_min`, the softmax of ``-eps u``."""

    array = as_vector(u, name="u")
    require_finite(array, name="u")
    scale = _eps(eps)
    gradient: FloatArray = softmax(-scale * (array - array.min()))
    return gradient


def smoothing_gap(n_agents: int, eps: SmoothingParam | float) -> float:
    """Worst-case additive gap between ``min`` and the smoothed minimum."""

    if n_agents < 1:
        msg = "At least one agent is required."
        raise DimensionError(msg)
    return float(np.log(n_agents)) / _eps(eps)


# ----------------------------------------------------------------------
# Best responses
# ----------------------------------------------------------------------
def _water_level_sort(log_weight: FloatArray, slope: FloatArray) -> float:
    """Return the KKT level ``ln mu`` by sorting the candidate levels."""

    order = np.argsort(-log_weight, kind="stable")
    sorted_weight = log_weight[order]
    inverse = 1.0 / slope[order]
    levels = (np.cumsum(sorted_weight * inverse) - 1.0) / np.cumsum(inverse)
    active = np.flatnonzero(sorted_weight > levels)
    return float(levels[active[-1]])


def _water_level_bisection(log_weight: FloatArray, slope: FloatArray) -> float:
    """Return the KKT level ``ln mu`` by bisection on the total mass.

    Searching ``ln mu`` instead of ``mu`` lands on the same level since the
    logarithm is monotone.
    """

    top = int(np.argmax(log_weight))
    high = float(log_weight[top])
    low = high - float(slope[top])
    level = 0.5 * (low + high)
    for iteration in range(BISECTION_ITERATIONS):
        level = 0.5 * (low + high)
        mass = float(np.maximum(0.0, (log_weight - level) / slope).sum())
        if abs(mass - 1.0) <= BISECTION_TOLERANCE:
            logger.debug("water level bracketed after %d iterations", iteration + 1)
            break
        if mass > 1.0:
            low = level
        else:
            high = level
    return level


def water_fill(
    loads: FloatArray,
    values: FloatArray,
    eps: float,
    method: ResponseMethod = "sort",
) -> tuple[FloatArray, bool]:
    """Unchecked best response used by the policy hot loop.

    Returns the simplex point and whether the item was degenerate (valued 0 by
    every agent, in which case agent 0 receives it).
    """

    x = np.zeros_like(values)
    positive = np.flatnonzero(values > 0.0)
    if positive.size == 0:
        x[0] = 1.0
        return x, True
    if positive.size == 1:
        x[positive[0]] = 1.0
        return x, False

    slope = eps * values[positive]
    shifted = loads[positive] - loads[positive].min()
    log_weight = np.log(slope) - eps * shifted
    if method == "sort":
        level = _water_level_sort(log_weight, slope)
    elif method == "bisection":
        level = _water_level_bisection(log_weight, slope)
    else:
        msg = f"Unknown best-response method: {method!r}"
        raise ConfigError(msg)

    share = np.maximum(0.0, (log_weight - level) / slope)
    x[positive] = share / share.sum()
    return x, False


def best_fractional_response(
    loads: LoadVector | ArrayLike,
    item_values: ArrayLike,
    eps: SmoothingParam | float,
    *,
    method: ResponseMethod = "sort",
) -> FractionalAssignment:
    """Return the split of one item maximising the post-step smoothed minimum.

    Parameters
    ----------
    loads:
        Loads before the item arrives.
    item_values:
        Value of the item for every agent, in ``[0, 1]``.
    eps:
        Smoothing parameter.
    method:
        ``"sort"`` finds the KKT water level exactly by sorting;
        ``"bisection"`` searches it over at most 200 halvings until the
        shares sum to one within ``1e-10``.

    Returns
    -------
    FractionalAssignment
        The optimal split. Items no agent values go wholly to agent 0 and are
        flagged ``degenerate``.
    """

    load_array = _loads(loads)
    values = _item(item_values, load_array.shape[0])
    x, degenerate = water_fill(load_array, values, _eps(eps), method)
    return FractionalAssignment(x, degenerate=degenerate)


def single_winner_response(
    loads: LoadVector | ArrayLike,
    item_values: ArrayLike,
    eps: SmoothingParam | float,
) -> AgentChoice:
    """Return the agent maximising ``gradient_i * v_i``, lowest index on ties."""

    load_array = _loads(loads)
    values = _item(item_values, load_array.shape[0])
    if not (values > 0.0).any():
        return AgentChoice(0, degenerate=True)
    scale = _eps(eps)
    # log of gradient_i * v_i up to a shared constant; immune to underflow
    with np.errstate(divide="ignore"):
        score = np.log(values) - scale * (load_array - load_array.min())
    return AgentChoice(int(np.argmax(score)))


__all__ = [
    "BISECTION_ITERATIONS",
    "BISECTION_TOLERANCE",
    "MAX_EPS",
    "AgentChoice",
    "ResponseMethod",
    "SmoothingParam",
    "best_fractional_response",
    "single_winner_response",
    "smooth_min",
    "smooth_min_gradient",
    "smoothing_gap",
    "water_fill",
]
