"""Dense primal simplex for the fractional max-min LP.

The relaxation

    max lam  s.t.  lam - sum_t v[t, i] x[t, i] <= 0   for every agent i
                   sum_i x[t, i]               <= 1   for every item t
                   x >= 0, lam >= 0

has ``b >= 0``, so the slack basis is feasible and no first phase is needed.
Pivots use the most negative reduced cost until ``10 (n + m)`` pivots have
been made, then switch to Bland's rule, which cannot cycle.
"""

from __future__ import annotations

import logging
from enum import Enum
from typing import Final

import numpy as np

from santalab.core import AssignmentMode, FloatArray, Instance, OptResult
from santalab.errors import NumericalError, SizeCapError

logger = logging.getLogger(__name__)

LP_SIZE_CAP: Final = 500
PIVOT_TOLERANCE: Final = 1e-12
BLAND_AFTER_FACTOR: Final = 10
PIVOT_LIMIT_FACTOR: Final = 50


class PivotStatus(Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    CONTINUE = "continue"


class DenseSimplex:
    """Tableau for ``max c.z  s.t.  A z <= b, z >= 0`` with ``b >= 0``.

    Parameters
    ----------
    a_matrix, b_vector, c_vector:
        Problem data. Slack variables are appended after the structural
        columns and form the initial basis.
    bland_after:
        Number of pivots after which the entering rule switches from the most
        negative reduced cost to Bland's lowest index rule.
    """

    def __init__(
        self,
        a_matrix: FloatArray,
        b_vector: FloatArray,
        c_vector: FloatArray,
        *,
        bland_after: int,
    ) -> None:
        rows, columns = a_matrix.shape
        tableau = np.zeros((rows + 1, columns + rows + 1))
        tableau[:rows, :columns] = a_matrix
        tableau[:rows, columns : columns + rows] = np.eye(rows)
        tableau[:rows, -1] = b_vector
        tableau[rows, :columns] = -c_vector
        self._tableau = tableau
        self._rows = rows
        self._columns = columns
        self._basis = list(range(columns, columns + rows))
        self._bland_after = bland_after
        self.pivots = 0

    @property
    def objective(self) -> float:
        return float(self._tableau[self._rows, -1])

    @property
    def uses_bland(self) -> bool:
        return self.pivots >= self._bland_after

    def solution(self) -> FloatArray:
        """Return the structural variables of the current basic solution."""

        values = np.zeros(self._columns + self._rows)
        values[self._basis] = self._tableau[: self._rows, -1]
        return values[: self._columns]

    # ------------------------------------------------------------------
    # Pivoting
    # ------------------------------------------------------------------
    def pivot(self, row: int, column: int) -> None:
        tableau = self._tableau
        tableau[row] /= tableau[row, column]
        factors = tableau[:, column].copy()
        factors[row] = 0.0
        tableau -= np.outer(factors, tableau[row])
        self._basis[row] = column
        self.pivots += 1
        if self.pivots == self._bland_after:
            logger.debug("switching to Bland's rule after %d pivots", self.pivots)

    def _entering(self) -> int | None:
        costs = self._tableau[self._rows, :-1]
        candidates = np.flatnonzero(costs < -PIVOT_TOLERANCE)
        if candidates.size == 0:
            return None
        if self.uses_bland:
            return int(candidates[0])
        return int(candidates[np.argmin(costs[candidates])])

    def _leaving(self, column: int) -> int | None:
        entries = self._tableau[: self._rows, column]
        eligible = np.flatnonzero(entries > PIVOT_TOLERANCE)
        if eligible.size == 0:
            return None
        ratios = self._tableau[eligible, -1] / entries[eligible]
        best = ratios.min()
        tied = eligible[ratios <= best + PIVOT_TOLERANCE]
        return int(min(tied, key=lambda row: self._basis[row]))

    def step(self) -> PivotStatus:
        column = self._entering()
        if column is None:
            return PivotStatus.OPTIMAL
        row = self._leaving(column)
        if row is None:
            return PivotStatus.UNBOUNDED
        self.pivot(row, column)
        return PivotStatus.CONTINUE

    def solve(self, max_pivots: int) -> None:
        """Pivot to optimality or raise :class:`NumericalError`."""

        while self.pivots < max_pivots:
            status = self.step()
            if status is PivotStatus.OPTIMAL:
                return
            if status is PivotStatus.UNBOUNDED:
                msg = "Simplex detected an unbounded direction."
                raise NumericalError(msg)
        msg = f"Simplex did not terminate within {max_pivots} pivots."
        raise NumericalError(msg)


def opt_fractional_lp(instance: Instance, *, cap: int = LP_SIZE_CAP) -> OptResult:
    """Solve the fractional max-min LP exactly on small instances."""

    n, m = instance.n_agents, instance.n_items
    if n + m > cap:
        msg = f"LP with n + m = {n + m} exceeds the dense solver cap {cap}."
        raise SizeCapError(msg)

    columns = 1 + n * m
    a_matrix = np.zeros((n + m, columns))
    # x[t, i] lives in column 1 + t * n + i
    agents = np.arange(n)
    a_matrix[:n, 0] = 1.0
    for item in range(m):
        block = 1 + item * n + agents
        a_matrix[agents, block] = -instance.values[item]
        a_matrix[n + item, block] = 1.0
    b_vector = np.concatenate([np.zeros(n), np.ones(m)])
    c_vector = np.zeros(columns)
    c_vector[0] = 1.0

    simplex = DenseSimplex(
        a_matrix, b_vector, c_vector, bland_after=BLAND_AFTER_FACTOR * (n + m)
    )
    simplex.solve(PIVOT_LIMIT_FACTOR * (n + m + columns))
    solution = simplex.solution()
    certificate = np.clip(solution[1:].reshape(m, n), 0.0, None)
    value = max(float(solution[0]), 0.0)
    logger.debug("LP optimum %.12g after %d pivots", value, simplex.pivots)
    return OptResult(value, AssignmentMode.FRACTIONAL, "lp", certificate)


__all__ = [
    "BLAND_AFTER_FACTOR",
    "LP_SIZE_CAP",
    "DenseSimplex",
    "PivotStatus",
    "opt_fractional_lp",
]
