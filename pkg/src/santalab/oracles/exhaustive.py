"""Exact integral optimum by enumerating every assignment."""

from __future__ import annotations

import logging
from typing import Final

import numpy as np

from santalab.core import AssignmentMode, Instance, OptResult
from santalab.errors import SizeCapError

logger = logging.getLogger(__name__)

EXHAUSTIVE_CAP: Final = 2**20
_CHUNK: Final = 1 << 14


def opt_exhaustive_integral(
    instance: Instance, *, cap: int = EXHAUSTIVE_CAP
) -> OptResult:
    """Return the best minimum load over all ``n**m`` integral assignments.

    Assignments are enumerated as base-``n`` codes in chunks; the first code
    reaching the optimum provides the certificate.
    """

    n, m = instance.n_agents, instance.n_items
    total = n**m
    if total > cap:
        msg = f"Exhaustive search over {n}^{m} assignments exceeds the cap {cap}."
        raise SizeCapError(msg)

    powers = n ** np.arange(m, dtype=np.int64)
    items = np.arange(m)
    best_value = -1.0
    best_code = 0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        agents = (codes[:, None] // powers) % n
        gained = instance.values[items, agents]
        loads = np.zeros((codes.shape[0], n))
        rows = np.arange(codes.shape[0])
        for item in range(m):
            loads[rows, agents[:, item]] += gained[:, item]
        minima = loads.min(axis=1)
        winner = int(np.argmax(minima))
        if minima[winner] > best_value:
            best_value = float(minima[winner])
            best_code = int(codes[winner])

    certificate = np.zeros((m, n))
    certificate[items, (best_code // powers) % n] = 1.0
    logger.debug("exhaustive search over %d assignments -> %s", total, best_value)
    return OptResult(best_value, AssignmentMode.INTEGRAL, "exhaustive", certificate)


__all__ = ["EXHAUSTIVE_CAP", "opt_exhaustive_integral"]
