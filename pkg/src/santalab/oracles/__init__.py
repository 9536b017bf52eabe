"""Offline optimum oracles.

Exact solvers for small instances: exhaustive integral search, max-flow binary
search for unit values, a dense simplex for the fractional LP and the closed
form of the public/private construction.
"""

from .closed_form import opt_public_private_closed_form
from .exhaustive import EXHAUSTIVE_CAP, opt_exhaustive_integral
from .flow import FlowNetwork, opt_unit_flow
from .registry import ORACLES, Solver, default_oracles, solve
from .simplex import LP_SIZE_CAP, DenseSimplex, opt_fractional_lp

__all__ = [
    "EXHAUSTIVE_CAP",
    "LP_SIZE_CAP",
    "ORACLES",
    "DenseSimplex",
    "FlowNetwork",
    "Solver",
    "default_oracles",
    "opt_exhaustive_integral",
    "opt_fractional_lp",
    "opt_public_private_closed_form",
    "opt_unit_flow",
    "solve",
]
