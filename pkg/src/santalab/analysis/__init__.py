"""Bounds, prefix statistics, coupon collection and Monte Carlo experiments."""

from .bounds import BOUNDS, BoundQuery, bound, bound_value
from .coupon import (
    coupon_expectation,
    coupon_expectation_exact,
    coupon_with_replacement,
    simulate_coupon,
)
from .experiments import (
    CSV_HEADER,
    EXPERIMENTS,
    SUITES,
    Experiment,
    ExperimentResult,
    expand,
    run_experiments,
)
from .montecarlo import (
    CompetitiveReport,
    McReport,
    TrialOutcome,
    competitive_report,
    lemma_hoeff_mc,
    monte_carlo,
)
from .prefix import PrefixStats, prefix_stats

__all__ = [
    "BOUNDS",
    "CSV_HEADER",
    "EXPERIMENTS",
    "SUITES",
    "BoundQuery",
    "CompetitiveReport",
    "Experiment",
    "ExperimentResult",
    "McReport",
    "PrefixStats",
    "TrialOutcome",
    "bound",
    "bound_value",
    "competitive_report",
    "coupon_expectation",
    "coupon_expectation_exact",
    "coupon_with_replacement",
    "expand",
    "lemma_hoeff_mc",
    "monte_carlo",
    "prefix_stats",
    "run_experiments",
    "simulate_coupon",
]
