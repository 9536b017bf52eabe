"""Named Monte Carlo experiments and the suites the command line expands.

Every trial function is a module-level callable taking the resolved parameters
and a per-trial generator, so experiments can be shipped to worker processes.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Final

import numpy as np

from santalab.analysis.bounds import bound
from santalab.analysis.coupon import coupon_expectation, simulate_coupon
from santalab.analysis.montecarlo import (
    SLACK_SIGMAS,
    McReport,
    TrialOutcome,
    monte_carlo,
)
from santalab.analysis.prefix import prefix_stats
from santalab.core import ArrivalOrder, AssignmentMode, FloatArray, Instance, Trace
from santalab.errors import ConfigError
from santalab.instances import (
    OrderKind,
    OrderModel,
    gen_binomial_public_private,
    gen_public_private,
    make_order,
)
from santalab.policies import (
    PolicyConfig,
    PolicyKind,
    randomized_round,
    run_adversarial_trap,
    run_online,
)
from santalab.registry import Registry
from santalab.seeding import derive_seed, make_rng
from santalab.smoothing import smooth_min_gradient

logger = logging.getLogger(__name__)

Params = Mapping[str, float]
TrialFunction = Callable[[Params, np.random.Generator], TrialOutcome]

CSV_HEADER: Final = (
    "experiment",
    "n",
    "k",
    "p",
    "eps",
    "trials",
    "mean",
    "std_error",
    "empirical_probability",
    "seed",
)
RATIO_SWEEP_KS: Final = tuple(2**power for power in range(4, 13))
REGRET_SWEEP_NS: Final = (8, 16, 32, 64)
REGRET_GROWTH_FACTOR: Final = 4.0
CHECK_TOLERANCE: Final = 1e-9
_SEED_DRAW: Final = 2**63


class Check(Enum):
    """How an experiment's report is compared with its reference bound."""

    NONE = "none"
    MEAN_CLOSE = "mean_close"
    MEAN_AT_LEAST = "mean_at_least"
    MEAN_AT_MOST = "mean_at_most"
    PROBABILITY_AT_LEAST = "probability_at_least"
    PROBABILITY_AT_MOST = "probability_at_most"


@dataclass(frozen=True, slots=True)
class Experiment:
    """A registered experiment.

    ``reference`` maps resolved parameters to the bound the report is judged
    against; ``complete`` fills parameters derived from others.
    """

    name: str
    trial: TrialFunction
    required: tuple[str, ...]
    defaults: dict[str, float] = field(default_factory=dict)
    reference: Callable[[Params], float] | None = None
    check: Check = Check.NONE
    complete: Callable[[dict[str, float]], None] | None = None
    summary: str = ""

    def resolve(self, params: Params) -> dict[str, float]:
        """Merge ``params`` over the defaults and validate what is required."""

        resolved = {**self.defaults, **{key: float(v) for key, v in params.items()}}
        if self.complete is not None:
            self.complete(resolved)
        missing = [name for name in self.required if name not in resolved]
        if missing:
            msg = f"Experiment '{self.name}' needs parameters: {', '.join(missing)}."
            raise ConfigError(msg)
        return resolved

    def judge(self, report: McReport, params: Params) -> McReport:
        """Attach the reference bound and the pass/fail verdict to ``report``."""

        if self.reference is None:
            return report
        reference = self.reference(params)
        mean_slack = SLACK_SIGMAS * report.std_error + CHECK_TOLERANCE
        probability = report.empirical_probability
        prob_slack = SLACK_SIGMAS * report.probability_std_error + CHECK_TOLERANCE
        passed: bool | None
        if self.check is Check.MEAN_CLOSE:
            passed = abs(report.mean - reference) <= mean_slack
        elif self.check is Check.MEAN_AT_LEAST:
            passed = report.mean >= reference - mean_slack
        elif self.check is Check.MEAN_AT_MOST:
            passed = report.mean <= reference + mean_slack
        elif self.check is Check.PROBABILITY_AT_LEAST and probability is not None:
            passed = probability >= reference - prob_slack
        elif self.check is Check.PROBABILITY_AT_MOST and probability is not None:
            passed = probability <= reference + prob_slack
        else:
            passed = None
        return replace(report, bound=reference, passed=passed)


@dataclass(frozen=True, slots=True)
class ExperimentResult:
    name: str
    params: dict[str, float]
    report: McReport

    def csv_row(self) -> list[object]:
        return [
            self.name,
            *(_cell(self.params.get(key)) for key in ("n", "k", "p", "eps")),
            self.report.trials,
            self.report.mean,
            self.report.std_error,
            self.report.empirical_probability,
            self.report.seed,
        ]


def _cell(value: float | None) -> object:
    if value is not None and float(value).is_integer():
        return int(value)
    return value


def _count(params: Params, name: str) -> int:
    return int(params[name])


def _child_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(_SEED_DRAW))


def _random_order(m: int, rng: np.random.Generator) -> ArrivalOrder:
    return ArrivalOrder(tuple(rng.permutation(m)))


@lru_cache(maxsize=8)
def _public_private(n: int, k: int) -> Instance:
    return gen_public_private(n, k)


# ----------------------------------------------------------------------
# Coupon collection
# ----------------------------------------------------------------------
def coupon_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    return TrialOutcome(simulate_coupon(_count(params, "n"), _count(params, "k"), rng))


def coupon_reference(params: Params) -> float:
    return coupon_expectation(_count(params, "n"), _count(params, "k"))


# ----------------------------------------------------------------------
# Prefix statistics
# ----------------------------------------------------------------------
def complete_prefix(params: dict[str, float]) -> None:
    """Default ``k`` to ``round(k_threshold(eps, n))``."""

    if "k" not in params and "eps" in params and "n" in params:
        threshold = bound("k_threshold", eps=params["eps"], n=params["n"])
        params["k"] = float(max(1, round(threshold)))


def prefix_public_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    n, k, eps = _count(params, "n"), _count(params, "k"), float(params["eps"])
    instance = _public_private(n, k)
    stats = prefix_stats(instance, _random_order(instance.n_items, rng), eps)
    return TrialOutcome(
        stats.public_fraction_of_k, stats.public_count < 5.0 * eps / 12.0 * k
    )


def prefix_public_reference(params: Params) -> float:
    return bound("public_prefix", eps=params["eps"], k=params["k"])


def prefix_private_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    n, k, eps = _count(params, "n"), _count(params, "k"), float(params["eps"])
    instance = _public_private(n, k)
    stats = prefix_stats(instance, _random_order(instance.n_items, rng), eps)
    return TrialOutcome(
        float(len(stats.missing_private_types)), stats.all_private_types_seen
    )


def prefix_private_reference(params: Params) -> float:
    return bound("private_all_appear", eps=params["eps"], k=params["k"], n=params["n"])


# ----------------------------------------------------------------------
# Binomial construction
# ----------------------------------------------------------------------
def _binomial(params: Params, rng: np.random.Generator) -> Instance:
    return gen_binomial_public_private(
        _count(params, "n"), _count(params, "k"), float(params["p"]), _child_seed(rng)
    )


def binom_private_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    counts = _binomial(params, rng).metadata.private_counts
    assert counts is not None
    fewest = min(counts)
    threshold = bound("binom_private", k=params["k"], p=params["p"], n=params["n"])
    return TrialOutcome(float(fewest), fewest < threshold)


def binom_public_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    """Allocate the public items uniformly at random and take the smallest share.

    The uniform policy ignores item values, so its decisions on the public
    items reduce to one uniform agent draw per public item.
    """

    instance = _binomial(params, rng)
    n = instance.n_agents
    mask = instance.public_mask
    assert mask is not None
    shares = np.bincount(rng.integers(n, size=int(mask.sum())), minlength=n)
    fewest = int(shares.min())
    threshold = bound("binom_public_share", k=params["k"], p=params["p"], n=n)
    return TrialOutcome(float(fewest), fewest < threshold)


def one_over_n(params: Params) -> float:
    return 1.0 / float(params["n"])


# ----------------------------------------------------------------------
# Policies
# ----------------------------------------------------------------------
def adversarial_uniform_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    """Load of the public agent under uniform allocation, public items first."""

    n, k = _count(params, "n"), _count(params, "k")
    instance = _public_private(n, k)
    order = make_order(instance, OrderModel(OrderKind.PUBLIC_FIRST))
    cfg = PolicyConfig(
        kind=PolicyKind.UNIFORM_RANDOM,
        mode=AssignmentMode.INTEGRAL,
        rng_seed=_child_seed(rng),
    )
    trace = run_online(instance, order, cfg)
    return TrialOutcome(float(trace.final_loads.loads[n - 1]))


def k_over_n(params: Params) -> float:
    return float(params["k"]) / float(params["n"])


def sgwr_ratio_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    """Fractional smooth greedy on a random order; value is ``min load / k``."""

    n, k = _count(params, "n"), _count(params, "k")
    instance = _public_private(n, k)
    cfg = PolicyConfig(eps=float(params["eps"]))
    trace = run_online(instance, _random_order(instance.n_items, rng), cfg)
    return TrialOutcome(trace.min_load / k)


def sgwr_ratio_reference(params: Params) -> float:
    """Return ``1 - 2 eps`` once ``k`` clears the rounding threshold, else 0.

    Above that threshold the additive loss ``O(ln n / eps)`` is at most
    ``eps k``, so the ratio guarantee loses at most a second ``eps``.
    """

    eps = float(params["eps"])
    if not 0.0 < eps < 1.0:
        return 0.0
    threshold = bound("rounding_opt_threshold", eps=eps, n=params["n"])
    if float(params["k"]) < threshold:
        return 0.0
    return 1.0 - 2.0 * eps


def sgwr_regret_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    """Fractional smooth greedy on a random order; value is ``k - min load``."""

    n, k = _count(params, "n"), _count(params, "k")
    instance = _public_private(n, k)
    cfg = PolicyConfig(eps=float(params["eps"]))
    trace = run_online(instance, _random_order(instance.n_items, rng), cfg)
    return TrialOutcome(k - trace.min_load)


@lru_cache(maxsize=4)
def _fractional_run(
    n: int, k: int, eps: float, order_seed: int
) -> tuple[Instance, ArrivalOrder, Trace]:
    instance = _public_private(n, k)
    order = make_order(instance, OrderModel(seed=order_seed))
    return instance, order, run_online(instance, order, PolicyConfig(eps=eps))


def rounding_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    """Round one fixed fractional run; the event is ``>= (1 - 3 eps)`` of it."""

    eps = float(params["eps"])
    instance, order, fractional = _fractional_run(
        _count(params, "n"), _count(params, "k"), eps, _count(params, "order_seed")
    )
    rounded = randomized_round(instance, order, fractional, _child_seed(rng))
    base = fractional.min_load
    ratio = rounded.min_load / base if base > 0.0 else 1.0
    return TrialOutcome(ratio, rounded.min_load >= (1.0 - 3.0 * eps) * base)


def one_minus_one_over_n(params: Params) -> float:
    return 1.0 - 1.0 / float(params["n"])


# ----------------------------------------------------------------------
# Sampling without replacement
# ----------------------------------------------------------------------
@lru_cache(maxsize=8)
def sampling_vectors(n: int, m: int, vectors_seed: int) -> FloatArray:
    """Return the fixed ``(m, n)`` vectors an experiment samples from."""

    rng = make_rng(derive_seed(vectors_seed, "sampling-vectors", 0))
    vectors: FloatArray = rng.random((m, n))
    vectors.flags.writeable = False
    return vectors


def _sampling_setup(params: Params) -> tuple[FloatArray, int]:
    k = _count(params, "k")
    m = _count(params, "m")
    if not 1 <= k <= m:
        msg = f"k must lie in [1, {m}], got {k}."
        raise ConfigError(msg)
    vectors = sampling_vectors(_count(params, "n"), m, _count(params, "vectors_seed"))
    return vectors, k


def sampling_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    vectors, k = _sampling_setup(params)
    picks = rng.permutation(vectors.shape[0])[:k]
    gradient = smooth_min_gradient(vectors[picks[: k - 1]].sum(axis=0), params["eps"])
    return TrialOutcome(float(vectors[picks[k - 1]] @ gradient))


def sampling_reference(params: Params) -> float:
    vectors, k = _sampling_setup(params)
    m, n = vectors.shape
    return bound(
        "sampling_rhs",
        eps=params["eps"],
        n=n,
        m=m,
        k=k,
        min_mean=float(vectors.mean(axis=0).min()),
    )


# ----------------------------------------------------------------------
# Deterministic adversary
# ----------------------------------------------------------------------
def trap_greedy_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    cfg = PolicyConfig(
        kind=PolicyKind.GREEDY_LEAST_LOADED, mode=AssignmentMode.INTEGRAL
    )
    return TrialOutcome(run_adversarial_trap(cfg, _count(params, "n")).trace.min_load)


def trap_exppot_trial(params: Params, rng: np.random.Generator) -> TrialOutcome:
    cfg = PolicyConfig(
        kind=PolicyKind.EXP_POTENTIAL,
        mode=AssignmentMode.INTEGRAL,
        beta=float(params["beta"]),
    )
    return TrialOutcome(run_adversarial_trap(cfg, _count(params, "n")).trace.min_load)


def zero(params: Params) -> float:
    return 0.0


# ----------------------------------------------------------------------
# Registry
# ----------------------------------------------------------------------
def default_experiments() -> Registry[Experiment]:
    """Return a registry holding every built-in experiment."""

    registry: Registry[Experiment] = Registry("experiment")
    experiments = (
        Experiment(
            "coupon",
            coupon_trial,
            ("n", "k"),
            {"n": 2.0, "k": 2.0},
            coupon_reference,
            Check.MEAN_CLOSE,
            summary="draws until every coupon type is seen",
        ),
        Experiment(
            "prefix_public",
            prefix_public_trial,
            ("n", "k", "eps"),
            {"n": 64.0, "eps": 0.25},
            prefix_public_reference,
            Check.PROBABILITY_AT_MOST,
            complete_prefix,
            "public items in the eps-prefix fall short of 5 eps k / 12",
        ),
        Experiment(
            "prefix_private",
            prefix_private_trial,
            ("n", "k", "eps"),
            {"n": 64.0, "eps": 0.25},
            prefix_private_reference,
            Check.PROBABILITY_AT_MOST,
            complete_prefix,
            "every private type appears in the eps-prefix",
        ),
        Experiment(
            "binom_private",
            binom_private_trial,
            ("n", "k", "p"),
            {"n": 32.0, "k": 512.0, "p": 0.5},
            one_over_n,
            Check.PROBABILITY_AT_MOST,
            summary="some agent owns fewer private items than the bound",
        ),
        Experiment(
            "binom_public",
            binom_public_trial,
            ("n", "k", "p"),
            {"n": 32.0, "k": 512.0, "p": 0.5},
            one_over_n,
            Check.PROBABILITY_AT_MOST,
            summary="some agent gets fewer public items than the bound",
        ),
        Experiment(
            "adversarial_uniform",
            adversarial_uniform_trial,
            ("n", "k"),
            {"n": 10.0, "k": 1.0},
            k_over_n,
            Check.MEAN_CLOSE,
            summary="public agent's load under uniform allocation, public first",
        ),
        Experiment(
            "sgwr_ratio",
            sgwr_ratio_trial,
            ("n", "k", "eps"),
            {"n": 16.0, "eps": 0.1},
            sgwr_ratio_reference,
            Check.MEAN_AT_LEAST,
            summary="fractional smooth greedy min load over OPT = k",
        ),
        Experiment(
            "sgwr_regret",
            sgwr_regret_trial,
            ("n", "k", "eps"),
            {"n": 16.0, "k": 2000.0, "eps": 0.1},
            summary="fractional smooth greedy shortfall OPT - min load",
        ),
        Experiment(
            "rounding",
            rounding_trial,
            ("n", "k", "eps", "order_seed"),
            {"n": 16.0, "k": 2000.0, "eps": 0.1, "order_seed": 0.0},
            one_minus_one_over_n,
            Check.PROBABILITY_AT_LEAST,
            summary="rounded min load keeps (1 - 3 eps) of the fractional one",
        ),
        Experiment(
            "sampling",
            sampling_trial,
            ("n", "m", "k", "eps", "vectors_seed"),
            {"n": 2.0, "m": 6.0, "k": 3.0, "eps": 0.5, "vectors_seed": 0.0},
            sampling_reference,
            Check.MEAN_AT_LEAST,
            summary="inner product with the smoothed-min gradient of a sample",
        ),
        Experiment(
            "trap",
            trap_greedy_trial,
            ("n",),
            {"n": 4.0},
            zero,
            Check.MEAN_AT_MOST,
            summary="greedy least-loaded against the adaptive adversary",
        ),
        Experiment(
            "trap_exppot",
            trap_exppot_trial,
            ("n", "beta"),
            {"n": 4.0, "beta": 1.0},
            zero,
            Check.MEAN_AT_MOST,
            summary="exponential potential against the adaptive adversary",
        ),
    )
    for experiment in experiments:
        registry.register(experiment.name, experiment)
    return registry


EXPERIMENTS = default_experiments()

SUITES: Final[dict[str, tuple[str, ...]]] = {
    "prefix": ("prefix_public", "prefix_private"),
    "binomial": ("binom_private", "binom_public"),
}


def expand(
    name: str,
    params: Params,
    ks: Sequence[int] | None = None,
    ns: Sequence[int] | None = None,
) -> list[tuple[str, dict[str, float]]]:
    """Expand a suite name into ``(experiment, params)`` pairs.

    ``ratio_sweep`` (also spelled ``ratio-sweep``) runs ``sgwr_ratio`` once per
    ``k`` in ``ks``, defaulting to ``2**4 .. 2**12``. ``regret_sweep`` runs
    ``sgwr_regret`` once per ``n`` in ``ns``, defaulting to ``8, 16, 32, 64``.
    """

    key = name.replace("-", "_")
    base = {key_: float(value) for key_, value in params.items()}
    if key == "ratio_sweep":
        sweep = RATIO_SWEEP_KS if ks is None else tuple(ks)
        return [("sgwr_ratio", {**base, "k": float(k)}) for k in sweep]
    if key == "regret_sweep":
        sweep = REGRET_SWEEP_NS if ns is None else tuple(ns)
        return [("sgwr_regret", {**base, "n": float(n)}) for n in sweep]
    if key in SUITES:
        return [(member, dict(base)) for member in SUITES[key]]
    EXPERIMENTS.get(key)
    return [(key, base)]


def judge_regret_growth(
    results: Sequence[ExperimentResult], factor: float = REGRET_GROWTH_FACTOR
) -> list[ExperimentResult]:
    """Check that regret at the largest ``n`` stays within ``factor`` times the first.

    The verdict lands on the last result: its bound is ``factor`` times the
    first mean and the slack is three pooled standard errors.
    """

    if len(results) < 2:
        return list(results)
    first, last = results[0].report, results[-1].report
    reference = factor * first.mean
    pooled = math.hypot(last.std_error, factor * first.std_error)
    passed = last.mean <= reference + SLACK_SIGMAS * pooled + CHECK_TOLERANCE
    judged = replace(last, bound=reference, passed=passed)
    logger.info(
        "regret growth: %.3f at n=%s against bound %.3f",
        last.mean,
        _cell(results[-1].params.get("n")),
        reference,
    )
    return [*results[:-1], replace(results[-1], report=judged)]


def run_experiments(
    name: str,
    params: Params,
    trials: int,
    master_seed: int,
    *,
    threads: int = 1,
    ks: Sequence[int] | None = None,
    ns: Sequence[int] | None = None,
) -> list[ExperimentResult]:
    """Run every experiment ``name`` expands to and collect the reports."""

    results = []
    for member, member_params in expand(name, params, ks, ns):
        experiment = EXPERIMENTS.get(member)
        report = monte_carlo(experiment, member_params, trials, master_seed, threads)
        results.append(
            ExperimentResult(member, experiment.resolve(member_params), report)
        )
    if name.replace("-", "_") == "regret_sweep":
        return judge_regret_growth(results)
    return results


__all__ = [
    "CSV_HEADER",
    "EXPERIMENTS",
    "RATIO_SWEEP_KS",
    "REGRET_GROWTH_FACTOR",
    "REGRET_SWEEP_NS",
    "SUITES",
    "Check",
    "Experiment",
    "ExperimentResult",
    "default_experiments",
    "expand",
    "judge_regret_growth",
    "run_experiments",
]
