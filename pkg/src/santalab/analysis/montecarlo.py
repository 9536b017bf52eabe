"""Seeded Monte Carlo driver and competitive-ratio reporting.

Trial ``i`` of experiment ``name`` draws from
``make_rng(derive_seed(master_seed, name, i))``. Trials are split into
contiguous chunks that may run in a :class:`multiprocessing.Pool`; outcomes are
reassembled by trial index before aggregation, so the report depends only on
the master seed and the trial count.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from multiprocessing import Pool
from typing import TYPE_CHECKING, Final, TypeVar

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import softmax

from santalab.analysis.bounds import bound
from santalab.core import OptResult, Trace
from santalab.errors import ConfigError, DimensionError, DomainError
from santalab.seeding import derive_seed, make_rng, validate_seed
from santalab.smoothing import SmoothingParam

if TYPE_CHECKING:
    from santalab.analysis.experiments import Experiment

logger = logging.getLogger(__name__)

SLACK_SIGMAS: Final = 3.0
CHUNKS_PER_WORKER: Final = 4

TaskT = TypeVar("TaskT")
ResultT = TypeVar("ResultT")


@dataclass(frozen=True, slots=True)
class TrialOutcome:
    """Observation of a single trial and, optionally, whether its event fired."""

    value: float
    event: bool | None = None


@dataclass(frozen=True, slots=True)
class McReport:
    """Aggregate of one Monte Carlo run.

    ``bound`` is the reference quantity the experiment checks against and
    ``passed`` the outcome of that check with three standard errors of slack;
    both are ``None`` for experiments without a check.
    """

    trials: int
    mean: float
    std_error: float
    empirical_probability: float | None
    seed: int
    bound: float | None = None
    passed: bool | None = None

    def __post_init__(self) -> None:
        if self.std_error < 0.0:
            msg = "std_error must be non-negative."
            raise DomainError(msg)
        probability = self.empirical_probability
        if probability is not None and not 0.0 <= probability <= 1.0:
            msg = f"empirical_probability must lie in [0, 1], got {probability!r}."
            raise DomainError(msg)

    @property
    def probability_std_error(self) -> float:
        """Binomial standard error of ``empirical_probability``."""

        if self.empirical_probability is None:
            return 0.0
        p = self.empirical_probability
        return math.sqrt(p * (1.0 - p) / self.trials)

    def to_payload(self) -> dict[str, object]:
        return {
            "trials": self.trials,
            "mean": self.mean,
            "std_error": self.std_error,
            "empirical_probability": self.empirical_probability,
            "seed": self.seed,
            "bound": self.bound,
            "passed": self.passed,
        }


@dataclass(frozen=True, slots=True)
class CompetitiveReport:
    """Ratio and additive regret of one run against an offline optimum."""

    ratio: float | None
    additive_regret: float
    degenerate: bool = False


# ----------------------------------------------------------------------
# Fan-out
# ----------------------------------------------------------------------
def run_indexed(
    worker: Callable[[TaskT], ResultT], tasks: Sequence[TaskT], threads: int = 1
) -> list[ResultT]:
    """Map ``worker`` over ``tasks`` in order, in a process pool when asked.

    ``worker`` and the tasks must be picklable when ``threads > 1``.
    """

    if threads < 1:
        msg = f"threads must be at least 1, got {threads}."
        raise ConfigError(msg)
    if threads == 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    with Pool(processes=min(threads, len(tasks))) as pool:
        return pool.map(worker, tasks)


def _chunks(trials: int, threads: int) -> list[range]:
    count = 1 if threads == 1 else min(trials, threads * CHUNKS_PER_WORKER)
    edges = np.linspace(0, trials, count + 1).astype(int)
    return [range(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:], strict=True)]


_ChunkTask = tuple["Experiment", dict[str, float], int, range]


def _run_chunk(task: _ChunkTask) -> list[tuple[int, float, bool | None]]:
    experiment, params, master_seed, indices = task
    results: list[tuple[int, float, bool | None]] = []
    for index in indices:
        rng = make_rng(derive_seed(master_seed, experiment.name, index))
        outcome = experiment.trial(params, rng)
        results.append((index, float(outcome.value), outcome.event))
    return results


def summarise(
    values: ArrayLike, events: Sequence[bool | None], seed: int
) -> McReport:
    """Build a report from per-trial values listed in trial order."""

    observations = np.asarray(values, dtype=np.float64)
    trials = int(observations.shape[0])
    if trials < 1:
        msg = "At least one trial is required."
        raise ConfigError(msg)
    std_error = 0.0
    if trials > 1:
        std_error = float(observations.std(ddof=1) / math.sqrt(trials))
    flags = [event for event in events if event is not None]
    probability = float(np.mean(flags)) if flags else None
    return McReport(
        trials=trials,
        mean=float(observations.mean()),
        std_error=std_error,
        empirical_probability=probability,
        seed=seed,
    )


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------
def monte_carlo(
    experiment: Experiment | str,
    params: Mapping[str, float],
    trials: int,
    master_seed: int,
    threads: int = 1,
) -> McReport:
    """Run ``trials`` seeded trials of ``experiment`` and aggregate them.

    Parameters
    ----------
    experiment:
        An :class:`~santalab.analysis.experiments.Experiment` or the name it
        is registered under.
    params:
        Experiment parameters; defaults of the experiment are filled in.
    trials:
        Number of independent trials, at least 1.
    master_seed:
        Root of every per-trial seed.
    threads:
        Worker processes; the report does not depend on it.
    """

    from santalab.analysis.experiments import EXPERIMENTS

    if isinstance(experiment, str):
        experiment = EXPERIMENTS.get(experiment)
    if trials < 1:
        msg = f"trials must be at least 1, got {trials}."
        raise ConfigError(msg)
    seed = validate_seed(master_seed)
    resolved = experiment.resolve(params)

    logger.info(
        "experiment %s: %d trials, seed %d, %d worker(s)",
        experiment.name,
        trials,
        seed,
        threads,
    )
    tasks = [(experiment, resolved, seed, chunk) for chunk in _chunks(trials, threads)]
    rows = sorted(
        (row for chunk in run_indexed(_run_chunk, tasks, threads) for row in chunk),
        key=lambda row: row[0],
    )
    report = summarise([row[1] for row in rows], [row[2] for row in rows], seed)
    report = experiment.judge(report, resolved)
    if report.passed is False:
        logger.warning(
            "experiment %s failed its check: mean %.6g, probability %s, bound %s",
            experiment.name,
            report.mean,
            report.empirical_probability,
            report.bound,
        )
    logger.info("experiment %s done: mean %.6g", experiment.name, report.mean)
    return report


def lemma_hoeff_mc(
    vectors: ArrayLike, k: int, eps: float, trials: int, seed: int
) -> McReport:
    """Check the without-replacement sampling inequality by simulation.

    Each trial draws ``k`` of the ``m`` vectors without replacement, forms the
    smoothed-min gradient ``Z`` of the first ``k - 1`` and records the inner
    product of the ``k``-th vector with ``Z``. The report passes when the mean
    is at least ``exp(-eps) min_i mean(Y_i) - ln(n) / (eps (m - k + 1))``
    minus three standard errors.
    """

    matrix = np.asarray(vectors, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        msg = "vectors must be a non-empty (m, n) matrix."
        raise DimensionError(msg)
    if not np.isfinite(matrix).all() or (matrix < 0.0).any() or (matrix > 1.0).any():
        msg = "Sampled vectors must lie in [0, 1]^n."
        raise DomainError(msg)
    m, n = matrix.shape
    if not 1 <= k <= m:
        msg = f"k must lie in [1, {m}], got {k}."
        raise ConfigError(msg)
    if trials < 1:
        msg = f"trials must be at least 1, got {trials}."
        raise ConfigError(msg)
    rate = SmoothingParam(eps).eps

    rng = make_rng(seed)
    picks = np.argsort(rng.random((trials, m)), axis=1)[:, :k]
    history = matrix[picks[:, : k - 1]].sum(axis=1)
    gradients = softmax(-rate * history, axis=1)
    observations = (matrix[picks[:, k - 1]] * gradients).sum(axis=1)

    report = summarise(observations, [], validate_seed(seed))
    rhs = bound(
        "sampling_rhs",
        eps=rate,
        n=n,
        m=m,
        k=k,
        min_mean=float(matrix.mean(axis=0).min()),
    )
    passed = report.mean >= rhs - SLACK_SIGMAS * report.std_error
    return McReport(
        trials=report.trials,
        mean=report.mean,
        std_error=report.std_error,
        empirical_probability=None,
        seed=report.seed,
        bound=rhs,
        passed=passed,
    )


def competitive_report(trace: Trace, opt: OptResult) -> CompetitiveReport:
    """Compare a run's minimum load with the offline optimum.

    With ``opt.value == 0`` the ratio is 1 when the run also ends at zero and
    undefined (``None``, flagged degenerate) otherwise.
    """

    regret = opt.value - trace.min_load
    if opt.value > 0.0:
        return CompetitiveReport(trace.min_load / opt.value, regret)
    if trace.min_load == 0.0:
        return CompetitiveReport(1.0, regret)
    return CompetitiveReport(None, regret, degenerate=True)


__all__ = [
    "CompetitiveReport",
    "McReport",
    "SLACK_SIGMAS",
    "TrialOutcome",
    "competitive_report",
    "lemma_hoeff_mc",
    "monte_carlo",
    "run_indexed",
    "summarise",
]
