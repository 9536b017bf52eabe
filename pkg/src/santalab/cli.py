"""Command line entry point: ``santalab {gen,opt,run,experiment}``.

Standard output carries only machine-readable results (CSV or JSON); logging
goes to standard error. Exit codes: 0 success, 1 file IO, 2 usage or invalid
input, 3 solver size or iteration caps, 4 a Monte Carlo check failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Final

from santalab import __version__
from santalab.analysis import CSV_HEADER, competitive_report, run_experiments
from santalab.analysis.montecarlo import run_indexed
from santalab.core import AssignmentMode, Instance, OptResult, Trace
from santalab.errors import ConfigError, SantaLabError
from santalab.instances import (
    IidDistribution,
    OrderKind,
    OrderModel,
    gen_binomial_public_private,
    gen_iid,
    gen_iid_bernoulli,
    gen_public_private,
    make_order,
    read_instance,
    read_order,
    write_instance,
)
from santalab.oracles import solve
from santalab.policies import (
    DEFAULT_EPS,
    PolicyConfig,
    PolicyKind,
    randomized_round,
    run_online,
)
from santalab.seeding import derive_seed, validate_seed
from santalab.services import FileService, ReportService, format_value

logger = logging.getLogger(__name__)

LOG_FORMAT: Final = "%(asctime)s %(levelname)s %(name)s: %(message)s"
EXIT_OK: Final = 0
EXIT_IO: Final = 1
EXIT_CHECK_FAILED: Final = 4
RUN_HEADER: Final = ("trial", "seed", "min_load", "ratio", "regret")
NUMERIC_FLAGS: Final = ("n", "k", "p", "eps", "m", "beta", "alpha", "gamma")

POLICIES: Final = {
    "sgwr": PolicyKind.SMOOTH_GREEDY_RESTART,
    "greedy": PolicyKind.GREEDY_LEAST_LOADED,
    "uniform": PolicyKind.UNIFORM_RANDOM,
    "exppot": PolicyKind.EXP_POTENTIAL,
}
MODES: Final = {"frac": AssignmentMode.FRACTIONAL, "int": AssignmentMode.INTEGRAL}
ORDERS: Final = {
    "random": OrderKind.UNIFORM_RANDOM,
    "public_first": OrderKind.PUBLIC_FIRST,
    "file": OrderKind.EXPLICIT,
}
SOLVERS: Final = ("exhaustive", "flow_integral", "flow_fractional", "lp", "closed_form")
RUN_ORACLES: Final = ("exhaustive", "flow", "lp", "closed_form")
FAMILIES: Final = ("public_private", "binomial", "iid", "iid_bernoulli")


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True, slots=True)
class RunSpec:
    """Validated flags shared by every subcommand.

    ``params`` holds the numeric model flags that were actually given.
    """

    command: str
    params: dict[str, float] = field(default_factory=dict)
    output_path: Path | None = None
    format: OutputFormat = OutputFormat.CSV
    master_seed: int = 0
    trials: int = 1
    threads: int = 1

    def __post_init__(self) -> None:
        validate_seed(self.master_seed)
        if self.trials < 1:
            msg = f"--trials must be at least 1, got {self.trials}."
            raise ConfigError(msg)
        if self.threads < 1:
            msg = f"--threads must be at least 1, got {self.threads}."
            raise ConfigError(msg)
        for name in ("n", "k", "m"):
            value = self.params.get(name)
            if value is not None and (value < 1 or not float(value).is_integer()):
                msg = f"--{name} must be a positive integer, got {value!r}."
                raise ConfigError(msg)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunSpec:
        params = {
            name: float(value)
            for name in NUMERIC_FLAGS
            if (value := getattr(args, name, None)) is not None
        }
        for item in getattr(args, "param", None) or ():
            key, sep, raw = item.partition("=")
            if not sep or not key:
                msg = f"--param expects KEY=VALUE, got {item!r}."
                raise ConfigError(msg)
            try:
                params[key] = float(raw)
            except ValueError as exc:
                msg = f"--param {key} needs a number, got {raw!r}."
                raise ConfigError(msg) from exc
        return cls(
            command=args.command,
            params=params,
            output_path=getattr(args, "out", None),
            format=OutputFormat(getattr(args, "format", "csv")),
            master_seed=getattr(args, "seed", 0),
            trials=getattr(args, "trials", 1),
            threads=getattr(args, "threads", 1),
        )

    def count(self, name: str) -> int:
        if name not in self.params:
            msg = f"--{name} is required here."
            raise ConfigError(msg)
        return int(self.params[name])

    def real(self, name: str) -> float:
        if name not in self.params:
            msg = f"--{name} is required here."
            raise ConfigError(msg)
        return self.params[name]


# ----------------------------------------------------------------------
# gen
# ----------------------------------------------------------------------
def _read_distribution(path: Path) -> IidDistribution:
    raw = FileService().read_json(path)
    try:
        return IidDistribution.from_pairs([(prob, vector) for prob, vector in raw])
    except (TypeError, ValueError) as exc:
        msg = f"{path}: expected a list of [probability, [values...]] pairs."
        raise ConfigError(msg) from exc


def _generate(family: str, spec: RunSpec, dist: Path | None) -> Instance:
    seed = spec.master_seed
    if family == "public_private":
        return gen_public_private(spec.count("n"), spec.count("k"))
    if family == "binomial":
        return gen_binomial_public_private(
            spec.count("n"), spec.count("k"), spec.real("p"), seed
        )
    if family == "iid":
        if dist is None:
            msg = "gen iid needs --dist."
            raise ConfigError(msg)
        return gen_iid(spec.count("n"), spec.count("m"), _read_distribution(dist), seed)
    n = spec.count("n")
    return gen_iid_bernoulli(n, spec.count("m"), [spec.real("p")] * n, seed)


def cmd_gen(args: argparse.Namespace) -> int:
    """Write a generated instance and print ``family n m k p seed``."""

    spec = RunSpec.from_args(args)
    if spec.output_path is None:
        msg = "gen needs --out."
        raise ConfigError(msg)
    instance = _generate(args.family, spec, args.dist)
    write_instance(instance, spec.output_path)

    metadata = instance.metadata
    fields = (
        args.family,
        instance.n_agents,
        instance.n_items,
        metadata.k,
        metadata.p,
        metadata.seed,
    )
    summary = " ".join("-" if v is None else format_value(v) for v in fields)
    ReportService().emit(summary + "\n")
    return EXIT_OK


# ----------------------------------------------------------------------
# opt
# ----------------------------------------------------------------------
def cmd_opt(args: argparse.Namespace) -> int:
    """Print the optimum of an instance file as JSON."""

    spec = RunSpec.from_args(args)
    instance = read_instance(args.instance)
    result = solve(args.solver, instance)
    logger.info("%s optimum %.12g", result.solver, result.value)
    reports = ReportService()
    reports.emit(reports.render_json(result.to_payload()), spec.output_path)
    return EXIT_OK


# ----------------------------------------------------------------------
# run
# ----------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class TrialTask:
    """Everything one worker needs to run trial ``index``."""

    instance: Instance
    order_model: OrderModel
    cfg: PolicyConfig
    rounding: bool
    index: int
    trial_seed: int
    opt: OptResult | None = None


RunRow = list[object]


def _row(task: TrialTask, trace: Trace) -> RunRow:
    if task.opt is None:
        return [task.index, task.trial_seed, trace.min_load, None, None]
    report = competitive_report(trace, task.opt)
    return [
        task.index,
        task.trial_seed,
        trace.min_load,
        report.ratio,
        report.additive_regret,
    ]


def run_trial(task: TrialTask) -> tuple[RunRow, RunRow | None]:
    """Run one online trial and, when asked, one rounding of it."""

    model = task.order_model
    if model.kind is OrderKind.UNIFORM_RANDOM:
        model = replace(model, seed=derive_seed(task.trial_seed, "order", 0))
    order = make_order(task.instance, model)
    cfg = replace(task.cfg, rng_seed=derive_seed(task.trial_seed, "policy", 0))
    trace = run_online(task.instance, order, cfg)
    rounded = None
    if task.rounding:
        seed = derive_seed(task.trial_seed, "round", 0)
        rounded = _row(task, randomized_round(task.instance, order, trace, seed))
    return _row(task, trace), rounded


def _policy_config(args: argparse.Namespace, spec: RunSpec) -> PolicyConfig:
    kind = POLICIES[args.policy]
    if args.mode is None:
        mode = (
            AssignmentMode.FRACTIONAL
            if kind is PolicyKind.SMOOTH_GREEDY_RESTART
            else AssignmentMode.INTEGRAL
        )
    else:
        mode = MODES[args.mode]
    return PolicyConfig(
        kind=kind,
        eps=spec.params.get("eps", DEFAULT_EPS),
        mode=mode,
        beta=spec.params.get("beta"),
        alpha=spec.params.get("alpha"),
        opt_estimate=args.opt_estimate,
        clamp_opt=args.clamp_opt,
    )


def _order_model(args: argparse.Namespace) -> OrderModel:
    kind = ORDERS[args.order]
    if kind is not OrderKind.EXPLICIT:
        return OrderModel(kind)
    if args.order_file is None:
        msg = "--order file needs --order-file."
        raise ConfigError(msg)
    return OrderModel(kind, permutation=read_order(args.order_file).permutation)


def _oracle(
    name: str | None, mode: AssignmentMode, instance: Instance
) -> OptResult | None:
    if name is None:
        return None
    if name == "flow":
        name = f"flow_{mode.value}"
    return solve(name, instance)


def cmd_run(args: argparse.Namespace) -> int:
    """Run ``--trials`` online trials on an instance file and emit their rows."""

    spec = RunSpec.from_args(args)
    instance = read_instance(args.instance)
    cfg = _policy_config(args, spec)
    if args.round and cfg.mode is not AssignmentMode.FRACTIONAL:
        msg = "--round needs a fractional run (--policy sgwr --mode frac)."
        raise ConfigError(msg)
    order_model = _order_model(args)
    opt = _oracle(args.opt, cfg.mode, instance)

    logger.info("run %s: %d trial(s), seed %d", cfg.tag, spec.trials, spec.master_seed)
    tasks = [
        TrialTask(
            instance=instance,
            order_model=order_model,
            cfg=cfg,
            rounding=args.round,
            index=index,
            trial_seed=derive_seed(spec.master_seed, "trial", index),
            opt=opt,
        )
        for index in range(spec.trials)
    ]
    results = run_indexed(run_trial, tasks, spec.threads)
    blocks = {cfg.mode.value: [primary for primary, _ in results]}
    if args.round:
        blocks["rounded"] = [rounded for _, rounded in results if rounded is not None]

    reports = ReportService()
    if spec.format is OutputFormat.JSON:
        payload = {
            "policy": cfg.tag,
            "opt": None if opt is None else opt.to_payload(),
            "blocks": {
                label: [dict(zip(RUN_HEADER, row, strict=True)) for row in rows]
                for label, rows in blocks.items()
            },
        }
        text = reports.render_json(payload)
    else:
        text = "\n".join(
            reports.render_csv(RUN_HEADER, rows) for rows in blocks.values()
        )
    reports.emit(text, spec.output_path)
    return EXIT_OK


# ----------------------------------------------------------------------
# experiment
# ----------------------------------------------------------------------
def _parse_counts(raw: str | None, flag: str) -> list[int] | None:
    if raw is None:
        return None
    try:
        counts = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        msg = f"{flag} expects comma separated integers, got {raw!r}."
        raise ConfigError(msg) from exc
    if not counts or min(counts) < 1:
        msg = f"{flag} needs at least one positive integer."
        raise ConfigError(msg)
    return counts


def cmd_experiment(args: argparse.Namespace) -> int:
    """Run a named experiment or suite and emit one row per experiment."""

    spec = RunSpec.from_args(args)
    results = run_experiments(
        args.name,
        spec.params,
        spec.trials,
        spec.master_seed,
        threads=spec.threads,
        ks=_parse_counts(args.ks, "--ks"),
        ns=_parse_counts(args.ns, "--ns"),
    )
    reports = ReportService()
    if spec.format is OutputFormat.JSON:
        payload = [
            {"experiment": r.name, "params": r.params, "report": r.report.to_payload()}
            for r in results
        ]
        text = reports.render_json(payload)
    else:
        text = reports.render_csv(CSV_HEADER, (r.csv_row() for r in results))
    reports.emit(text, spec.output_path)

    failed = [r.name for r in results if r.report.passed is False]
    if failed:
        logger.error("checks failed: %s", ", ".join(failed))
        return EXIT_CHECK_FAILED
    return EXIT_OK


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------
def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, help="number of agents")
    parser.add_argument("--k", type=int, help="items per agent")
    parser.add_argument("--p", type=float, help="private-item probability")
    parser.add_argument("--m", type=int, help="number of items")


def _add_output_flags(parser: argparse.ArgumentParser, *, csv: bool = True) -> None:
    parser.add_argument("--out", type=Path, help="output file (default: stdout)")
    if csv:
        parser.add_argument(
            "--format", choices=[f.value for f in OutputFormat], default="csv"
        )
    else:
        parser.set_defaults(format="json")


def _add_batch_flags(parser: argparse.ArgumentParser, trials: int) -> None:
    parser.add_argument("--trials", type=int, default=trials)
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--threads", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="santalab",
        description="Online max-min fair allocation experiments.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate an instance file")
    gen.add_argument("family", choices=FAMILIES)
    _add_model_flags(gen)
    gen.add_argument("--dist", type=Path, help="IID support as JSON pairs")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(handler=cmd_gen)

    opt = commands.add_parser("opt", help="solve an instance offline")
    opt.add_argument("instance", type=Path)
    opt.add_argument("--solver", choices=SOLVERS, default="flow_integral")
    _add_output_flags(opt, csv=False)
    opt.set_defaults(handler=cmd_opt)

    run = commands.add_parser("run", help="run an online policy")
    run.add_argument("instance", type=Path)
    run.add_argument("--policy", choices=sorted(POLICIES), default="sgwr")
    run.add_argument("--mode", choices=sorted(MODES))
    run.add_argument("--eps", type=float)
    run.add_argument("--beta", type=float)
    run.add_argument("--alpha", type=float)
    run.add_argument("--opt-estimate", dest="opt_estimate", type=float)
    run.add_argument("--clamp-opt", dest="clamp_opt", action="store_true")
    run.add_argument("--order", choices=sorted(ORDERS), default="random")
    run.add_argument("--order-file", dest="order_file", type=Path)
    run.add_argument("--round", action="store_true", help="also round each run")
    run.add_argument("--opt", choices=RUN_ORACLES, help="oracle for ratio/regret")
    _add_batch_flags(run, trials=1)
    _add_output_flags(run)
    run.set_defaults(handler=cmd_run)

    experiment = commands.add_parser("experiment", help="run a Monte Carlo check")
    experiment.add_argument("name")
    _add_model_flags(experiment)
    experiment.add_argument("--eps", type=float)
    experiment.add_argument("--beta", type=float)
    experiment.add_argument("--gamma", type=float)
    experiment.add_argument("--ks", help="comma separated k values for ratio_sweep")
    experiment.add_argument("--ns", help="comma separated n values for regret_sweep")
    experiment.add_argument(
        "--param", action="append", metavar="KEY=VALUE", help="extra parameter"
    )
    _add_batch_flags(experiment, trials=1000)
    _add_output_flags(experiment)
    experiment.set_defaults(handler=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, dispatch to a subcommand and return its exit code."""

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format=LOG_FORMAT)

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except SantaLabError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO


__all__ = [
    "OutputFormat",
    "RunSpec",
    "TrialTask",
    "build_parser",
    "cmd_experiment",
    "cmd_gen",
    "cmd_opt",
    "cmd_run",
    "main",
    "run_trial",
]
