"""End-to-end tests for the ``santalab`` command line."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from santalab.cli import main
from santalab.instances import gen_public_private, read_instance, write_instance


@pytest.fixture()
def pp_instance(tmp_path: Path) -> Path:
    path = tmp_path / "pp.json"
    write_instance(gen_public_private(4, 3), path)
    return path


def test_gen_writes_instance_and_summary(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    out = tmp_path / "pp.json"

    args = ["gen", "public_private", "--n", "4", "--k", "3"]
    assert main([*args, "--out", str(out)]) == 0

    assert capsys.readouterr().out == "public_private 4 12 3 - -\n"
    assert read_instance(out) == gen_public_private(4, 3)


def test_gen_binomial_is_reproducible(tmp_path: Path) -> None:
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    args = ["gen", "binomial", "--n", "5", "--k", "8", "--p", "0.5", "--seed", "3"]

    assert main([*args, "--out", str(first)]) == 0
    assert main([*args, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_gen_iid_from_distribution(tmp_path: Path) -> None:
    dist = tmp_path / "dist.json"
    dist.write_text("[[0.5, [1.0, 0.0]], [0.5, [0.0, 1.0]]]", encoding="utf-8")
    out = tmp_path / "iid.json"

    code = main(
        ["gen", "iid", "--n", "2", "--m", "10", "--dist", str(dist), "--out", str(out)]
    )

    assert code == 0
    assert read_instance(out).n_items == 10


def test_opt_prints_json(
    pp_instance: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    assert main(["opt", str(pp_instance), "--solver", "closed_form"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload == {"kind": "integral", "solver": "closed_form", "value": 3.0}


def test_opt_size_cap_exit_code(pp_instance: Path) -> None:
    assert main(["opt", str(pp_instance), "--solver", "exhaustive"]) == 3


def test_run_csv_with_rounding_block(
    pp_instance: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    code = main(
        [
            "run",
            str(pp_instance),
            "--trials",
            "3",
            "--round",
            "--opt",
            "flow",
            "--eps",
            "0.2",
        ]
    )

    assert code == 0
    fractional, rounded = capsys.readouterr().out.split("\n\n")
    for block in (fractional, rounded):
        lines = block.strip().splitlines()
        assert lines[0] == "trial,seed,min_load,ratio,regret"
        assert [line.split(",")[0] for line in lines[1:]] == ["0", "1", "2"]


def test_run_is_byte_identical_across_reruns_and_workers(
    pp_instance: Path, tmp_path: Path
) -> None:
    outputs = []
    for threads in ("1", "1", "2", "8"):
        out = tmp_path / f"run-{len(outputs)}.csv"
        args = ["run", str(pp_instance), "--policy", "uniform", "--trials", "6"]
        args += ["--seed", "5", "--threads", threads, "--out", str(out)]
        assert main(args) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2] == outputs[3]


def test_run_json_format(
    pp_instance: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    args = ["run", str(pp_instance), "--policy", "greedy", "--opt", "closed_form"]
    assert main([*args, "--format", "json"]) == 0

    payload = json.loads(capsys.readouterr().out)
    assert payload["opt"]["value"] == 3.0
    (row,) = payload["blocks"]["integral"]
    assert row["ratio"] == pytest.approx(row["min_load"] / 3.0)


def test_run_round_needs_fractional_policy(pp_instance: Path) -> None:
    assert main(["run", str(pp_instance), "--policy", "greedy", "--round"]) == 2


def test_run_with_explicit_order(pp_instance: Path, tmp_path: Path) -> None:
    order = tmp_path / "order.json"
    order.write_text(json.dumps(list(range(12))), encoding="utf-8")
    args = ["run", str(pp_instance), "--order", "file", "--order-file", str(order)]
    assert main(args) == 0
    assert main(["run", str(pp_instance), "--order", "file"]) == 2


def test_experiment_coupon(capsys: pytest.CaptureFixture[str]) -> None:
    args = ["experiment", "coupon", "--n", "5", "--k", "3", "--trials", "2000"]
    assert main(args) == 0

    header, row = capsys.readouterr().out.strip().splitlines()
    assert header.startswith("experiment,n,k,p,eps,trials,mean")
    assert row.startswith("coupon,5,3,,,2000,")


def test_experiment_threads_do_not_change_output(
    capsys: pytest.CaptureFixture[str],
) -> None:
    args = ["experiment", "coupon", "--n", "6", "--k", "2", "--trials", "200"]
    assert main([*args, "--threads", "1"]) == 0
    serial = capsys.readouterr().out
    assert main([*args, "--threads", "2"]) == 0
    assert capsys.readouterr().out == serial


def test_experiment_param_flag(capsys: pytest.CaptureFixture[str]) -> None:
    args = ["experiment", "trap_exppot", "--param", "beta=2", "--trials", "2"]
    assert main([*args, "--format", "json"]) == 0
    (entry,) = json.loads(capsys.readouterr().out)
    assert entry["params"]["beta"] == 2.0
    assert entry["report"]["passed"] is True


@pytest.mark.parametrize(
    "argv",
    [
        ["experiment", "no_such_experiment"],
        ["experiment", "coupon", "--param", "oops"],
        ["experiment", "ratio_sweep", "--ks", "a,b"],
        ["experiment", "regret_sweep", "--ns", "0"],
        ["gen", "public_private", "--n", "0", "--k", "1", "--out", "x.json"],
        ["run", "missing.txt"],
        ["gen"],
    ],
)
def test_usage_errors_exit_with_two(argv: list[str]) -> None:
    assert main(argv) == 2


def test_missing_file_exit_code(tmp_path: Path) -> None:
    assert main(["opt", str(tmp_path / "absent.json")]) == 1


def test_invalid_utf8_instance_is_a_data_error(tmp_path: Path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_bytes(b"\xff")
    assert main(["opt", str(bad)]) == 2
