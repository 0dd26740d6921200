from __future__ import annotations

import json
import subprocess
import sys

import pytest

from conftest import GOLDEN, scenario_dict, scenario_path
from mnemosim.cli import COMMANDS, main
from regen_goldens import CASES

DEMO = str(scenario_path("demo.json"))
NARRATIVE = str(scenario_path("narrative.json"))


def call(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_validate_ok(capsys):
    assert call(capsys, ["validate", DEMO]) == (0, "OK\n", "")


def test_bad_threshold_names_field(capsys, tmp_path):
    doc = scenario_dict("demo.json")
    doc["params"]["tau_e"] = 1.2
    bad = write(tmp_path, "bad.json", doc)
    code, out, err = call(capsys, ["simulate", bad])
    assert code == 1 and out == ""
    assert "params.tau_e" in err


def test_format_error_names_field(capsys, tmp_path):
    bad = write(tmp_path, "bad.json", {"propositions": [], "colour": 1})
    code, _, err = call(capsys, ["validate", bad])
    assert code == 1 and "colour" in err


@pytest.mark.parametrize("content", ["not json", None])
def test_unreadable_input(capsys, tmp_path, content):
    path = tmp_path / "x.json"
    if content is not None:
        path.write_text(content, encoding="utf-8")
    code, out, err = call(capsys, ["validate", str(path)])
    assert code == 1 and out == "" and err.startswith("error:")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["simulate"],
        ["simulate", DEMO, "--format", "xml"],
        ["simulate", DEMO, "--seed", "-1"],
        ["simulate", DEMO, "--seed", str(2**64)],
        ["latency", DEMO, "--target", "P2", "--modifiers", "gravity"],
        ["check-temporal", DEMO],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, _ = call(capsys, argv)
    assert code == 2 and out == ""


def test_simulate_twice_is_byte_identical(capsys):
    argv = ["simulate", DEMO, "--seed", "42", "--format", "csv"]
    first = call(capsys, argv)
    second = call(capsys, argv)
    assert first == second and first[0] == 0


@pytest.mark.parametrize("name", sorted(CASES))
def test_output_goldens(capsys, name):
    code, out, _ = call(capsys, CASES[name])
    assert code == 0
    assert out == (GOLDEN / name).read_text(encoding="utf-8")


@pytest.mark.parametrize("command", [None, *COMMANDS])
def test_help_goldens(capsys, command):
    argv = ["--help"] if command is None else [command, "--help"]
    code, out, _ = call(capsys, argv)
    assert code == 0
    assert out == (GOLDEN / f"help_{command or 'mnemosim'}.txt").read_text(encoding="utf-8")


def test_every_flag_documented(capsys):
    _, out, _ = call(capsys, ["simulate", "--help"])
    for flag in ("--seed", "--horizon", "--dt", "--format", "--output", "--modifiers", "--stochastic"):
        assert flag in out


def test_overrides_take_precedence(capsys):
    _, out, _ = call(capsys, ["simulate", DEMO, "--horizon", "2"])
    times = [float(line.split(",")[0]) for line in out.splitlines()[1:]]
    assert max(times) <= 2.0
    _, lat, _ = call(capsys, ["latency", NARRATIVE, "--target", "P2", "--anchor", "P1", "--modifiers", "relation"])
    assert [s["modifier"] for s in json.loads(lat)["pipeline"]] == ["base", "relation"]


def test_output_file_and_side_files(capsys, tmp_path):
    out_path, metrics_path, series_path = tmp_path / "log.jsonl", tmp_path / "m.json", tmp_path / "s.csv"
    code, out, _ = call(capsys, ["simulate", DEMO, "--format", "json", "--output", str(out_path),
                                 "--metrics", str(metrics_path), "--series", str(series_path)])
    assert code == 0 and out == ""
    records = [json.loads(line) for line in out_path.read_text().splitlines()]
    assert records[0]["cause"] == "init"
    bundle = json.loads(metrics_path.read_text())
    assert set(bundle["final"]) == {"P1", "P2", "P3", "P4"}
    assert series_path.read_text().startswith("time,prop,phase,strength\n")


def test_check_temporal(capsys, tmp_path):
    trace = write(tmp_path, "t.json", {"prefix": [False, True, False]})
    assert json.loads(call(capsys, ["check-temporal", trace, "--op", "diamond"])[1]) == {"op": "diamond", "result": True}
    assert json.loads(call(capsys, ["check-temporal", trace, "--op", "box"])[1])["result"] is False
    assert json.loads(call(capsys, ["check-temporal", trace, "--op", "next", "--step", "0"])[1])["result"] is True
    code, _, err = call(capsys, ["check-temporal", trace, "--op", "theorem2"])
    assert code == 1 and "lasso" in err
    lasso = write(tmp_path, "l.json", {"prefix": [True], "period": [True, False]})
    assert json.loads(call(capsys, ["check-temporal", lasso, "--op", "theorem2"])[1])["result"] is True
    branching = write(tmp_path, "b.json", {"branches": {"a": {"prefix": ["bot"]}, "b": {"prefix": [True]}}})
    out = json.loads(call(capsys, ["check-temporal", branching, "--op", "theorem1"])[1])
    assert out == {"op": "theorem1", "branches": {"a": True, "b": True}}


def test_influence_modes(capsys):
    values = {}
    for mode in ("recursive", "total", "prob"):
        code, out, _ = call(capsys, ["influence", NARRATIVE, "--src", "P1", "--dst", "P3", "--mode", mode])
        assert code == 0
        doc = json.loads(out)
        assert doc["paths"] == 1 and doc["capped"] is False
        values[mode] = doc["value"]
    assert values["total"] == pytest.approx(0.2 + values["recursive"])
    code, _, err = call(capsys, ["influence", NARRATIVE, "--src", "P1", "--dst", "PX"])
    assert code == 1 and "PX" in err


def test_metrics_json_and_missing_chains(capsys):
    doc = json.loads(call(capsys, ["metrics", NARRATIVE, "--format", "json"])[1])
    assert doc["rank_correlation"] == 1.0
    code, _, err = call(capsys, ["metrics", DEMO, "--chains"])
    assert code == 1 and "params.chains" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mnemosim", "validate", DEMO], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "OK\n"


def test_log_level_env(tmp_path):
    env_run = subprocess.run(
        [sys.executable, "-m", "mnemosim", "simulate", DEMO, "--output", str(tmp_path / "o.csv")],
        capture_output=True, text=True, env={"MNEMOSIM_LOG": "debug", "PATH": ""},
    )
    assert env_run.returncode == 0 and env_run.stdout == ""
