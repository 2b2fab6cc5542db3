"""The ``reacalc`` command line: output, JSON reports and exit codes."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from reacalc.cli import main

MODELS = Path(__file__).resolve().parent.parent / "models"
SMALL = str(MODELS / "small.rc")
BUFFER = str(MODELS / "buffer.rc")
SEQ = str(MODELS / "sequential.rc")
INV = str(MODELS / "buffer.inv")


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


def run_json(*args):
    r = run(*args, "--json")
    return r.exit_code, json.loads(r.stdout)


def test_calc_text():
    r = run("calc", SEQ, "--process", "P")
    assert r.exit_code == 0
    assert r.stdout.splitlines() == [
        "pre: true",
        "peri: E(true, ⟨⟩, {a.1})",
        "post: Phi(true, {x:=3}, ⟨a.1⟩)",
    ]


def test_calc_json_schema():
    code, doc = run_json("calc", SMALL, "--process", "Diverge")
    assert code == 0
    assert doc["command"] == "calc" and doc["process"] == "Diverge"
    assert doc["bounds"] == {"trace": None, "star": 3}
    assert doc["contract"]["pre"] == ["C(true | ⟨b⟩)"]
    assert doc["contract"]["post"] == []


def test_refine_holds_and_fails():
    r = run("refine", SMALL, "--spec", "Serial", "--impl", "Pipe", "--trace-bound", 4)
    assert r.exit_code == 0 and "holds" in r.stdout
    code, doc = run_json("refine", SMALL, "--spec", "Left", "--impl", "Serial", "--trace-bound", 4)
    assert code == 1
    assert doc["verdict"]["holds"] is False and doc["witnesses"]
    w = doc["witnesses"][0]
    assert {"kind", "trace", "state"} <= set(w)


def test_refine_against_a_spec_declaration():
    r = run("refine", BUFFER, "--spec", "Order", "--impl", "Buffer", "--trace-bound", 3)
    assert r.exit_code == 0, r.stdout


def test_deadlock():
    code, doc = run_json("deadlock", SMALL, "--process", "Stuck", "--trace-bound", 3)
    assert code == 1
    assert doc["witnesses"][0]["kind"] == "quiescent"
    assert doc["witnesses"][0]["acceptances"] == []
    assert run("deadlock", BUFFER, "--process", "Buffer", "--trace-bound", 4).exit_code == 0


def test_verify_loop():
    r = run("verify-loop", BUFFER, "--process", "Buffer", "--invariant", INV, "--trace-bound", 4, "--spec", "Order")
    assert r.exit_code == 0, r.stdout
    assert r.stdout.count("holds") == 2


def test_verify_loop_reports_a_bad_invariant(tmp_path):
    bad = tmp_path / "bad.inv"
    bad.write_text("peri: proj(tt, out) = proj(tt, inp)\npost: false\n")
    code, doc = run_json("verify-loop", BUFFER, "--process", "Buffer", "--invariant", bad, "--trace-bound", 3)
    assert code == 1
    assert doc["witnesses"][0]["obligation"].startswith("(3)")


def test_cross_check():
    code, doc = run_json("cross-check", SMALL, "--process", "Pipe", "--trace-bound", 4)
    assert code == 0
    assert doc["verdict"] == {"holds": True, "bounded": True}
    assert doc["states_checked"] == 1


@pytest.mark.parametrize(
    "src, message",
    [
        ("channel a\nprocess P = a ->\n", "expected a process"),
        ("var x : int[0..1]\nprocess P = x := tt\n", "expected int, got seq of event"),
        ("channel a\nprocess P = hide a\n", "not supported"),
    ],
)
def test_bad_models_exit_with_two(tmp_path, src, message):
    f = tmp_path / "bad.rc"
    f.write_text(src)
    r = CliRunner().invoke(main, ["calc", str(f), "--process", "P"])
    assert r.exit_code == 2
    assert message in r.stderr
    assert str(f) in r.stderr


def test_unknown_process_and_bad_loops(tmp_path):
    r = CliRunner().invoke(main, ["calc", SMALL, "--process", "Nope"])
    assert r.exit_code == 2 and "Nope" in r.stderr
    f = tmp_path / "loop.rc"
    f.write_text("var x : int[0..3]\nprocess L = while x < 3 do x := x + 1\n")
    r = CliRunner().invoke(main, ["calc", str(f), "--process", "L"])
    assert r.exit_code == 2 and "NonProductiveBody" in r.stderr


def test_usage_errors_exit_with_two():
    assert CliRunner().invoke(main, ["refine", SMALL, "--spec", "Serial"]).exit_code == 2
    assert CliRunner().invoke(main, ["calc", "/nonexistent.rc", "--process", "P"]).exit_code == 2
