"""Tests for the command line interface."""
import json

import pytest

from cyclesparse.generators import complete_graph
from cyclesparse.graph import save_graph

TRIANGLE = "0 1 1\n1 2 1\n2 0 1\n"
PATH = "0 1 1\n1 2 1\n2 3 1\n"
SQUARE = "# n=4 directed=1\n0 1 4\n1 2 4\n2 3 4\n3 0 4\n"
STAR = "0 1 1\n0 2 1\n0 3 1\n"


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write


def _data_lines(text):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def test_decompose(script_runner, write, tmp_path):
    graph = write("tri.txt", TRIANGLE)
    report = tmp_path / "dec.json"
    ret = script_runner.run("cyclesparse", "decompose", graph, "--report", str(report))
    assert ret.success
    assert ret.stderr == ""
    doc = json.loads(ret.stdout)
    assert doc["cycles"] == [] and sorted(doc["extras"]) == [0, 1, 2]
    data = json.loads(report.read_text())
    assert data["checks"] == {"cycles_valid": True}
    assert (data["metrics"]["cycles"], data["metrics"]["extras"]) == (0, 3)


def test_resistance_pair(script_runner, write):
    graph = write("path.txt", PATH)
    ret = script_runner.run("cyclesparse", "resistances", graph, "--exact", "--pair", "0", "3")
    assert ret.success
    assert ret.stdout == "0 3 3\n"


def test_resistance_needs_exact(script_runner, write):
    graph = write("path.txt", PATH)
    ret = script_runner.run("cyclesparse", "resistances", graph, "--pair", "0", "3")
    assert ret.returncode == 2
    assert "--pair needs --exact" in ret.stderr


def test_resistance_edges(script_runner, write, tmp_path):
    graph = write("tri.txt", TRIANGLE)
    report = tmp_path / "res.json"
    ret = script_runner.run(
        "cyclesparse", "resistances", graph, "--exact", "--report", str(report)
    )
    assert ret.success
    assert [line.split()[2] for line in ret.stdout.splitlines()] == ["0.666666666667"] * 3
    assert json.loads(report.read_text())["checks"] == {"foster": True}


def test_sparsify_small(script_runner, write, tmp_path):
    graph = write("k10.txt", save_graph(complete_graph(10)))
    out = tmp_path / "out.txt"
    ret = script_runner.run("cyclesparse", "sparsify", graph, "--seed", "3", "-o", str(out))
    assert ret.success
    assert ret.stdout == ""
    assert len(_data_lines(out.read_text())) == 45


def test_reduce_weights(script_runner, write, tmp_path):
    graph = write("square.txt", SQUARE)
    report = tmp_path / "red.json"
    ret = script_runner.run("cyclesparse", "reduce-weights", graph, "--report", str(report))
    assert ret.success
    doc = json.loads(ret.stdout)
    assert [c["index"] for c in doc["classes"]] == [2]
    assert json.loads(report.read_text())["checks"]["degrees_exact"]


def test_schur_step(script_runner, write, tmp_path):
    graph = write("star.txt", STAR)
    report = tmp_path / "schur.json"
    ret = script_runner.run(
        "cyclesparse", "schur-step", graph, "--f", "0", "--report", str(report)
    )
    assert ret.success
    doc = json.loads(ret.stdout)
    assert doc["f"] == [0] and len(doc["edges"]) == 3
    assert json.loads(report.read_text())["checks"] == {"schur_identity": True}


def test_schur_step_needs_f(script_runner, write):
    graph = write("star.txt", STAR)
    ret = script_runner.run("cyclesparse", "schur-step", graph)
    assert ret.returncode == 2


def test_verify_certificate(script_runner, write, tmp_path):
    graph = write("tri.txt", TRIANGLE)
    report = tmp_path / "dec.json"
    ret = script_runner.run("cyclesparse", "decompose", graph, "--report", str(report))
    assert ret.success
    ret = script_runner.run("cyclesparse", "verify", "--certificate", str(report))
    assert ret.success
    assert "identical" in ret.stdout


def test_verify_vectors(script_runner, write):
    graph = write("square.txt", "0 1 1\n1 2 1\n2 3 1\n3 0 1\n")
    vectors = write("x.txt", "1 -1 0 0\n0 1 0 -1\n")
    ret = script_runner.run(
        "cyclesparse", "verify", "--vectors", vectors, "--original", graph, "--sketch", graph
    )
    assert ret.success
    summary = json.loads(ret.stdout)
    assert (summary["trials"], summary["passed"]) == (2, 2)


def test_bad_input(script_runner, write):
    graph = write("bad.txt", "0 1 1\n1 x 1\n")
    ret = script_runner.run("cyclesparse", "decompose", graph)
    assert ret.returncode == 2
    assert "Line 2" in ret.stderr


def test_bad_config(script_runner, write):
    graph = write("tri.txt", TRIANGLE)
    ret = script_runner.run("cyclesparse", "decompose", graph, "--k", "1")
    assert ret.returncode == 2
    assert "at least 2" in ret.stderr


def test_not_eulerian(script_runner, write):
    graph = write("path.txt", PATH)
    ret = script_runner.run("cyclesparse", "sparsify-eulerian", graph)
    assert ret.returncode == 2
    assert "unbalanced vertices: 0, 3" in ret.stderr


def test_sparsify_eulerian(script_runner, write, tmp_path):
    graph = write("cycle.txt", "# n=4 directed=1\n0 1 1\n1 2 1\n2 3 1\n3 0 1\n")
    report = tmp_path / "eul.json"
    out = tmp_path / "out.txt"
    ret = script_runner.run(
        "cyclesparse", "sparsify-eulerian", graph, "-o", str(out), "--report", str(report)
    )
    assert ret.success
    assert len(_data_lines(out.read_text())) == 4
    assert json.loads(report.read_text())["checks"] == {"eulerian": True}
