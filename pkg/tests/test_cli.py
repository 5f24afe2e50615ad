import json

import pytest

from graphsynth.cli import main
from graphsynth.circuit import Circuit
from graphsynth.codes import builtin, save_code


def run_cli(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr().out
    return code, out


def report_of(out: str) -> dict:
    return json.loads(out)


def strip_wall_time(out: str) -> str:
    return "\n".join(
        line for line in out.splitlines() if "wall_time" not in line
    )


def test_synth_surface_9(capsys, tmp_path):
    circ = tmp_path / "c.txt"
    rep = tmp_path / "r.json"
    code, out = run_cli(
        capsys, "synth", "--code", "surface_9", "--method", "befs",
        "--budget", "500", "--seed", "1",
        "--out", str(circ), "--report", str(rep),
    )
    assert code == 0
    report = report_of(out)
    assert report["code"] == "surface_9"
    assert report["tq_gate_count"] == 8
    assert report["verification"] == "exact"
    assert json.loads(rep.read_text()) == report
    # the emitted circuit file re-verifies standalone
    Circuit.from_text(circ.read_text())
    code2, out2 = run_cli(
        capsys, "verify", "--circuit", str(circ), "--code", "surface_9"
    )
    assert code2 == 0
    assert report_of(out2)["verification"] == "exact"


def test_synth_report_deterministic(capsys):
    args = ("synth", "--code", "surface_9", "--budget", "300", "--seed", "4")
    _, a = run_cli(capsys, *args)
    _, b = run_cli(capsys, *args)
    assert strip_wall_time(a) == strip_wall_time(b)


def test_synth_mcts(capsys):
    code, out = run_cli(
        capsys, "synth", "--code", "surface_9", "--method", "mcts",
        "--budget", "128", "--seed", "2",
    )
    assert code == 0
    assert report_of(out)["verification"] == "exact"


def test_synth_cx_only(capsys, tmp_path):
    circ = tmp_path / "c.txt"
    code, out = run_cli(
        capsys, "synth", "--code", "surface_9", "--budget", "500",
        "--seed", "3", "--cx-only", "--out", str(circ),
    )
    assert code == 0
    assert report_of(out)["verification"] == "exact"
    c = Circuit.from_text(circ.read_text())
    assert all(g.name == "CX" for g in c.gates if g.is_two_qubit)


def test_synth_lc_opt(capsys):
    code, out = run_cli(
        capsys, "synth", "--code", "surface_9", "--budget", "300",
        "--seed", "5", "--lc-opt", "--lc-steps", "200",
    )
    assert code == 0
    assert report_of(out)["verification"] == "exact"


def test_synth_env_seed_fallback(capsys, monkeypatch):
    monkeypatch.setenv("GRAPHSYNTH_SEED", "17")
    _, out = run_cli(capsys, "synth", "--code", "surface_9", "--budget", "100")
    assert report_of(out)["config"]["seed"] == 17


def test_synth_from_stabilizer_file(capsys, tmp_path):
    path = tmp_path / "code.txt"
    save_code(builtin("surface_9"), str(path))
    code, out = run_cli(
        capsys, "synth", "--stabilizers", str(path), "--budget", "200",
        "--seed", "1",
    )
    assert code == 0
    assert report_of(out)["tq_gate_count"] == 8


def test_convert(capsys, tmp_path):
    graph_file = tmp_path / "g.json"
    code, out = run_cli(
        capsys, "convert", "--code", "surface_9", "--out", str(graph_file)
    )
    assert code == 0
    report = report_of(out)
    assert report["edge_count"] == 10
    assert report["bipartite"] is True
    desc = json.loads(graph_file.read_text())
    assert desc["n"] == 9 and len(desc["edges"]) == 10


def test_lc_opt_command(capsys, tmp_path):
    graph_file = tmp_path / "g.json"
    graph_file.write_text(json.dumps(
        {"n": 5, "edges": [[i, j] for i in range(5) for j in range(i + 1, 5)]}
    ))
    code, out = run_cli(
        capsys, "lc-opt", "--graph", str(graph_file), "--steps", "300",
        "--seed", "0",
    )
    assert code == 0
    report = report_of(out)
    assert report["edges_before"] == 10
    assert report["edges_after"] == 4  # complete graph anneals to a star


def test_orbit_command(capsys, tmp_path):
    graph_file = tmp_path / "g.json"
    graph_file.write_text(json.dumps(
        {"n": 4, "edges": [[0, 1], [0, 2], [0, 3]]}
    ))
    code, out = run_cli(capsys, "orbit", "--graph", str(graph_file))
    assert code == 0
    report = report_of(out)
    assert report["min_edges"] == 3
    assert report["max_edges"] == 6


def test_missing_input_file(capsys):
    code, out = run_cli(
        capsys, "verify", "--circuit", "/does/not/exist", "--code", "surface_9"
    )
    assert code == 2
    assert report_of(out)["error"] == "io_error"


def test_unknown_code(capsys):
    code, out = run_cli(capsys, "synth", "--code", "surface_9x")
    assert code == 2


def test_verification_failure_exit_code(capsys, tmp_path):
    circ = tmp_path / "c.txt"
    circ.write_text("# qubits 9\nH 0\n")
    code, out = run_cli(
        capsys, "verify", "--circuit", str(circ), "--code", "surface_9"
    )
    assert code == 1
    assert report_of(out)["verification"] == "fail"
