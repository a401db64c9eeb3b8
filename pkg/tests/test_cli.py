import json
import math

import pytest

from genodyn.errors import NewtonError
from genodyn.main import COMMANDS, resolve_network_path, run
from genodyn.netlang import format_network, load_network, parse_network


def _json_out(capsys):
    captured = capsys.readouterr()
    return json.loads(captured.out), captured.err


def _error(err: str) -> dict:
    lines = [line for line in err.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


def test_qwindow(capsys):
    assert run(["qwindow", "1", "2", "3", "--quiet"]) == 0
    doc, _ = _json_out(capsys)
    assert doc["schema"] == "genodyn.qwindow/1"
    assert doc["data"]["q_hopf"] == -60.0
    assert doc["data"]["q_pitch"] == 6.0
    assert doc["data"]["gamma"] == pytest.approx(3.3166, abs=1e-4)
    meta = doc["meta"]
    assert meta["tool"] == "genodyn"
    assert len(meta["config_hash"]) == 64
    assert meta["tolerances"]["rtol"] > 0


def test_classify_toggle(capsys):
    assert run(["classify", "toggle.grn", "--param", "m", "--from", "0", "--to", "3"]) == 0
    doc, err = _json_out(capsys)
    assert doc["data"]["kind"] == "pitchfork"
    assert abs(doc["data"]["mu0"] - 2.0) <= 1e-6
    assert "GENODYN" in err
    assert "[step]" in err


def test_parse_prints_canonical_text(capsys, networks_dir):
    assert run(["parse", str(networks_dir / "toggle.grn"), "--quiet"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    meta = [line for line in lines if line.startswith("#")]
    assert lines[:len(meta)] == meta
    assert "# tool: genodyn" in meta
    assert any(line.startswith("# version: ") for line in meta)
    assert any(line.startswith("# command: parse") for line in meta)
    assert any(line.startswith("# config_hash: ") for line in meta)
    assert any(line.startswith("# tolerances: ") and "orbit_closure=" in line for line in meta)
    raw = load_network(networks_dir / "toggle.grn")
    body = "".join(line + "\n" for line in lines[len(meta):])
    assert body == format_network(raw)
    assert parse_network(out) == raw


def test_parse_bad_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.grn"
    bad.write_text("network bad\ngene x max=10\nnode y\n", encoding="utf-8")
    assert run(["parse", str(bad), "--quiet"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    status = _error(captured.err)
    assert status["status"] == "error"
    assert status["kind"] == "syntax"
    assert [d["line"] for d in status["diagnostics"]] == [2, 3]


def test_missing_file_exits_2(capsys):
    assert run(["layers", "no_such_network.grn", "--quiet"]) == 2
    assert "not found" in _error(capsys.readouterr().err)["detail"]


def test_unknown_override_rejected_before_computation(capsys):
    assert run(["equilibria", "toggle", "--set", "q=3"]) == 2
    captured = capsys.readouterr()
    assert _error(captured.err)["kind"] == "unbound-parameter"
    assert "[step]" not in captured.err


@pytest.mark.parametrize("argv", [
    ["equilibria", "toggle", "--set", "m"],
    ["equilibria", "toggle", "--set", "m=abc"],
    ["qwindow", "1", "2", "3", "--format", "csv"],
    ["simulate", "toggle", "--x0", "1,2,3"],
    ["spectrum", "--n", "3", "--q", "1", "--alpha", "1", "2"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv + ["--quiet"]) == 2


def test_argparse_errors_exit_2(capsys):
    assert run(["frobnicate"]) == 2
    assert run(["continue", "toggle"]) == 2


def test_layers(capsys):
    assert run(["layers", "two_layer", "--quiet"]) == 0
    doc, _ = _json_out(capsys)
    assert doc["data"]["core"] == ["x", "y"]
    assert doc["data"]["layers"] == {"x": 0, "y": 0, "z": 1, "w": 2}


def test_equilibria_artifacts_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["equilibria", "toggle", "--set", "m=3", "--grid", "6", "--quiet"]
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert len(doc["data"]["equilibria"]) == 3
    assert doc["data"]["index"]["index_sum"] == 1
    assert not list(tmp_path.glob(".genodyn-*"))


def test_config_hash_tracks_configuration(capsys):
    run(["qwindow", "1", "2", "3", "--quiet"])
    first, _ = _json_out(capsys)
    run(["qwindow", "1", "2", "4", "--quiet"])
    second, _ = _json_out(capsys)
    assert first["meta"]["config_hash"] != second["meta"]["config_hash"]


def test_continue_csv(capsys):
    assert run(["continue", "toggle", "--param", "m", "--steps", "30", "--quiet"]) == 0
    lines = capsys.readouterr().out.splitlines()
    meta = [line for line in lines if line.startswith("#")]
    assert any(line.startswith("# config_hash: ") for line in meta)
    assert any(line.startswith("# tolerances: ") for line in meta)
    rows = [line for line in lines if not line.startswith("#")]
    assert rows[0] == "mu,x,y,re_lambda_max,det_j"
    first = [float(v) for v in rows[1].split(",")]
    assert first[0] == 0.0
    assert first[-1] == pytest.approx(1.0)
    assert float(rows[-1].split(",")[0]) == 3.0


def test_spectrum_csv(capsys):
    assert run(["spectrum", "--n", "3", "--q", "-8", "--alpha", "1", "--quiet"]) == 0
    rows = [line for line in capsys.readouterr().out.splitlines() if not line.startswith("#")]
    assert rows[0] == "re,im"
    roots = [complex(*map(float, r.split(","))) for r in rows[1:]]
    assert len(roots) == 3
    assert min(abs(r - complex(0.0, math.sqrt(3.0))) for r in roots) <= 1e-10
    assert min(abs(r + 3.0) for r in roots) <= 1e-10


def test_simulate_json(capsys):
    assert run(["simulate", "toggle", "--x0", "2,0.5", "--t-end", "5", "--format", "json",
                "--quiet"]) == 0
    doc, _ = _json_out(capsys)
    assert doc["data"]["genes"] == ["x", "y"]
    assert doc["data"]["t"][0] == 0.0
    assert doc["data"]["t"][-1] == 5.0
    assert doc["data"]["x"][0] == [2.0, 0.5]


def test_induce_equilibrium_csv(capsys):
    assert run(["induce", "two_layer", "--format", "csv", "--quiet"]) == 0
    rows = [line for line in capsys.readouterr().out.splitlines() if not line.startswith("#")]
    assert rows[0] == "x,y,z,w,core_stability,stability,residual"
    assert len(rows) == 4


def test_induce_equilibrium_empty_core(capsys):
    assert run(["induce", "feedforward", "--quiet"]) == 0
    doc, _ = _json_out(capsys)
    (state,) = doc["data"]["induced"]
    assert state["core_stability"] is None
    assert state["x"] == pytest.approx([1.0, 2.0])


def test_induce_oscillation_needs_a_core(capsys):
    assert run(["induce", "feedforward", "--mode", "oscillation", "--quiet"]) == 2
    assert _error(capsys.readouterr().err)["kind"] == "induced-state"


@pytest.mark.slow
def test_induce_oscillation(capsys):
    assert run(["induce", "repressilator_w", "--mode", "oscillation", "--quiet"]) == 0
    doc, _ = _json_out(capsys)
    assert doc["data"]["orbit"]["period"] > 0
    assert doc["data"]["induced"]["w"]["residual"] <= 1e-7


def test_warnings_go_to_stderr(capsys):
    assert run(["classify", "toggle", "--param", "m", "--from", "3", "--to", "2.5",
                "--steps", "10"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["data"]["kind"] == "none"
    assert "[warn] 2 stable equilibria at the branch start" in captured.err


def test_computation_errors_exit_1(monkeypatch, capsys):
    def failing(cfg, args):
        raise NewtonError("iteration cap reached", [1.0, 0.5])

    monkeypatch.setitem(COMMANDS, "qwindow", failing)
    assert run(["qwindow", "1", "2", "3", "--quiet"]) == 1
    status = _error(capsys.readouterr().err)
    assert status["kind"] == "newton-divergence"


def test_resolve_network_path(networks_dir, tmp_path):
    assert resolve_network_path("toggle") == networks_dir / "toggle.grn"
    assert resolve_network_path("toggle.grn") == networks_dir / "toggle.grn"
    local = tmp_path / "mine.grn"
    local.write_text("network mine\n")
    assert resolve_network_path(str(local)) == local


FOLD_SRC = """\
network fold
gene x max=10 degrade=1
input u signal=1
param b default=0.5 min=0.5 max=8
edge u -> x activate(beta=0.2, K=1, exp=1)
edge x -> x activate(beta=b, K=1, exp=2)
"""


@pytest.fixture
def fold_file(tmp_path):
    # lower branch of dx/dt = 0.1 + b x^2/(1+x^2) - x ends in a fold near b = 2.6
    path = tmp_path / "fold.grn"
    path.write_text(FOLD_SRC, encoding="utf-8")
    return path


def test_classify_stalled_branch_exits_1(fold_file, capsys):
    assert run(["classify", str(fold_file), "--param", "b", "--from", "0.5", "--to", "8",
                "--quiet"]) == 1
    captured = capsys.readouterr()
    doc = json.loads(captured.out)
    assert doc["data"]["stalled"] is True
    status = _error(captured.err)
    assert status["kind"] == "continuation"
    assert "stalled" in status["detail"]


def test_continue_stalled_branch_writes_partial_csv_and_exits_1(fold_file, capsys):
    assert run(["continue", str(fold_file), "--param", "b", "--quiet"]) == 1
    captured = capsys.readouterr()
    rows = [line for line in captured.out.splitlines() if not line.startswith("#")]
    assert rows[0] == "mu,x,re_lambda_max,det_j"
    last_mu = float(rows[-1].split(",")[0])
    assert 2.0 < last_mu < 3.0
    assert _error(captured.err)["kind"] == "continuation"


MALFORMED_FILES = [
    ("network t\ngene x max=10\n", "missing-attribute", 2),
    ("network t\ngene x max=10 degrade=1\ngene x max=10 degrade=1\n", "duplicate-identifier", 3),
    ("network t\ngene x max=10 degrade=1\nedge x -> q repress(beta=1, K=1, exp=1)\n",
     "dangling-endpoint", 3),
    ("network t\ngene x max=-1 degrade=1\n", "non-positive", 2),
    ("network t\ngene x max=10 degrade=1\nedge x -> x repress(beta=1, K=1, exp=-2)\n", "negative", 3),
    ("network t\ngene x max=10 degrade=1 color=3\n", "unknown-attribute", 2),
    ("network t\nnode x\n", "unknown-keyword", 2),
    ("network t\ngene x max=10 degrade=1 $\n", "lexical-error", 2),
    ("network t\ngene x max=10 degrade=1\nedge x -> x repress(beta=b, K=1, exp=1)\n",
     "unknown-parameter", 3),
    ("network t\nparam p default=1 min=3 max=2\n", "bad-range", 2),
]


@pytest.mark.parametrize("src, code, line", MALFORMED_FILES, ids=[c for _, c, _ in MALFORMED_FILES])
@pytest.mark.parametrize("command", ["parse", "layers"])
def test_malformed_files_exit_2_with_positioned_diagnostic(command, src, code, line, tmp_path, capsys):
    path = tmp_path / "bad.grn"
    path.write_text(src, encoding="utf-8")
    assert run([command, str(path), "--quiet"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    status = _error(captured.err)
    assert status["kind"] == "syntax"
    hits = [d for d in status["diagnostics"] if d["code"] == code]
    assert hits and hits[0]["line"] == line
    assert hits[0]["column"] >= 1
