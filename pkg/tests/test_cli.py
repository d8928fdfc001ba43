import json
import os
import subprocess
import sys

import pytest

from hyperdiff.cli import main

K2 = {"n": 2, "edges": [{"tail": [0, 1], "head": [0, 1], "w": 1}]}
PATH = {"vertices": ["s1", "v", "s2"], "weight_mode": "unit", "stationary": ["s1", "s2"],
        "edges": [{"tail": ["s1", "v"], "head": ["s1", "v"]},
                  {"tail": ["v", "s2"], "head": ["v", "s2"]}]}


@pytest.fixture
def files(tmp_path):
    k2 = tmp_path / "k2.json"
    k2.write_text(json.dumps(K2))
    path = tmp_path / "path.json"
    path.write_text(json.dumps(PATH))
    labels = tmp_path / "labels.json"
    labels.write_text(json.dumps({"labels": {"s1": 0, "s2": 1}}))
    return tmp_path, str(k2), str(path), str(labels)


def test_spectral(files, capsys):
    _, k2, *_ = files
    assert main(["spectral", "--input", k2, "--restarts", "8"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["gamma2"] == pytest.approx(2, abs=1e-3) and set(out) == {"gamma2", "residual", "phi_sweep", "S"}


def test_expansion(files, capsys):
    _, k2, *_ = files
    assert main(["expansion", "--input", k2, "--exact"]) == 0
    assert json.loads(capsys.readouterr().out)["phi_H"] == 1
    assert main(["expansion", "--input", k2]) == 0
    assert json.loads(capsys.readouterr().out)["phi_upper_bound"] >= 1


def test_sssl(files):
    tmp, _, path, labels = files
    out = tmp / "pred.json"
    assert main(["sssl", "--input", path, "--labels", labels, "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["f"][1] == pytest.approx(0.5, abs=1e-6) and doc["Q"] == pytest.approx(0.25, abs=1e-6)


def test_diffuse_csv_and_densities(files):
    tmp, k2, *_ = files
    out, dens = tmp / "traj.csv", tmp / "f.jsonl"
    assert main(["diffuse", "--input", k2, "--step", "0.01", "--max-time", "0.05",
                 "--output", str(out), "--densities", str(dens)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,Q,D,grad_norm" and len(lines) == 7
    assert len(dens.read_text().splitlines()) == 6


def test_derivatives(files, capsys):
    tmp, *_ = files
    g = tmp / "e.json"
    g.write_text(json.dumps({"n": 2, "weight_mode": "unit", "f": [1, 0],
                             "edges": [{"tail": [0], "head": [1]}]}))
    assert main(["derivatives", "--input", str(g), "--order", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["derivatives"][2] == [2.0, -2.0]


def test_verify_instance(files, capsys):
    _, k2, path, _ = files
    assert main(["verify", "--input", k2]) == 0
    assert main(["verify", "--input", path]) == 0
    assert "passed" in capsys.readouterr().out


def test_verify_failure_exit_code(files, monkeypatch):
    from hyperdiff import verification
    _, k2, *_ = files
    monkeypatch.setattr(verification, "verify_instance",
                        lambda H, seed=0: [verification.CriterionResult("x", False, "forced")])
    assert main(["verify", "--input", k2]) == 3


def test_exit_codes(files):
    tmp, k2, *_ = files
    assert main([]) == 1
    assert main(["bogus"]) == 1
    assert main(["spectral"]) == 1
    assert main(["spectral", "--input", k2, "--restarts", "0"]) == 1
    assert main(["sssl", "--input", k2]) == 1
    bad = tmp / "bad.json"
    bad.write_text('{"n": 2, "edges": [{"tail": [0], "head": []}]}')
    assert main(["spectral", "--input", str(bad)]) == 2
    assert main(["spectral", "--input", str(tmp / "missing.json")]) == 2
    (tmp / "broken.json").write_text("{")
    assert main(["derivatives", "--input", str(tmp / "broken.json")]) == 2


def _run(args, env_extra=None):
    env = dict(os.environ, **(env_extra or {}))
    return subprocess.run([sys.executable, "-m", "hyperdiff.cli", *args], capture_output=True,
                          env=env, check=True).stdout


def test_deterministic_bytes(files):
    _, k2, *_ = files
    args = ["spectral", "--input", k2, "--restarts", "3", "--seed", "7"]
    assert _run(args) == _run(args)


def test_fallback_path_matches(files):
    tmp, *_ = files
    g = tmp / "h.json"
    g.write_text(json.dumps({"n": 4, "f": [3, 1, 1, 0], "edges": [
        {"tail": [0, 1], "head": [2, 3], "w": 1.5}, {"tail": [2], "head": [0, 1], "w": 0.5},
        {"tail": [1, 3], "head": [1, 3], "w": 1.0}]}))
    args = ["derivatives", "--input", str(g), "--order", "2"]
    fast = json.loads(_run(args))
    slow = json.loads(_run(args, {"HYPERDIFF_DISABLE_NUMBA": "1"}))
    assert fast["partitions"] == slow["partitions"]
    for a, b in zip(fast["derivatives"], slow["derivatives"]):
        assert a == pytest.approx(b, abs=1e-12)
