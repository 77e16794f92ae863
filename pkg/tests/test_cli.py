import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from rbfid import cli
from rbfid.errors import EigSolverFailure

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


@pytest.mark.parametrize("name", sorted(p.stem for p in CONFIGS.glob("*.json")))
def test_shipped_configs_analyze(tmp_path, name):
    assert cli.main(["analyze", "--config", str(CONFIGS / f"{name}.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert {"spectral", "fidelity", "notes"} <= set(report)


def test_analyze_notes(tmp_path, capsys):
    assert cli.main(["analyze", "--config", str(CONFIGS / "depolarizing.json"), "--out", str(tmp_path)]) == 0
    assert "p == q" in capsys.readouterr().out
    assert cli.main(["analyze", "--config", str(CONFIGS / "dephasing_lr.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["spectral"]["q"] < report["spectral"]["p"]
    assert any(n.startswith("q < p") for n in report["notes"])
    assert report["bounds"]["q_over_alpha"] <= report["bounds"]["q_over_alpha_max"]


def test_analyze_conjugate_unitary_warning(tmp_path, capsys):
    assert cli.main(["analyze", "--config", str(CONFIGS / "conjugate_unitary.json"), "--out", str(tmp_path)]) == 0
    assert "r = 0, ε > 0" in capsys.readouterr().err


def test_analyze_extras(tmp_path):
    assert cli.main(["analyze", "--config", str(CONFIGS / "proctor.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["perturbative"]["coeffs"][3] == pytest.approx(-233 / 864)
    assert report["montecarlo"]["validation"]["ok"]


def test_outputs_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = {"noise": {"type": "pauli_lr", "l": [0, 0, 0.01], "s": [0, 0, 0]}, "outputs": "results"}
    assert cli.main(["analyze", "--config", _write(tmp_path, cfg)]) == 0
    assert (tmp_path / "results" / "report.json").exists()


def test_exit_codes(tmp_path, monkeypatch):
    not_cp = {"noise": {"type": "gate_independent_lr",
                        "R": {"kind": "ptm", "matrix": np.diag([1, 1.3, 1, 1]).tolist()}}}
    assert cli.main(["analyze", "--config", _write(tmp_path, not_cp), "--out", str(tmp_path)]) == 2
    bad_prob = {"noise": {"type": "pauli_lr", "l": [0.9, 0.9, 0], "s": [0, 0, 0]}}
    assert cli.main(["analyze", "--config", _write(tmp_path, bad_prob), "--out", str(tmp_path)]) == 2
    (tmp_path / "broken.json").write_text("{not json")
    assert cli.main(["analyze", "--config", str(tmp_path / "broken.json")]) == 3
    assert cli.main(["analyze", "--config", str(tmp_path / "missing.json")]) == 3
    bad_analysis = {"noise": {"type": "pauli_lr", "l": [0, 0, 0], "s": [0, 0, 0]}, "analyses": ["tarot"]}
    assert cli.main(["analyze", "--config", _write(tmp_path, bad_analysis)]) == 3
    assert cli.main(["analyze", "--config", _write(tmp_path, {"noise": {"type": "?"}})]) == 3
    bad_rb = {"noise": {"type": "pauli_lr", "l": [0, 0, 0], "s": [0, 0, 0]}, "rb": {"lengths": [5, 1]}}
    assert cli.main(["simulate", "--config", _write(tmp_path, bad_rb), "--out", str(tmp_path)]) == 3
    assert cli.main(["frobnicate"]) == 3

    def boom(*args, **kwargs):
        raise EigSolverFailure("did not converge")

    monkeypatch.setattr(cli, "analyze_model", boom)
    assert cli.main(["analyze", "--config", str(CONFIGS / "depolarizing.json"), "--out", str(tmp_path)]) == 4


def test_sweep_fig1(tmp_path):
    assert cli.main(["sweep-fig1", "--grid", "3", "--out", str(tmp_path)]) == 0
    header, rows = _read_csv(tmp_path / "fig1.csv")
    assert header == ["beta", "p_over_alpha", "q_over_alpha_min", "q_over_alpha_max", "q_over_alpha_sample"]
    assert np.allclose(rows[:, :4], [[0, 0, 0, 0.5], [0.5, 0.5, 0, 0.75], [1, 1, 0, 1]])
    assert cli.main(["sweep-fig1", "--grid", "1", "--out", str(tmp_path)]) == 3


def test_proctor_scan(tmp_path):
    args = ["proctor-scan", "--theta", "0,0.02,0.05,0.1,0.2", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    header, rows = _read_csv(tmp_path / "proctor_scan.csv")
    assert header == ["theta", "epsilon", "r_spectral", "r_fitted"]
    assert np.array_equal(rows[0], [0, 0, 0, 0])
    eps = dict(zip(rows[:, 0], rows[:, 1]))
    assert eps[0.05] == pytest.approx(0.05**2 / 4, rel=0.02)
    summary = json.loads((tmp_path / "proctor_scan.json").read_text())
    assert summary["slope_epsilon"] == pytest.approx(2.0, abs=0.05)
    assert summary["slope_r_spectral"] == pytest.approx(4.0, abs=0.1)
    assert cli.main(["proctor-scan", "--theta", "0.5", "--out", str(tmp_path)]) == 3
    assert cli.main(["proctor-scan", "--theta", "x", "--out", str(tmp_path)]) == 3
    assert cli.main(["proctor-scan", "--config", str(CONFIGS / "depolarizing.json"), "--out", str(tmp_path)]) == 3


def test_simulate_deterministic(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    cfg = str(CONFIGS / "dephasing_lr.json")
    assert cli.main(["simulate", "--config", cfg, "--out", str(a)]) == 0
    assert cli.main(["simulate", "--config", cfg, "--out", str(b)]) == 0
    for name in ("rbrun.json", "rb.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert cli.main(["simulate", "--config", cfg, "--out", str(c), "--seed", "5"]) == 0
    run = json.loads((c / "rbrun.json").read_text())
    assert run["config"]["seed"] == 5
    assert (c / "rbrun.json").read_bytes() != (a / "rbrun.json").read_bytes()
    assert run["validation"]["ok"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "rbfid", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("analyze", "simulate", "sweep-fig1", "proctor-scan"):
        assert cmd in out.stdout
