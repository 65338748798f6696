import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from localmodels.cli import main
from localmodels.protocols import LocalModelCertificate


@pytest.fixture
def runner():
    return CliRunner()


def test_run_unsteerable_werner(runner, tmp_path):
    out = tmp_path / "cert.json"
    res = runner.invoke(main, [
        "run", "--family", "werner", "--alpha", "0.40",
        "--mode", "lhs", "--level", "1", "-o", str(out),
    ])
    assert res.exit_code == 0, res.output
    assert "VERIFIED" in res.output
    cert = LocalModelCertificate.from_json(out.read_text())
    assert cert.q_star == pytest.approx(1.0, abs=1e-6)


def test_run_singlet_reports_bound(runner, tmp_path):
    out = tmp_path / "cert.json"
    res = runner.invoke(main, [
        "run", "--family", "werner", "--alpha", "1.0",
        "--mode", "lhs", "--level", "1", "-o", str(out),
    ])
    assert res.exit_code == 0, res.output
    cert = LocalModelCertificate.from_json(out.read_text())
    assert cert.q_star == pytest.approx(0.43, abs=0.01)


def test_run_malformed_flags(runner, tmp_path):
    out = tmp_path / "cert.json"
    res = runner.invoke(main, [
        "run", "--family", "werner", "--alpha", "2.0", "-o", str(out),
    ])
    assert res.exit_code == 1
    assert not out.exists()
    res = runner.invoke(main, ["run", "-o", str(out)])
    assert res.exit_code != 0
    assert not out.exists()


def test_run_state_file(runner, tmp_path):
    state = tmp_path / "state.json"
    m = np.eye(4) / 4
    state.write_text(json.dumps(
        {"matrix": [m.tolist(), (0 * m).tolist()], "dim_a": 2, "dim_b": 2}
    ))
    out = tmp_path / "cert.json"
    res = runner.invoke(main, [
        "run", "--state-file", str(state), "--level", "1", "-o", str(out),
    ])
    assert res.exit_code == 0, res.output


def test_sweep_csv_format(runner, tmp_path):
    out = tmp_path / "sweep.csv"
    grid = f"{np.pi / 8},{np.pi / 4}"
    res = runner.invoke(main, [
        "sweep", "--family", "alpha-theta", "--grid", grid,
        "--level", "1", "-o", str(out),
    ])
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2
    assert set(rows[0]) == {"family", "mode", "level", "theta", "alpha_bound",
                           "q_star", "eta", "runtime_s"}
    # theta = pi/4 is the singlet; level-1 bound near 0.43
    assert float(rows[1]["alpha_bound"]) == pytest.approx(0.43, abs=0.01)
    assert "." in rows[1]["alpha_bound"] and "," not in rows[1]["alpha_bound"]


def test_sweep_empty_grid(runner, tmp_path):
    res = runner.invoke(main, [
        "sweep", "--family", "alpha-theta", "--grid", "",
        "-o", str(tmp_path / "s.csv"),
    ])
    assert res.exit_code == 1


def test_shrink_icosahedron_and_cube(runner):
    res = runner.invoke(main, ["shrink", "--set", "icosahedron"])
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["eta"] == pytest.approx(np.sqrt((5 + 2 * np.sqrt(5)) / 15),
                                       abs=1e-9)
    res = runner.invoke(main, ["shrink", "--set", "cube"])
    assert json.loads(res.output)["eta"] == pytest.approx(1 / np.sqrt(3),
                                                          abs=1e-9)


def test_verify_fresh_and_tampered(runner, tmp_path):
    out = tmp_path / "cert.json"
    runner.invoke(main, [
        "run", "--family", "werner", "--alpha", "1.0", "--level", "1",
        "-o", str(out),
    ])
    res = runner.invoke(main, ["verify", str(out)])
    assert res.exit_code == 0
    doc = json.loads(out.read_text())
    doc["q_star"] = min(1.0, doc["q_star"] + 1e-3)
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(doc))
    res = runner.invoke(main, ["verify", str(tampered)])
    assert res.exit_code == 3
    res = runner.invoke(main, ["verify", str(tmp_path / "missing.json")])
    assert res.exit_code == 1


def test_solver_tol_env_override(runner, tmp_path, monkeypatch):
    monkeypatch.setenv("LMF_SOLVER_TOL", "1e-6")
    out = tmp_path / "cert.json"
    res = runner.invoke(main, [
        "run", "--family", "werner", "--alpha", "1.0", "--level", "1",
        "-o", str(out),
    ])
    assert res.exit_code == 0
    assert LocalModelCertificate.from_json(out.read_text()).solver_tol == 1e-6


def test_catalog_list(runner):
    res = runner.invoke(main, ["catalog-list"])
    assert res.exit_code == 0
    for name in ("werner", "alpha-theta", "qubit-qudit", "bound-entangled",
                 "non-full-rank"):
        assert name in res.output


def test_deterministic_certificate_hash(runner, tmp_path):
    hashes = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        runner.invoke(main, [
            "run", "--family", "werner", "--alpha", "1.0", "--level", "1",
            "--seed", "0", "-o", str(out),
        ])
        hashes.append(json.loads(out.read_text())["content_hash"])
    assert hashes[0] == hashes[1]
