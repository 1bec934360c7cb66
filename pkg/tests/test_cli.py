import csv
import json

import pytest

from kinkstab.cli import main
from kinkstab.config import config_from_dict
from kinkstab.pipeline import analyze, scan, selftest


def _cfg(tmp_path, data):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(data))
    return str(p)


def test_validate_and_kink_outputs(tmp_path):
    assert main(["validate", "--out", str(tmp_path / "v")]) == 0
    rep = json.loads((tmp_path / "v" / "validation.json").read_text())
    assert rep["schema_version"] == 1 and rep["ok"] and rep["omega_sq"] == 2.0
    assert main(["kink", "--out", str(tmp_path / "k")]) == 0
    with open(tmp_path / "k" / "kink.csv") as fh:
        assert next(csv.reader(fh)) == ["x", "H", "Hp", "Hpp", "Hppp"]


def test_spectrum_report(tmp_path):
    assert main(["spectrum", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "spectrum.json").read_text())
    assert rep["sector"] == "odd" and rep["hypothesis1"] is True
    assert abs(rep["eigenvalues"][0] - 1.5) < 1e-6
    assert main(["spectrum", "--sector", "even", "--out", str(tmp_path / "e")]) == 0


def test_darboux_fgr_hyp3_outputs(tmp_path):
    assert main(["darboux", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "darboux.csv") as fh:
        assert next(csv.reader(fh)) == ["x", "P1", "P2", "Z", "q0", "q1"]
    cfg = _cfg(tmp_path, {"fgr": {"refine": False}})
    assert main(["fgr", "--config", cfg, "--out", str(tmp_path)]) == 2   # no refinement => indeterminate
    rep = json.loads((tmp_path / "fgr.json").read_text())
    assert {"gamma", "k", "tail_amplitude", "hypothesis2"} <= set(rep)
    assert main(["hyp3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "weights.csv").exists()


def test_analyze_exit_codes(tmp_path):
    assert main(["analyze", "--out", str(tmp_path / "a")]) == 0
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["verdict"] == "all-pass"
    assert rep["hypothesis3"]["witness_gamma"] is not None
    bad = _cfg(tmp_path, {"potential": {"kind": "phi8", "m": 1.2}})
    assert main(["analyze", "--config", bad, "--out", str(tmp_path / "b")]) == 2
    rep = json.loads((tmp_path / "b" / "report.json").read_text())
    assert rep["verdict"] == "fail" and rep["failures"] == ["hypothesis1"]
    broken = _cfg(tmp_path, {"grid": {"n": 2}})
    assert main(["analyze", "--config", broken, "--out", str(tmp_path / "c")]) == 1
    assert main(["analyze", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1


def test_invalid_potential_is_scientific_failure():
    rep = analyze(config_from_dict({"potential": {"kind": "phi8", "m": 0.5}}))
    assert rep.exit_code == 2 and rep.errors


def test_effective_config_written(tmp_path):
    cfg = _cfg(tmp_path, {"seed": 9})
    assert main(["validate", "--config", cfg, "--seed", "11", "--out", str(tmp_path)]) == 0
    eff = json.loads((tmp_path / "effective_config.json").read_text())
    assert eff["seed"] == 11 and eff["grid"]["n"] == 4001


def test_scan_empty_and_ordered(tmp_path):
    assert main(["scan", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "scan.csv").read_text().strip().count("\n") == 0
    rows = scan(config_from_dict({}), "m", [10.0, 5.0], jobs=2)
    assert [r["value"] for r in rows] == [10.0, 5.0]
    assert all(r["verdict"] == "all-pass" for r in rows)
    assert rows[1]["lambda_sq"] < rows[0]["lambda_sq"] < 1.5


def test_scan_eta0_continuity():
    rows = scan(config_from_dict({"fgr": {"refine": False}}), "eta0", [0.0, 0.01, 0.05])
    gaps = [abs(r["lambda_sq"] - 1.5) for r in rows]
    assert gaps[0] < 1e-6 < gaps[1] < gaps[2] < 0.1


def test_scan_records_failures():
    rows = scan(config_from_dict({}), "m", [0.5])
    assert rows[0]["verdict"] == "fail" and "InvalidPotential" in rows[0]["error"]


def test_selftest_tolerance_monotone():
    rep = selftest(tolerances={"lambda_sq": 1e-2})
    assert rep["passed"]
    tight = selftest(tolerances={"lambda_sq": 1e-16})
    assert tight["failed"] == ["lambda_sq"]


def test_simulate_subcommand(tmp_path):
    cfg = _cfg(tmp_path, {"simulation": {"T": 2.0, "L_factor": 40.0, "functionals": False}})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["schema_version"] == 1
    assert summary["summary"]["z0"] == pytest.approx(0.05)
    assert (tmp_path / "trajectory.csv").read_text().startswith("t,z1,z2,abs_z,")
