from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import ZETA_SCALAR
from resonance_kit import bundled_path, cli
from resonance_kit.quad import Rectangle
from resonance_kit.resonance import ResonanceList, SearchError

SCALAR = str(bundled_path("scalar"))


def run(tmp_path, *argv, config=SCALAR):
    out = tmp_path / "out"
    code = cli.main([argv[0], "--config", config, "--out", str(out), *argv[1:]])
    return code, out


def report(out):
    return json.loads((out / "report.json").read_text())


def test_validate_ok(tmp_path):
    code, out = run(tmp_path, "validate")
    assert code == 0
    rep = report(out)
    assert rep["pass"] is True and rep["schema"] == "resonance-kit/report/v1"
    assert rep["model"]["name"] == "scalar" and len(rep["checksum"]) == 64


def test_validate_zero_coupling_is_invalid_model(tmp_path):
    code, out = run(tmp_path, "validate", config=str(bundled_path("zero_coupling")))
    assert code == 2
    assert report(out)["notes"]


def test_resonances_output(tmp_path):
    code, out = run(tmp_path, "resonances", "--rect", "0,2,-0.5,-0.001")
    assert code == 0
    res = json.loads((out / "resonances.json").read_text())
    assert res["complete"] is True
    (r,) = res["resonances"]
    assert abs(complex(*r["zeta"]) - ZETA_SCALAR) < 1e-12
    assert r["r"] == 1 and r["q"] == 1 and len(r["k0"]) == 1


def test_report_is_deterministic(tmp_path):
    a = run(tmp_path / "a", "resonances", "--rect", "0,2,-0.5,-0.001")[1]
    b = run(tmp_path / "b", "resonances", "--rect", "0,2,-0.5,-0.001")[1]
    assert report(a)["checksum"] == report(b)["checksum"]


def test_boundary_zero_jitter_is_noted(tmp_path):
    code, out = run(tmp_path, "resonances", "--rect", f"{ZETA_SCALAR.real!r},2,-0.5,-0.001")
    assert code == 0
    rep = report(out)
    assert rep["results"]["search"]["jitters"] >= 1
    assert any("jittered" in n for n in rep["notes"])


def test_zero_coupling_search_is_empty(tmp_path):
    code, out = run(tmp_path, "resonances", "--rect", "0,2,-0.5,-0.01",
                    config=str(bundled_path("zero_coupling")))
    assert code == 0
    assert json.loads((out / "resonances.json").read_text())["resonances"] == []


def test_smatrix_outputs(tmp_path):
    code, out = run(tmp_path, "smatrix", "--points", "41", "--rect", "0,2,-0.5,-0.001")
    assert code == 0
    rows = list(csv.reader((out / "smatrix.csv").open()))
    assert rows[0] == ["lambda", "re_S00", "im_S00"] and len(rows) == 42
    s = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    np.testing.assert_allclose(s[:, 0] ** 2 + s[:, 1] ** 2, 1.0, atol=1e-12)
    rho = list(csv.reader((out / "rho.csv").open()))
    assert rho[0] == ["lambda", "rho_0"] and len(rho) == 42
    (fit,) = report(out)["results"]["breit_wigner"]
    assert abs(fit["center_offset_over_gamma"]) < 0.05 and abs(fit["width_rel_err"]) < 0.1


def test_gamov_and_negative_control(tmp_path):
    code, out = run(tmp_path / "ok", "gamov", "--rect", "0,2,-0.5,-0.001")
    assert code == 0
    code, out = run(tmp_path / "bad", "gamov", "--rect", "0,2,-0.5,-0.001", "--zeta-shift", "0.1")
    assert code == 4
    (check,) = report(out)["checks"]
    assert check["pass"] is False and check["lhs"] > 1e-3


def test_decay_outputs(tmp_path):
    code, out = run(tmp_path, "decay", "--rect", "0,2,-0.5,-0.001", "--t-max", "40", "--dt", "1")
    assert code == 0
    rows = list(csv.reader((out / "survival.csv").open()))
    assert rows[0] == ["t", "re_A", "im_A", "abs_A"] and len(rows) == 42
    rep = report(out)
    assert {c["name"] for c in rep["checks"]} == {"A(0)=1", "amplitude_bound", "decay_rate"}


def test_decay_fit_error_is_reported(tmp_path):
    code, out = run(tmp_path, "decay", "--rect", "0,2,-0.5,-0.001", "--t-max", "10",
                    "--fit-start", "9", "--fit-end", "10")
    assert code == 0
    assert "fewer than 4" in report(out)["results"]["decay_fit"]["error"]


def test_verify_scalar(tmp_path):
    code, out = run(tmp_path, "verify")
    rep = report(out)
    assert code == 0, [c["name"] for c in rep["checks"] if not c["pass"]]
    names = {c["name"].split("[")[0] for c in rep["checks"]}
    assert {"plemelj_jump", "s_unitarity", "intertwining", "prop4", "eigen_defect", "resolvent_pairing",
            "dirac_vs_psi", "paley_wiener", "semigroup_eigen_defect", "decay_rate"} <= names


def test_tolerance_override_can_fail_a_check(tmp_path):
    code, out = run(tmp_path, "decay", "--rect", "0,2,-0.5,-0.001", "--tol", "decay_rate=1e-9")
    assert code == 4
    assert report(out)["tolerances"]["decay_rate"] == 1e-9


@pytest.mark.parametrize("argv", [
    ["validate", "--rect", "1,2,3"],
    ["validate", "--rect", "a,b,c,d"],
    ["validate", "--rect", "1,1,0,1"],
    ["validate", "--tol", "nope=1"],
    ["validate", "--tol", "resolvent_pairing"],
    ["validate", "--tol", "resolvent_pairing=abc"],
    ["validate", "--tol", "resolvent_pairing=-1"],
])
def test_usage_errors(tmp_path, argv):
    assert run(tmp_path, *argv)[0] == 1


def test_bad_command_and_missing_config(tmp_path):
    assert cli.main(["explode", "--config", SCALAR]) == 1
    assert cli.main(["validate"]) == 1
    assert run(tmp_path, "validate", config=str(tmp_path / "missing.json"))[0] == 1


def test_malformed_and_invalid_configs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert run(tmp_path, "validate", config=str(bad))[0] == 1
    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"n": 1, "lambda0": [[1.0, 2.0]], "formfactor": {"terms": []}}))
    assert run(tmp_path, "validate", config=str(invalid))[0] == 2


def test_rect_outside_lower_half_plane(tmp_path):
    assert run(tmp_path, "resonances", "--rect", "0,2,-0.5,0.5")[0] == 1


def test_incomplete_search_exit_code(tmp_path, monkeypatch):
    cell = Rectangle(0.9, 1.1, -0.1, -0.001)
    monkeypatch.setattr(cli, "locate_resonances",
                        lambda *a, **k: ResonanceList([], rect=cell, winding=1,
                                                      exhausted=[(cell, 1)]))
    assert run(tmp_path, "resonances")[0] == 3


def test_search_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise SearchError("boundary zero persists")

    monkeypatch.setattr(cli, "locate_resonances", boom)
    assert run(tmp_path, "resonances")[0] == 3


def test_console_entry_point(tmp_path):
    out = tmp_path / "o"
    proc = subprocess.run([sys.executable, "-m", "resonance_kit", "validate", "--config", SCALAR,
                           "--out", str(out)], capture_output=True, text=True,
                          env={"RESONANCE_KIT_THREADS": "1", "PATH": ""})
    assert proc.returncode == 0, proc.stderr
    assert (out / "report.json").exists()
