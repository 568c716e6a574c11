"""CLI: exit codes, artifact schemas, manifests, config handling."""

import json

import numpy as np
import pytest

from qcurv6 import io
from qcurv6.cli import main


def run(args):
    return main(args)


def test_spherical_run(tmp_path):
    out = tmp_path / "sph"
    assert run(["spherical", "--out", str(out)]) == 0
    fields, data = io.read_csv(out / "trajectory.csv",
                               expected_header="r,u,du,lap_u,dlap_u,bilap_u,dbilap_u")
    assert data.shape[1] == 7
    _, res = io.read_csv(out / "residuals.csv")
    assert res[:, 1].max() < 1e-6
    _, curv = io.read_csv(out / "curvature_table.csv", expected_header="r,curvature_quad,curvature_closed,residual")
    manifest = io.read_json(out / "manifest.json")
    assert all(ch["passed"] for ch in manifest["checks"])
    names = {a["path"] for a in manifest["artifacts"]}
    assert {"trajectory.csv", "curvature_table.csv", "residuals.csv", "constants.json"} <= names
    for art in manifest["artifacts"]:
        assert io.sha256_file(out / art["path"]) == art["sha256"]


def test_spherical_invalid_rmax_usage_error(tmp_path):
    assert run(["spherical", "--out", str(tmp_path / "x"), "--r-max", "0"]) == 2


def test_family_unknown_id_usage_error(tmp_path):
    assert run(["family", "--example", "9z", "--out", str(tmp_path / "x")]) == 2


def test_family_empty_params_usage_error(tmp_path):
    assert run(["family", "--example", "1b", "--params", "", "--out", str(tmp_path / "x")]) == 2


def test_family_1a_flattening(tmp_path):
    out = tmp_path / "fam1a"
    assert run(["family", "--example", "1a", "--params", "5,20", "--out", str(out)]) == 0
    rep = io.read_json(out / "member_0_report.json")
    assert rep["case"] == "i"


def test_family_1b_concentrating(tmp_path):
    out = tmp_path / "fam1b"
    assert run(["family", "--example", "1b", "--params", "5,20,80", "--out", str(out)]) == 0
    _, summary = io.read_csv(out / "family_summary.csv")
    assert summary.shape[0] == 3
    assert np.all(summary[:, -1] == 2.0)  # case column encodes ii as 2


def test_hybrid_rejects_subcritical_lambda_target(tmp_path):
    assert run(["hybrid", "--Lambda-factor", "0.5", "--out", str(tmp_path / "x")]) == 2


def test_hybrid_rejects_non_decreasing_lambdas(tmp_path):
    assert run(["hybrid", "--lambdas", "1/48, 1/24", "--out", str(tmp_path / "x")]) == 2


@pytest.mark.slow
def test_hybrid_run_and_report(tmp_path):
    out = tmp_path / "hyb"
    code = run(["hybrid", "--out", str(out), "--lambdas", "1/24, 1/96, 1/384, 1/768"])
    assert code == 0
    manifest = io.read_json(out / "manifest.json")
    ids = {ch["id"] for ch in manifest["checks"]}
    assert {"u0_strictly_increasing", "lambda_lap_u0_strictly_decreasing",
            "case_iv_at_smallest_lambda"} <= ids
    events = io.read_json(out / "member_3_events.json")
    assert set(events) == {"theta1", "theta1_tilde", "theta2", "theta2_tilde", "theta3", "theta4"}
    assert events["theta1"] and events["theta4"]
    _, cont = io.read_csv(out / "continuation.csv")
    assert cont.shape[0] == 4
    assert run(["report", "--in", str(out)]) == 0


def test_linearize_run(tmp_path):
    out = tmp_path / "lin"
    assert run(["linearize", "--out", str(out)]) == 0
    rep = io.read_json(out / "linearized_report.json")
    assert abs(rep["psi0"]["a"] - 8.0) < 1e-4
    assert abs(rep["psi0"]["alpha"] - 48.0) < 0.05
    io.read_csv(out / "psi0.csv", expected_header="r,psi,dpsi,lap_psi,dlap_psi,bilap_psi,dbilap_psi")


def test_linearize_rmax_validation(tmp_path):
    assert run(["linearize", "--out", str(tmp_path / "x"), "--r-max", "30"]) == 2


def test_analyze_external_csv(tmp_path):
    sph = tmp_path / "sph"
    assert run(["spherical", "--out", str(sph)]) == 0
    out = tmp_path / "an"
    assert run(["analyze", "--in", str(sph / "trajectory.csv"), "--out", str(out)]) == 0
    rep = io.read_json(out / "member_0_report.json")
    assert rep["case"] in ("i", "ii")


def test_analyze_schema_error(tmp_path):
    bad = tmp_path / "bad.csv"
    io.write_csv(bad, "r,value", [[0.0, 1.0], [1.0, 2.0]])
    assert run(["analyze", "--in", str(bad), "--out", str(tmp_path / "x")]) == 2


def test_config_file_roundtrip(tmp_path):
    cfgfile = tmp_path / "run.ini"
    cfgfile.write_text("[spherical]\nr_max = 6.0\n[run]\ntol_scale = 2.0\n")
    out = tmp_path / "sph"
    assert run(["spherical", "--config", str(cfgfile), "--out", str(out)]) == 0
    manifest = io.read_json(out / "manifest.json")
    assert manifest["config"]["spherical"]["r_max"] == "6.0"
    assert manifest["config"]["run"]["tol_scale"] == "2.0"
    assert manifest["checks"][0]["tol"] == 2e-6  # tolerances scale and are recorded


def test_missing_config_usage_error(tmp_path):
    assert run(["spherical", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path / "x")]) == 2
