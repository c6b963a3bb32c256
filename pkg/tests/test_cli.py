import json
import subprocess
import sys
from pathlib import Path

import pytest

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def run(*args):
    return subprocess.run([sys.executable, "-m", "bcghost", *args], capture_output=True, text=True)


def test_verify_virasoro_passes():
    r = run("verify", "--suite", "virasoro", "--max-degree", "3")
    assert r.returncode == 0
    report = json.loads(r.stdout)
    assert report["pass"] and report["suites"][0]["suite"] == "virasoro"


def test_verify_pairings_passes():
    r = run("verify", "--suite", "pairings", "--max-degree", "3")
    assert r.returncode == 0 and json.loads(r.stdout)["pass"]


def test_bad_suite_is_usage_error():
    r = run("verify", "--suite", "nonsense")
    assert r.returncode == 2 and "invalid choice" in r.stderr


def test_vacuum_one_point_is_bra_minus_one():
    r = run("vacuum", "--curve", str(SAMPLES / "p1_one_point.json"), "--cutoff", "4")
    assert r.returncode == 0
    values = json.loads(r.stdout)["functional"]["values"]
    assert values == [{"slots": [{"mus": [], "nus": [-1]}], "value": "1/1"}]


def test_vacuum_nodal_is_one_dimensional():
    r = run("vacuum", "--curve", str(SAMPLES / "nodal_p1.json"), "--cutoff", "3")
    report = json.loads(r.stdout)
    assert r.returncode == 0 and report["dimensions"] == [1, 1, 1]


def test_malformed_json_reports_position():
    r = run("vacuum", "--curve", str(SAMPLES / "malformed.json"), "--cutoff", "3")
    assert r.returncode == 2
    assert "parse error" in r.stderr and "line 1 column 33" in r.stderr


def test_invalid_curve_is_rejected(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"components": [{"points": ["0", "inf"]}], "glue": [[[0, 0], [0, 1]]]}))
    r = run("vacuum", "--curve", str(bad), "--cutoff", "2")
    assert r.returncode == 2 and "invalid curve" in r.stderr


def test_sew_reports_zero_residuals():
    r = run("sew", "--curve", str(SAMPLES / "sew_three_points.json"), "--q-order", "3")
    report = json.loads(r.stdout)
    assert r.returncode == 0 and report["restriction_sign"] == -1
    assert set(report["gauge_residuals"]["form"]) == {"0/1"}
    assert set(report["fuchsian"]["per_order"]) == {"0/1"}


def test_sew_q_order_zero_is_empty():
    r = run("sew", "--curve", str(SAMPLES / "sew_three_points.json"), "--q-order", "0")
    assert r.returncode == 0 and json.loads(r.stdout)["series"]["coeffs"] == []


def test_sew_insufficient_cutoff_gives_hint():
    r = run("sew", "--curve", str(SAMPLES / "sew_three_points.json"), "--q-order", "4", "--vacuum-cutoff", "3")
    assert r.returncode == 2 and "raise --vacuum-cutoff to at least" in r.stderr


@pytest.mark.parametrize("name", ["genus0_data.json", "nodal_genus1_data.json"])
def test_preferred_from_data(name):
    r = run("preferred", "--data", str(SAMPLES / name), "--cutoff", "3")
    assert r.returncode == 0 and json.loads(r.stdout)["minor_stable"]


def test_preferred_truncation_hint():
    r = run("preferred", "--data", str(SAMPLES / "genus0_data.json"), "--cutoff", "14")
    assert r.returncode == 2 and "does not reach cutoff" in r.stderr


def test_out_file_matches_stdout(tmp_path):
    out = tmp_path / "report.json"
    args = ["verify", "--suite", "covariance", "--max-degree", "2", "--seed", "5"]
    r1 = run(*args, "--out", str(out))
    r2 = run(*args)
    assert r1.returncode == 0 and r1.stdout == ""
    assert out.read_text() == r2.stdout
