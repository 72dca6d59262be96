import json
import subprocess
import sys

import numpy as np
import pytest

from weierlin import polymap as pm
from weierlin.cli import main

import oracles


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture
def henon_map(tmp_path):
    p = tmp_path / "henon.json"
    p.write_text(json.dumps(pm.classic_henon().to_dict()))
    return str(p)


def test_henon_report(capsys, tmp_path):
    csv = tmp_path / "curve.csv"
    rep = report(capsys, "henon", "--sigma", "1.4", "--beta", "0.3", "--csv", str(csv))
    assert rep["command"] == "henon"
    assert rep["config"]["sigma"] == 1.4
    assert rep["lambda"] == pytest.approx(-1.9237, abs=1e-4)
    assert rep["lambda_prime"] == pytest.approx(0.1559, abs=1e-4)
    assert rep["c0"] == pytest.approx(list(oracles.HENON_C0), abs=1e-9)
    assert rep["ratios"]["hardy"] is False and rep["D"] is None
    assert not csv.exists()  # synthesis was refused, so no curve


def test_weier_hardy_violation_exit(capsys):
    code, out, err = run(capsys, "weier", "--lambda", "2", "--r", "0.4")
    assert code == 2 and out == ""
    assert "HardyViolation" in err


def test_weier_report_and_csv(capsys, tmp_path):
    csv = tmp_path / "w.csv"
    rep = report(capsys, "weier", "--lambda", "2", "--r", "0.6", "--samples", "64", "--csv", str(csv))
    assert rep["D"] == pytest.approx(oracles.DIM_06)
    assert rep["tail_bound"] == pytest.approx(oracles.TAIL_06_N12, rel=1e-9)
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("t,") and len(lines) == 65


def test_boxdim_line(capsys, tmp_path):
    x = np.linspace(0, 1, 10_000)
    path = tmp_path / "line.csv"
    path.write_text("x,y\n" + "\n".join(f"{v!r},{2 * v!r}" for v in x.tolist()))
    rep = report(capsys, "boxdim", "--input", str(path))
    assert rep["estimate"]["D"] == pytest.approx(1.0, abs=0.05)


def test_malformed_json_exit(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2,\n  "terms": [ }\n')
    code, _, err = run(capsys, "spectrum", "--map", str(bad))
    assert code == 1
    assert "line 2" in err and "column" in err


def test_missing_file_exit(capsys, tmp_path):
    code, _, err = run(capsys, "boxdim", "--input", str(tmp_path / "nope.csv"))
    assert code == 1 and "cannot read" in err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_fixedpoint_and_spectrum(capsys, henon_map):
    rep = report(capsys, "fixedpoint", "--map", henon_map, "--start", "0.5,0.2")
    xs = sorted(p["point"][0] for p in rep["fixed_points"])
    assert any(abs(x - oracles.HENON_X_STAR) <= 1e-10 for x in xs)
    at = f"{oracles.HENON_X_STAR!r},{0.3 * oracles.HENON_X_STAR!r}"
    rep = report(capsys, "spectrum", "--map", henon_map, "--at", at)
    assert rep["eigenvalues"][0]["re"] == pytest.approx(oracles.HENON_LAMBDA, abs=1e-9)
    assert rep["nonresonant"] is True


def test_linearize_command(capsys, tmp_path):
    path = tmp_path / "q.json"
    path.write_text(json.dumps({
        "dim": 1,
        "terms": [
            {"target": 0, "exponents": [1], "coeff": 2.0},
            {"target": 0, "exponents": [2], "coeff": 1.0},
        ],
    }))
    csv = tmp_path / "curve.csv"
    rep = report(capsys, "linearize", "--map", str(path), "--csv", str(csv), "--tmax", "2", "--samples", "5")
    assert rep["rho0"] > 0
    rows = [list(map(float, r.split(","))) for r in csv.read_text().splitlines()[1:]]
    assert [r[1] for r in rows] == pytest.approx(np.expm1([r[0] for r in rows]), rel=1e-7)


def test_bohr_command(capsys, tmp_path):
    t = np.linspace(-100, 100, 20001)
    v = np.exp(1j * t)
    path = tmp_path / "sig.csv"
    path.write_text("t,re,im\n" + "\n".join(f"{a!r},{b!r},{c!r}" for a, b, c in zip(t.tolist(), v.real.tolist(), v.imag.tolist())))
    rep = report(capsys, "bohr", "--input", str(path), "--lambda", "2", "--kmin", "-1", "--kmax", "1")
    by_mu = {c["mu"]: c for c in rep["spectrum"]["coefficients"]}
    assert by_mu[1.0]["re"][0] == pytest.approx(1.0, abs=1e-3)
    assert by_mu[2.0]["null"] is True


def test_diffiter_command(capsys, tmp_path):
    traj = tmp_path / "traj.csv"
    rep = report(capsys, "diffiter", "--csv", str(traj))
    assert rep["prop1"]["c0"] == pytest.approx([2.0], abs=1e-12)
    assert rep["prop1"]["D"] == pytest.approx(4.0)
    assert rep["limit"]["status"] == "refused"
    assert traj.read_text().startswith("step,a1")
    rep = report(capsys, "diffiter", "--field", "lorenz")
    assert rep["prop1"]["rho"] > 0


def test_reports_byte_identical(tmp_path):
    outs = []
    out = tmp_path / "r.json"
    for _ in range(2):
        assert main(["--seed", "3", "--out", str(out), "weier", "--lambda", "2", "--r", "0.6"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    text = outs[0].decode()
    assert '"seed": 3' in text


def test_atomic_write_leaves_no_temp(tmp_path):
    out = tmp_path / "rep.json"
    assert main(["--out", str(out), "weier", "--lambda", "2", "--r", "0.6"]) == 0
    assert [p.name for p in tmp_path.iterdir()] == ["rep.json"]
    assert main(["--out", str(out), "weier", "--lambda", "2", "--r", "0.7"]) == 0
    assert json.loads(out.read_text())["config"]["r"] == 0.7


def test_entry_point_module():
    proc = subprocess.run(
        [sys.executable, "-m", "weierlin.cli", "weier", "--lambda", "2", "--r", "0.4"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
