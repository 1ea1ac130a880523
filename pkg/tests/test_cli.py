import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from pdem_bgcs import cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_model_command(capsys):
    code, out, _ = run(["model", "--lambda", "0", "--n-points", "5", "--x-max", "2"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert rows[0] == {"x": "-2", "mass": "1", "V": "2"}
    assert len(rows) == 5


def test_fig1_saturates(tmp_path, capsys):
    out = tmp_path / "fig1.csv"
    assert cli.main(["figures", "fig1", "--out", str(out), "--x-max", "50", "--n-points", "1001"]) == 0
    rows = [r for r in rows_of(out.read_text()) if float(r["lambda"]) == 0.25]
    x = np.array([float(r["x"]) for r in rows])
    v = np.array([float(r["V"]) for r in rows])
    right = x >= 0
    assert np.all(np.diff(v[right]) > 0)
    assert np.all(v < 2.0) and v[-1] > 1.9
    lams = {float(r["lambda"]) for r in rows_of(out.read_text())}
    assert lams == {-0.85, -0.55, -0.25, 0.25, 0.55, 0.85}


def test_fig2_normalized(capsys):
    code, out, _ = run(["figures", "fig2", "--n-max", "300"], capsys)
    assert code == 0
    rows = rows_of(out)
    for lp in (0.39, 0.9, 1.5, 2.6):
        p = [float(r["P_n"]) for r in rows if float(r["lambda_prime"]) == lp]
        assert abs(sum(p) - 1) <= 1e-10


def test_fig3_and_fig4(capsys):
    code, out, _ = run(["figures", "fig4", "--z-points", "20"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 80
    assert all(float(r["Q"]) < 0 and float(r["g2"]) < 1 for r in rows)
    assert max(float(r["abs_z"]) for r in rows) == 5.0
    code, out, _ = run(["figures", "fig3", "--z-points", "5"], capsys)
    assert code == 0
    assert rows_of(out)[0].keys() == {"lambda_prime", "abs_z", "mean", "variance"}


def test_figures_deterministic(tmp_path):
    for which in ("fig1", "fig2", "fig3", "fig4"):
        a, b = tmp_path / f"{which}a.csv", tmp_path / f"{which}b.csv"
        assert cli.main(["figures", which, "--out", str(a), "--z-points", "10"]) == 0
        assert cli.main(["figures", which, "--out", str(b), "--z-points", "10"]) == 0
        assert a.read_bytes() == b.read_bytes()


def test_state_command_and_json(capsys):
    code, out, _ = run(["state", "--lambda-prime", "0.9", "--z", "1+0.5j", "--trunc", "40",
                        "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["columns"] == ["n", "re_c", "im_c", "abs2_c"]
    assert len(payload["rows"]) == 40
    assert payload["meta"]["truncation"] == 40
    assert abs(sum(r[3] for r in payload["rows"]) - 1) <= 1e-12


def test_state_z_components(capsys):
    code, out, _ = run(["state", "--lambda-prime", "1.5", "--z-re", "0", "--z-im", "2",
                        "--trunc", "30"], capsys)
    assert code == 0
    row1 = rows_of(out)[1]
    assert float(row1["re_c"]) == pytest.approx(0.0, abs=1e-15)


def test_orbit_command(capsys):
    code, out, _ = run(["orbit", "--lambda", "0.25", "--format", "json"], capsys)
    assert code == 0
    meta = json.loads(out)["meta"]
    assert abs(meta["measured_omega"] - meta["predicted_omega"]) / meta["predicted_omega"] <= 1e-4


def test_moments_command(capsys):
    code, out, _ = run(["moments", "--lambda-prime", "1.5", "--n-max", "2"], capsys)
    assert code == 0
    assert all(float(r["rel_err"]) <= 1e-5 for r in rows_of(out))


def test_verify_algebra_harmonic(capsys):
    code, out, _ = run(["verify", "algebra", "--lambda-prime", "0"], capsys)
    assert code == 0
    checks = [r for r in rows_of(out) if r["status"] != "info"]
    assert checks and all(float(r["value"]) <= 1e-12 for r in checks)
    assert any(r["status"] == "info" for r in rows_of(out))


def test_verify_algebra_closure_is_informational(capsys):
    code, out, _ = run(["verify", "algebra", "--lambda-prime", "0.9"], capsys)
    assert code == 0
    info = [r for r in rows_of(out) if r["status"] == "info" and r["check"].startswith("[K-,K+]")]
    assert info and float(info[0]["value"]) > 1e-3


def test_verify_coherent_row(capsys):
    code, out, _ = run(["verify", "coherent", "--lambda-prime", "1.5", "--z", "3"], capsys)
    assert code == 0
    rows = rows_of(out)
    eig = [r for r in rows if r["check"].startswith("eigen_residual")]
    assert len(eig) == 1 and float(eig[0]["value"]) <= 1e-10


def test_verify_classical(capsys):
    code, out, _ = run(["verify", "classical"], capsys)
    assert code == 0
    assert all(r["status"] == "pass" for r in rows_of(out))


def test_verify_all_defaults(capsys):
    code, out, err = run(["verify", "all"], capsys)
    assert code == 0, err


def test_verify_all_only_failure_is_small_z_limit(capsys):
    _, out, _ = run(["verify", "all"], capsys)
    failed = [r["check"] for r in rows_of(out) if r["status"] == "fail"]
    assert all("small-|z| g2 limit" in name and "0.39" in name for name in failed)


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\nlambda_prime = 0.9\nz = 1+0j\ntrunc = 25\nformat = json\n")
    code, out, _ = run(["state", "--config", str(cfg)], capsys)
    assert code == 0
    assert len(json.loads(out)["rows"]) == 25
    code, out, _ = run(["state", "--config", str(cfg), "--trunc", "30", "--format", "csv"], capsys)
    assert code == 0
    assert len(rows_of(out)) == 30


@pytest.mark.parametrize("text", ["bogus = 1\n", "lambda_prime 0.9\n", "trunc = abc\n"])
def test_bad_config_file(tmp_path, capsys, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _, err = run(["state", "--config", str(cfg)], capsys)
    assert code == 2
    assert "configuration" in err


@pytest.mark.parametrize("argv", [
    ["state", "--lambda-prime", "0.5"],
    ["state", "--lambda-prime", "0.25", "--z", "1"],
    ["model", "--alpha", "-1"],
    ["model", "--lambda", "-0.25", "--x-max", "3"],
    ["state", "--z", "1", "--z-re", "2"],
    ["moments", "--lambda-prime", "0.39"],
    ["state", "--rel-tol", "0.5"],
    ["orbit", "--lambda", "-0.25", "--x0", "3"],
])
def test_config_errors_exit_two(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err.strip()


def test_numeric_failure_writes_sidecar(tmp_path, capsys):
    out = tmp_path / "state.csv"
    code, _, _ = run(["state", "--lambda-prime", "-0.5", "--z", "5", "--trunc", "3",
                      "--out", str(out)], capsys)
    assert code == 1
    log = tmp_path / "state.csv.err.log"
    assert "TruncationTooSmall" in log.read_text()
    assert not out.exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pdem_bgcs", "verify", "algebra",
                           "--lambda-prime", "0"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("suite,check,value,bound,status")
