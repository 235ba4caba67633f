import csv
import io
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from faraday_squeezing import cli, linear_io


def run(args, capsys):
    code = cli.main(args + ["-o", "-"])
    out, err = capsys.readouterr()
    return code, out, err


def rows_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


REF = ["--kappa2", "1", "--tau", "1", "--gamma", "0.1", "--gamma-p", "0.1"]


def test_spectrum_rows(capsys):
    code, out, _ = run(["spectrum", *REF, "--omega", "0:5:101"], capsys)
    rows = rows_csv(out)
    assert code == 0 and len(rows) == 101
    assert float(rows[0]["omega"]) == 0.0
    assert float(rows[0]["v_x"]) == pytest.approx(0.291667, abs=5e-7)
    assert set(rows[0]) == {"omega", "v_x", "v_x_db"}


def test_spectrum_uncoupled_is_vacuum(capsys):
    _, out, _ = run(["spectrum", "--kappa2", "0", "--vp", "--tau-out", "0.5"], capsys)
    for r in rows_csv(out):
        assert float(r["v_x"]) == 0.5
        assert float(r["v_p_numeric"]) == pytest.approx(0.5, abs=1e-15)


def test_twocell_dataset(capsys):
    code, out, _ = run(["twocell", "--kappa2", "1", "--tau", "1", "--gamma", "0.05",
                        "--gamma-p", "0.05", "--larmor", "10", "--omega", "0:20:401"], capsys)
    rows = rows_csv(out)
    assert code == 0 and len(rows) == 401
    v = np.array([float(r["v_x"]) for r in rows])
    w = np.linspace(0, 20, 401)
    i = int(np.argmin(v))
    # parabolic vertex through the three points around the grid minimum
    num = (v[i - 1] - v[i + 1]) * (w[1] - w[0])
    den = 2 * (v[i - 1] - 2 * v[i] + v[i + 1])
    assert abs(w[i] + num / den - 10.0) < w[1] - w[0]
    assert v[200] == pytest.approx(0.16941441905809823, rel=1e-10)


def test_pulse_checkpoints(capsys):
    code, out, _ = run(["pulse", "--kt", "0:10:101", "--gamma-t", "0,0.1"], capsys)
    rows = rows_csv(out)
    pick = {(float(r["gamma_T"]), float(r["kappa2_tau2_T"])): r for r in rows}
    assert float(pick[0.0, 1.0]["var_x"]) == pytest.approx(0.415954, abs=5e-7)
    assert float(pick[0.1, 1.0]["var_x"]) == pytest.approx(0.420984, abs=5e-7)
    for g in (0.0, 0.1):
        assert float(pick[g, 0.0]["var_x"]) == 0.5
        assert float(pick[g, 0.0]["var_p"]) == 0.5
    assert "var_x_undamped" in rows[0]


def test_pulse_numeric_columns(capsys):
    _, out, _ = run(["pulse", "--kt", "0:2:3", "--gamma-t", "0.1", "--tau", "0.8",
                     "--numeric"], capsys)
    for r in rows_csv(out):
        assert float(r["var_x_numeric"]) == pytest.approx(float(r["var_x"]), rel=1e-8)
        assert float(r["var_p_numeric"]) == pytest.approx(float(r["var_p"]), rel=1e-8)


def test_optimize_rows(capsys):
    code, out, _ = run(["optimize", "--alpha-tau2", "50:100:2"], capsys)
    row = rows_csv(out)[-1]
    assert code == 0
    assert float(row["alpha_tau2"]) == 100.0
    assert float(row["v_opt"]) == pytest.approx(0.0386305, abs=5e-8)
    assert float(row["beta_star"]) == pytest.approx(1.030612, abs=5e-7)
    assert float(row["asymptote"]) == 0.04
    assert float(row["rel_discrepancy"]) < 1e-6


def test_optimize_domain_edge(capsys):
    code, out, _ = run(["optimize", "--alpha-tau2", "2.5:10:2"], capsys)
    assert code == 0 and float(rows_csv(out)[0]["alpha_tau2"]) == 2.5
    code, out, err = run(["optimize", "--alpha-tau2", "2:10:2"], capsys)
    assert code == 2 and out == ""
    assert len(err.strip().splitlines()) == 1 and err.startswith("error:")


@pytest.mark.parametrize("argv", [
    ["spectrum", "--omega", "5:0:10"],
    ["spectrum", "--omega", "0:5:1"],
    ["spectrum", "--omega", "0:5"],
    ["spectrum", "--tau", "1.5"],
    ["spectrum", "--gamma-p", "0"],
    ["sweep", "--param", "alpha", "--values", "1:2:3"],
])
def test_validation_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert len(err.strip().splitlines()) == 1


def test_csv_json_round_trip(tmp_path):
    args = ["spectrum", *REF, "--omega", "0:3:7", "--vp"]
    cli.main(args + ["-o", str(tmp_path / "a.csv")])
    cli.main(args + ["-o", str(tmp_path / "a.json"), "--format", "json"])
    doc = json.loads((tmp_path / "a.json").read_text())
    from_csv = rows_csv((tmp_path / "a.csv").read_text())
    assert len(doc["rows"]) == len(from_csv) == 7
    for j, c in zip(doc["rows"], from_csv):
        assert list(j) == list(c)
        assert all(float(c[k]) == j[k] for k in j)
    meta = doc["metadata"]
    assert meta["mode"] == "spectrum" and meta["seed"] == 0 and meta["version"]
    assert meta["config"]["kappa2"] == 1.0 and meta["config"]["omega"] == "0:3:7"


def test_bit_for_bit_reproducible(tmp_path):
    args = ["montecarlo", "--kind", "pulse", "--n-traj", "1500", "--seed", "9"]
    cli.main(args + ["-o", str(tmp_path / "a.csv")])
    cli.main(args + ["-o", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"kappa2": 0.0, "omega": "0:1:3"}))
    _, out, _ = run(["spectrum", "--config", str(cfg)], capsys)
    assert [float(r["v_x"]) for r in rows_csv(out)] == [0.5] * 3
    _, out, _ = run(["spectrum", "--config", str(cfg), "--kappa2", "1"], capsys)
    assert float(rows_csv(out)[0]["v_x"]) == pytest.approx(0.291667, abs=5e-7)
    cfg.write_text(json.dumps({"nonsense": 1}))
    code, _, _ = run(["spectrum", "--config", str(cfg)], capsys)
    assert code == 2


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path))
    assert cli.main(["optimize", "--alpha-tau2", "3:4:2", "--format", "json"]) == 0
    assert json.loads((tmp_path / "optimize.json").read_text())["rows"][0]["alpha_tau2"] == 3.0


def test_sweep(capsys):
    code, out, _ = run(["sweep", *REF, "--param", "kappa2", "--values", "0:1:2"], capsys)
    rows = rows_csv(out)
    assert code == 0
    assert float(rows[0]["v_x"]) == 0.5
    assert float(rows[1]["v_x"]) == pytest.approx(7 / 24, rel=1e-12)


def test_microscopic_input(capsys):
    micro = ["--n-atoms", "1e12", "--sigma", "1e-13", "--beam-area", "1e-6",
             "--photon-flux", "1e14", "--linewidth", "1e7", "--detuning", "1e9"]
    code, out, _ = run(["spectrum", *micro, "--omega", "0:1:2"], capsys)
    assert code == 0 and 0 < float(rows_csv(out)[0]["v_x"]) < 0.5


def test_montecarlo_cw(capsys):
    code, out, _ = run(["montecarlo", "--kind", "cw", "--dt", "0.005", "--duration", "500",
                        "--segment-length", "1024"], capsys)
    rows = rows_csv(out)
    assert code == 0 and len(rows) == 1024
    assert {"omega", "v_hat", "stderr", "v_closed"} <= set(rows[0])


def test_verify_deterministic_fast(capsys):
    t0 = time.perf_counter()
    code, out, _ = run(["verify", "--skip", "montecarlo"], capsys)
    assert time.perf_counter() - t0 < 10
    rows = rows_csv(out)
    assert code == 0 and rows
    assert all(r["passed"] == "True" for r in rows)
    assert {"check", "tolerance", "deviation"} <= set(rows[0])


def test_verify_detects_sign_flip(monkeypatch, capsys):
    original = linear_io.build_two_cell

    def flipped(p, d=None):
        m = original(p, d)
        drift = m.drift.copy()
        drift[2, 3], drift[3, 2] = -drift[2, 3], -drift[3, 2]
        return linear_io.LinearIOModel(drift, m.noise_input, m.output_state,
                                       m.output_feedthrough, m.channels, m.state_names)

    monkeypatch.setattr(linear_io, "build_two_cell", flipped)
    code, out, _ = run(["verify", "--skip", "montecarlo"], capsys)
    assert code == 1
    failed = {r["check"] for r in rows_csv(out) if r["passed"] == "False"}
    assert any("two" in name for name in failed)


@pytest.mark.slow
def test_verify_full_default(capsys):
    code, out, _ = run(["verify"], capsys)
    assert code == 0, out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "faraday_squeezing", "optimize",
                          "--alpha-tau2", "2:3:2"], capture_output=True, text=True)
    assert res.returncode == 2 and res.stderr.startswith("error:")
