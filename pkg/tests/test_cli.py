import csv
import json
import math

import pytest

from fads import cli, config, verify
from fads.filtering import gamma as gamma_kernel


def write_cfg(tmp_path, extra=""):
    path = tmp_path / "run.cfg"
    path.write_text(config.DEFAULT_CONFIG_TEXT + extra)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_simulate_writes_one_path(tmp_path):
    out = tmp_path / "sim"
    assert cli.main(["simulate", "--steps", "10", "--out", str(out)]) == 0
    rows = read_csv(out / "paths.csv")
    assert len(rows) == 11 and list(rows[0]) == ["t", "w", "b", "u", "y", "s"]
    assert list(read_csv(out / "filter.csv")[0]) == ["t", "gamma", "b0", "upsilon0", "mu0"]
    assert list(read_csv(out / "wealth.csv")[0]) == ["t", "pi", "v", "v_tilde"]


def test_simulate_several_paths_adds_index(tmp_path):
    cli.main(["simulate", "--steps", "5", "--paths", "3", "--out", str(tmp_path)])
    rows = read_csv(tmp_path / "paths.csv")
    assert len(rows) == 18 and {r["path"] for r in rows} == {"0", "1", "2"}


def test_simulate_is_seeded(tmp_path):
    for name, seed in (("a", "1"), ("b", "1"), ("c", "2")):
        cli.main(["simulate", "--steps", "20", "--seed", seed, "--out", str(tmp_path / name)])
    a, b, c = ((tmp_path / n / "paths.csv").read_bytes() for n in "abc")
    assert a == b and a != c


def test_simulate_p_one_filter_is_flat(tmp_path):
    cfg = write_cfg(tmp_path, "model.p = 1.0\n")
    cli.main(["simulate", "--config", cfg, "--steps", "1000", "--out", str(tmp_path)])
    ups = [abs(float(r["upsilon0"])) for r in read_csv(tmp_path / "filter.csv")]
    assert max(ups) < 1e-2


def test_missing_key_reports_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(config.DEFAULT_CONFIG_TEXT.replace("model.lambda = 1.0\n", ""))
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "model.lambda" in capsys.readouterr().err


def test_value_report(tmp_path):
    cfg = write_cfg(tmp_path, "model.p = 0.5\nmodel.T = 20.0\n")
    assert cli.main(["value", "--config", cfg, "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "value_report.json").read_text())
    assert rep["excess"]["excess_log_asym"] == 2.5
    assert set(rep) == {"informed", "uninformed", "excess"}
    assert len(read_csv(tmp_path / "value_report.csv")) == 2


def test_value_power_wealth_relative(tmp_path):
    cfg = write_cfg(tmp_path, "model.p = 0.5\nmodel.T = 20.0\nmodel.gamma = 0.5\n")
    cli.main(["value", "--config", cfg, "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "value_report.json").read_text())
    assert rep["excess"]["wealth_relative"] == pytest.approx(math.exp(2.5))


def test_value_symmetric_information(tmp_path):
    cli.main(["value", "--config", write_cfg(tmp_path, "model.p = 1.0\n"), "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "value_report.json").read_text())
    strip = lambda d: {k: v for k, v in d.items() if k != "investor"}
    assert strip(rep["informed"]) == strip(rep["uninformed"])


def test_value_rejects_rate(tmp_path, capsys):
    assert cli.main(["value", "--config", write_cfg(tmp_path, "model.r = 0.01\n"),
                     "--out", str(tmp_path)]) == 2
    assert "r = 0" in capsys.readouterr().err


def test_value_with_monte_carlo(tmp_path):
    cli.main(["value", "--mc", "--paths", "2000", "--steps", "50", "--out", str(tmp_path)])
    est = json.loads((tmp_path / "estimate.json").read_text())
    assert est["n_paths"] == 2000 and est["closed_form"] is not None


def test_sweep_p_axis(tmp_path):
    cfg = write_cfg(tmp_path, "model.T = 20.0\nsweep.p = [0.0, 0.25, 0.5, 0.75, 1.0]\n")
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    got = [float(r["excess_log_asym"]) for r in rows]
    assert got == [10 * p * (1 - p) for p in (0.0, 0.25, 0.5, 0.75, 1.0)]
    assert "informed_u_log" in rows[0] and "uninformed_psi" in rows[0]


def test_sweep_single_point_and_axis_flag(tmp_path):
    cli.main(["sweep", "--axis", "lambda=2", "--out", str(tmp_path)])
    assert len(read_csv(tmp_path / "sweep.csv")) == 1


def test_sweep_errors(tmp_path, capsys):
    assert cli.main(["sweep", "--out", str(tmp_path)]) == 2
    assert cli.main(["sweep", "--axis", "p=", "--out", str(tmp_path)]) == 2
    assert "empty" in capsys.readouterr().err
    assert cli.main(["sweep", "--axis", "p=0.5,2", "--out", str(tmp_path)]) == 2


def test_verify_small_n_is_inconclusive(tmp_path):
    code = cli.main(["verify", "--paths", "100", "--only", "2,3,7,8", "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "verify_report.json").read_text())
    assert code == 1
    assert {c["status"] for c in rep["checks"]} == {"inconclusive"}


def test_verify_deterministic_checks_pass(tmp_path):
    assert cli.main(["verify", "--only", "1,5,10,11", "--out", str(tmp_path)]) == 0


def test_corrupted_kernel_fails_ode_check():
    broken = lambda s, p, lam: gamma_kernel(s, p, lam) + 1e-3 * __import__("numpy").sin(s)
    res = verify.run_all(verify.Scale(), kernel=broken, only={1})
    assert res[0].status == "fail"
    assert verify.run_all(verify.Scale(), only={1})[0].status == "pass"


def test_verify_report_is_byte_identical(tmp_path):
    args = ["verify", "--paths", "3000", "--steps", "50", "--out"]
    cli.main(args + [str(tmp_path / "a")])
    cli.main(args + [str(tmp_path / "b")])
    a = (tmp_path / "a" / "verify_report.json").read_bytes()
    assert a == (tmp_path / "b" / "verify_report.json").read_bytes()
    assert b"runtime_s" not in a
