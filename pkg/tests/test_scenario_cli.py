import json

import numpy as np
import pytest

from switchdiff.cli import main
from switchdiff.fields import DensityField
from switchdiff.scenario import (ConfigError, ValidationFailure, load_scenario,
                                 parse_config, preset, run_scenario)

CONFIG = """\
# two-state figure-1 scenario
states = 2
Q = -1 1 2 -2
b = 0 0
c = 1
sigma = 1 2
family = stepwise_gaussian
means = 5 -5
solver = closed_form
times = 0 1
out = run.csv
grid_dx = 0.1
seed = 99
"""


def write(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---- config parsing --------------------------------------------------------

def test_parse_roundtrip(tmp_path):
    sc = load_scenario(write(tmp_path, CONFIG))
    assert sc.solver == "closed_form"
    assert sc.times == (0.0, 1.0)
    assert sc.seed == 99
    assert np.array_equal(sc.dm.q, [[-1.0, 1.0], [2.0, -2.0]])
    assert np.array_equal(sc.dm.c, [1.0, 1.0])       # scalar broadcast


def test_parse_error_reports_line(tmp_path):
    bad = CONFIG.replace("sigma = 1 2", "sigma = 1 two")
    with pytest.raises(ConfigError, match=r"line 6.*sigma"):
        load_scenario(write(tmp_path, bad))


def test_missing_key_reported(tmp_path):
    bad = CONFIG.replace("family = stepwise_gaussian\n", "")
    with pytest.raises(ConfigError, match="family"):
        load_scenario(write(tmp_path, bad))


def test_unknown_key_reported_with_line(tmp_path):
    with pytest.raises(ConfigError, match=r"line 14.*bogus"):
        load_scenario(write(tmp_path, CONFIG + "bogus = 3\n"))


def test_duplicate_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("a = 1\na = 2\n")


def test_wrong_q_size(tmp_path):
    bad = CONFIG.replace("Q = -1 1 2 -2", "Q = -1 1 2")
    with pytest.raises(ConfigError, match="Q needs 4 entries"):
        load_scenario(write(tmp_path, bad))


def test_invalid_model_is_validation_failure(tmp_path):
    bad = CONFIG.replace("Q = -1 1 2 -2", "Q = -1 1 2 -1.9")
    with pytest.raises(ValidationFailure):
        load_scenario(write(tmp_path, bad))


def test_kernel_haar_coeffs_input(tmp_path):
    # the Haar coefficient matrix of the (1, 2) kernel reconstructs the rates
    cfg = CONFIG.replace("Q = -1 1 2 -2", "kernel_haar_coeffs = 0 0 0.5 -1.5")
    sc = load_scenario(write(tmp_path, cfg))
    assert np.abs(sc.dm.q - np.array([[-1.0, 1.0], [2.0, -2.0]])).max() < 1e-12


def test_unsorted_times_rejected(tmp_path):
    bad = CONFIG.replace("times = 0 1", "times = 1 0")
    with pytest.raises(ConfigError, match="sorted"):
        load_scenario(write(tmp_path, bad))


def test_unknown_solver_rejected(tmp_path):
    bad = CONFIG.replace("solver = closed_form", "solver = magic")
    with pytest.raises(ConfigError, match="magic"):
        load_scenario(write(tmp_path, bad))


# ---- presets and scenario runs ----------------------------------------------

def test_presets_validate():
    for name in ("fig1", "fig2", "fig3"):
        sc = preset(name)
        assert sc.dm.validate().passed
        assert sc.times == tuple(sorted(sc.times))


def test_fig1_initial_peaks():
    sc = preset("fig1")
    fld, _ = run_scenario(sc)
    x = fld.x
    d0 = fld.values[0, 0]
    assert abs(x[np.argmax(d0)] - 5.0) < 0.05
    d1 = fld.values[0, 1]
    assert abs(x[np.argmax(d1)] + 5.0) < 0.05


def test_mc_run_emits_meta(tmp_path):
    from dataclasses import replace
    sc = replace(preset("fig2"), solver="mc", paths=5000, times=(1.0,), bins=80)
    fld, artifacts = run_scenario(sc)
    assert artifacts["ensemble_meta"]["n_paths"] == 5000
    assert fld.kind == "discrete"


# ---- CLI ----------------------------------------------------------------------

def test_cli_solve_writes_csv(tmp_path, capsys):
    cfg = write(tmp_path, CONFIG)
    out = str(tmp_path / "field.csv")
    assert main(["solve", "--config", cfg, "--out", out]) == 0
    text = open(out).read().splitlines()
    assert text[0] == "t,x,s,p"
    assert sum(1 for ln in text if ln.startswith("# mass")) == 2


def test_cli_validate_ok(capsys):
    assert main(["validate", "--preset", "fig1"]) == 0
    assert "all checks passed" in capsys.readouterr().out


def test_cli_validate_bad_matrix(tmp_path, capsys):
    bad = CONFIG.replace("Q = -1 1 2 -2", "Q = -1 -1 2 -2")
    assert main(["validate", "--config", write(tmp_path, bad)]) == 1
    err = capsys.readouterr().err
    assert "off-diagonal" in err or "validation" in err


def test_cli_parse_error_exit_code(tmp_path):
    assert main(["solve", "--config", write(tmp_path, "nonsense\n")]) == 3


def test_cli_missing_file_exit_code(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "absent.cfg")]) == 3


def test_cli_compare_tolerance_exit(tmp_path, capsys):
    cfg = write(tmp_path, CONFIG.replace("times = 0 1", "times = 1"))
    # spectral and closed_form agree to quadrature accuracy
    assert main(["compare", "--config", cfg, "--a", "closed_form",
                 "--b", "spectral", "--tol", "1e-8"]) == 0
    # an absurdly tight tolerance trips exit code 2
    assert main(["compare", "--config", cfg, "--a", "closed_form",
                 "--b", "spectral", "--tol", "1e-18"]) == 2


def test_cli_reproduce_fig_and_idempotence(tmp_path):
    out1 = str(tmp_path / "fig2a.csv")
    out2 = str(tmp_path / "fig2b.csv")
    assert main(["reproduce-fig", "2", "--out", out1]) == 0
    assert main(["reproduce-fig", "2", "--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()
    fld = DensityField.from_csv(out1)
    assert np.array_equal(fld.times, [0.1, 0.5, 100.0])


def test_cli_mc_seeded_idempotence(tmp_path):
    cfg = write(tmp_path, CONFIG.replace("solver = closed_form", "solver = mc")
                .replace("times = 0 1", "times = 1") + "paths = 4000\n")
    outs = []
    for name in ("a.csv", "b.csv"):
        out = str(tmp_path / name)
        assert main(["solve", "--config", cfg, "--out", out, "--seed", "5"]) == 0
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1]
    meta = json.load(open(str(tmp_path / "a.csv") + ".ensemble_meta.json"))
    assert meta == {"seed": 5, "n_paths": 4000, "dt_sde": 0.05}


def test_cli_bounds_csv(tmp_path):
    out = str(tmp_path / "bounds.csv")
    assert main(["bounds", "--preset", "fig2", "--out", out, "--dx", "0.2"]) == 0
    lines = open(out).read().splitlines()
    assert lines[0] == "t,x,s,lower,upper"
    body = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.all(body[:, 3] <= body[:, 4] + 1e-15)      # lower <= upper
    # rejected for b = 0 scenarios
    assert main(["bounds", "--preset", "fig1", "--out", out]) == 1


def test_cli_flag_overrides(tmp_path):
    cfg = write(tmp_path, CONFIG)
    out = str(tmp_path / "o.csv")
    assert main(["solve", "--config", cfg, "--out", out, "--dx", "0.5"]) == 0
    fld = DensityField.from_csv(out)
    dx = fld.x[1] - fld.x[0]
    assert dx == pytest.approx(0.5, rel=0.02)


def test_cli_mu_max_reaches_quadrature(tmp_path, capsys):
    cfg = write(tmp_path, CONFIG.replace("solver = closed_form", "solver = spectral")
                .replace("times = 0 1", "times = 1"))
    out = str(tmp_path / "q.csv")
    assert main(["solve", "--config", cfg, "--out", out, "--mu-max", "30"]) == 0
    # a cutoff far below the integrand tail is rejected, nothing written
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "no.csv"),
                 "--mu-max", "1.5"]) == 1
    assert "too coarse" in capsys.readouterr().err
    assert not (tmp_path / "no.csv").exists()
