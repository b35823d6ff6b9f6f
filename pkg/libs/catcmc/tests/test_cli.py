import json
import math

import pandas as pd
import pytest
from click.testing import CliRunner

from catcmc.cli import main
from catcmc.exceptions import (
    CatCMCException,
    ConfigError,
    DegenerateImmersionError,
    NearSingularError,
    NoConvergenceError,
)
from catcmc.geometry import singular_length
from catcmc.reports import CheckResult

NECK = ["--tau", "0.1", "--delta", "1e-3", "--n-x", "8", "--n-s", "101"]


def _invoke(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def _report(path):
    return json.loads((path / "report.json").read_text())


def test_solve_neck(tmp_path):
    result = _invoke("solve-neck", *NECK, "--output-dir", str(tmp_path))
    assert result.exit_code == 0, result.output
    report = _report(tmp_path)
    assert report["schema_version"] == "v1"
    assert report["error"] is None
    assert report["results"]["solve"]["converged"] is True

    profiles = pd.read_csv(tmp_path / "profiles.csv")
    assert list(profiles.columns[:3]) == ["s", "omega", "mode_0"]
    assert len(profiles) == 101


def test_reports_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        output_dir = str(tmp_path / name)
        result = _invoke("solve-neck", *NECK, "--plus", "2:1e-3,0", "--output-dir", output_dir)
        assert result.exit_code == 0, result.output
    for artifact in ("report.json", "profiles.csv"):
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


def test_tables_use_lf_and_one_header(tmp_path):
    _invoke("solve-neck", *NECK, "--output-dir", str(tmp_path))
    raw = (tmp_path / "profiles.csv").read_bytes()
    assert b"\r\n" not in raw
    assert raw.count(b"s,omega") == 1


def test_lower_modes_are_a_config_error(tmp_path):
    result = _invoke("solve-neck", *NECK, "--plus", "1:1e-3,0", "--output-dir", str(tmp_path))
    assert result.exit_code == 2
    assert _report(tmp_path)["error"]["type"] == "ConfigError"


def test_lower_modes_allowed_strips_them(tmp_path):
    result = _invoke(
        "solve-neck", *NECK, "--plus", "1:1e-3,0", "--lower-modes-allowed",
        "--output-dir", str(tmp_path),
    )
    assert result.exit_code == 0, result.output
    assert _report(tmp_path)["config"]["boundary"]["plus"] == {}


def test_malformed_mode_flag(tmp_path):
    result = _invoke("solve-neck", *NECK, "--plus", "two:1", "--output-dir", str(tmp_path))
    assert result.exit_code == 2


def test_no_convergence_exit_code(tmp_path):
    result = _invoke("solve-neck", *NECK, "--max-iter", "1", "--output-dir", str(tmp_path))
    assert result.exit_code == 3
    assert _report(tmp_path)["error"]["exit_code"] == 3


def test_near_singular_exit_code(tmp_path):
    tau = 1.0 / math.cosh(singular_length())
    result = _invoke(
        "solve-neck", "--tau", repr(tau), "--delta", "1e-3", "--n-x", "8",
        "--output-dir", str(tmp_path),
    )
    assert result.exit_code == 5
    assert _report(tmp_path)["error"]["type"] == "NearSingularError"


@pytest.mark.parametrize(
    "error, code",
    [
        (CatCMCException, 1),
        (ConfigError, 2),
        (NoConvergenceError, 3),
        (DegenerateImmersionError, 4),
        (NearSingularError, 5),
    ],
)
def test_exit_codes(error, code):
    assert error("boom").to_record() == {
        "type": error.__name__,
        "message": "boom",
        "exit_code": code,
    }


def test_yaml_config(tmp_path):
    config = tmp_path / "run.yml"
    config.write_text(
        "tau: 0.1\ndelta: 1.0e-3\nn_x: 8\nn_s: 101\n"
        "boundary:\n  plus:\n    2: [1.0e-3, 0.0]\n"
    )
    result = _invoke("solve-neck", "--config", str(config), "--output-dir", str(tmp_path))
    assert result.exit_code == 0, result.output
    report = _report(tmp_path)
    assert report["config"]["boundary"]["plus"] == {"2": [1e-3, 0.0]}


def test_solve_disk(tmp_path):
    result = _invoke(
        "solve-disk", "--delta", "0.1", "--n-x", "8", "--n-r", "100",
        "--output-dir", str(tmp_path),
    )
    assert result.exit_code == 0, result.output
    results = _report(tmp_path)["results"]
    assert results["h_at_1"] == pytest.approx(-0.0250156, abs=1e-5)
    assert results["cap_error"] <= 1e-4
    assert (tmp_path / "disk_profile.csv").exists()


def test_nondegeneracy(tmp_path):
    result = _invoke(
        "nondegeneracy", "--lmin", "0.5", "--lmax", "3", "--steps", "50", "--n-s", "101",
        "--output-dir", str(tmp_path),
    )
    assert result.exit_code == 0, result.output
    results = _report(tmp_path)["results"]
    assert results["singular_length"] == pytest.approx(1.19968, abs=1e-2)
    table = pd.read_csv(tmp_path / "nondegeneracy.csv")
    assert list(table.columns) == ["l", "sigma_mode_0", "sigma_mode_1", "sigma_mode_2"]
    assert len(table) == 51


def test_verify_single_check(tmp_path):
    result = _invoke(
        "verify", "--suite", "disk_oracle", "--n-x", "8", "--output-dir", str(tmp_path)
    )
    assert result.exit_code == 0, result.output
    checks = pd.read_csv(tmp_path / "checks.csv")
    assert checks["passed"].tolist() == [True]


def test_verify_fails_when_a_check_fails(tmp_path, mocker):
    mocker.patch(
        "catcmc.verify.suite.run_suite",
        return_value=[CheckResult(name="minimality", passed=False)],
    )
    result = _invoke("verify", "--output-dir", str(tmp_path))
    assert result.exit_code == 1
    assert _report(tmp_path)["checks"][0]["passed"] is False


def test_unknown_suite(tmp_path):
    result = _invoke("verify", "--suite", "nope", "--output-dir", str(tmp_path))
    assert result.exit_code == 2


def test_derivative_at_the_default_step(tmp_path):
    result = _invoke("derivative", *NECK, "--output-dir", str(tmp_path))
    assert result.exit_code == 0, result.output
    derivative = _report(tmp_path)["results"]["derivative"]
    assert derivative["step"] == 0.1
    assert derivative["taus"] == [0.1]
    assert math.isfinite(derivative["step_error"])
    table = pd.read_csv(tmp_path / "derivative.csv")
    assert list(table.columns) == ["tau0", "distance", "cauchy"]


def test_derivative_step_fraction(tmp_path):
    result = _invoke(
        "derivative", *NECK, "--dtau-fraction", "0.05", "--output-dir", str(tmp_path)
    )
    assert result.exit_code == 0, result.output
    report = _report(tmp_path)
    assert report["config"]["dtau_fraction"] == 0.05
    assert report["results"]["derivative"]["step"] == 0.05

    result = _invoke(
        "derivative", *NECK, "--dtau-fraction", "0.5", "--output-dir", str(tmp_path / "bad")
    )
    assert result.exit_code == 2
    assert _report(tmp_path / "bad")["error"]["type"] == "ConfigError"


def test_sweep_tau(tmp_path):
    result = _invoke(
        "sweep-tau", "--tau", "0.1", "--tau", "0.05", "--delta", "1e-3", "--n-x", "8",
        "--n-s", "201", "--n-r", "40", "--output-dir", str(tmp_path),
    )
    assert result.exit_code == 0, result.output
    sweep = pd.read_csv(tmp_path / "tau_sweep.csv")
    assert list(sweep["tau"]) == [0.1, 0.05]
    assert {"distance", "rescaled_distance", "lower_ratio", "rescaled_lower_norm"} <= set(
        sweep.columns
    )
    fits = pd.read_csv(tmp_path / "decay_fit.csv")
    assert len(fits) == 2
    results = _report(tmp_path)["results"]
    assert results["lower_fit"]["points"] == 2
    assert "rescaled_lower_fit" in results
