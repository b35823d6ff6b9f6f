import pytest

from catcmc.config import build_config, load_config, parse_modes
from catcmc.exceptions import ConfigError
from catcmc.reports import Report, dumps, write_report


def test_parse_modes():
    assert parse_modes(("2:1e-3,0.5", "3:2")) == {2: (1e-3, 0.5), 3: (2.0, 0.0)}
    with pytest.raises(ConfigError):
        parse_modes(("2:a,b",))


def test_modes_above_a_third_are_rejected():
    with pytest.raises(ConfigError):
        build_config(command="solve-neck", tau=0.1, n_x=16, boundary={"plus": {6: (1e-3, 0)}})
    config = build_config(command="solve-neck", tau=0.1, n_x=16, boundary={"plus": {5: (1e-3, 0)}})
    assert config.boundary.modes() == {5}


def test_solve_neck_needs_tau():
    with pytest.raises(ConfigError):
        build_config(command="solve-neck")


def test_flags_override_the_file(tmp_path):
    path = tmp_path / "run.yml"
    path.write_text("tau: 0.2\ndelta: 1.0e-3\nn_x: 8\n")
    config = load_config(str(path), command="solve-neck", tau=0.1, delta=None)
    assert config.tau == 0.1
    assert config.delta == 1e-3
    assert config.grid() == {"gamma": None, "n_x": 8, "n_s": None}


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.yml"), command="verify")
    path = tmp_path / "list.yml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(str(path), command="verify")


def test_report_serialization(tmp_path):
    report = Report(command="verify", results={"b": 1, "a": 2.5})
    text = dumps(report)
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    assert '"schema_version": "v1"' in text
    path = write_report(report, tmp_path / "out")
    assert path.read_text() == text
