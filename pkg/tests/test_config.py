"""System files, settings overrides and environment knobs."""

from __future__ import annotations

import pytest

from morse_graph_kit.config import (
    Settings,
    load_system_config,
    parse_system_config,
    thread_limit,
)
from morse_graph_kit.errors import ConfigError

SYSTEM = """
seed = 3

[functions.f1]
ambient = "X4 + 0.3*X1"

[functions.f2]
chart0 = "x1**2 - x2**2 + x3"
chart1 = "x3"
critical_points = [[0.0, 0.0, 0.0, 1.0]]

[metric]
kind = "chart"

[tolerances]
sol = 1e-8

[solver]
seeds = [4, 9]
"""


def test_load_system_config(tmp_path):
    path = tmp_path / "system.toml"
    path.write_text(SYSTEM)
    config = load_system_config(path)

    assert [f.name for f in config.functions] == ["f1", "f2"]
    assert config.functions[0].ambient == "X4 + 0.3*X1"
    assert config.functions[1].chart1 == "x3"
    assert config.functions[1].critical_points == ((0.0, 0.0, 0.0, 1.0),)
    assert config.metric == "chart"
    assert config.settings.seed == 3
    assert config.settings.tolerances.sol == 1e-8
    assert config.settings.tolerances.crit == 1e-10
    assert config.settings.solver.seeds == (4, 9)


def test_defaults():
    config = parse_system_config({"functions": {"f": {"ambient": "X4"}}})
    assert config.metric == "round"
    assert config.settings == Settings()
    assert config.settings.integrator.method == "DOP853"


def test_missing_file_reports_path(tmp_path):
    missing = tmp_path / "nope.toml"
    with pytest.raises(ConfigError, match="file not found") as excinfo:
        load_system_config(missing)
    assert excinfo.value.key == str(missing)


def test_invalid_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[functions\n")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_system_config(path)


@pytest.mark.parametrize(
    ("data", "key"),
    [
        ({"functions": {"f": {"ambient": "X4"}}, "colour": {}}, "colour"),
        ({"functions": {"f": {"ambient": "X4", "hessian": 1}}}, "functions.f.hessian"),
        ({"functions": {"f": {"ambient": "X4"}}, "tolerances": {"eps": 1.0}}, "tolerances.eps"),
        ({"functions": {"f": {"ambient": "X4"}}, "metric": {"kind": "flat"}}, "metric.kind"),
        ({"functions": {"f": {}}}, "functions.f"),
        ({"functions": {"f": {"ambient": "X4", "chart0": "x1"}}}, "functions.f"),
        ({"functions": {}}, "functions"),
        ({"functions": {"f": {"ambient": "X4"}}, "solver": {"seeds": [1, 2, 3]}}, "solver.seeds"),
        ({"functions": {"f": {"ambient": "X4"}}, "solver": {"grid_density": "many"}}, "solver.grid_density"),
        (
            {"functions": {"f": {"ambient": "X4", "critical_points": [[0, 0, 1]]}}},
            "functions.f.critical_points",
        ),
    ],
)
def test_invalid_documents_name_the_key(data, key):
    with pytest.raises(ConfigError) as excinfo:
        parse_system_config(data)
    assert excinfo.value.key == key
    assert str(excinfo.value).startswith(f"{key}: ")


def test_tolerance_overrides_skip_none():
    settings = Settings().with_tolerances(sol=1e-6, jac=None)
    assert settings.tolerances.sol == 1e-6
    assert settings.tolerances.jac == Settings().tolerances.jac


def test_unknown_tolerance_override():
    with pytest.raises(ConfigError, match="unknown tolerance"):
        Settings().with_tolerances(eps=1.0)


def test_thread_limit_reads_environment(monkeypatch):
    monkeypatch.setenv("MGK_THREADS", "3")
    assert thread_limit() == 3
    monkeypatch.setenv("MGK_THREADS", "0")
    assert thread_limit() == 1


def test_thread_limit_rejects_garbage(monkeypatch):
    monkeypatch.setenv("MGK_THREADS", "lots")
    with pytest.raises(ConfigError) as excinfo:
        thread_limit()
    assert excinfo.value.key == "MGK_THREADS"


def test_thread_limit_defaults_to_cpu_count(monkeypatch):
    monkeypatch.delenv("MGK_THREADS", raising=False)
    assert thread_limit() >= 1
