"""Tests for runtime settings and scenario configuration."""

from pathlib import Path

import pytest

from dirac_ist.core import config as config_module
from dirac_ist.core.config import (
    ScenarioConfig,
    Settings,
    apply_overrides,
    load_scenario,
    merge_scenario_data,
    parse_override,
)
from dirac_ist.core.exceptions import ConfigurationException


@pytest.mark.unit
def test_defaults_without_file() -> None:
    """Test the default scenario matches the documented defaults."""
    config = load_scenario()

    assert config.grid.n == 64
    assert (config.lax.b1, config.lax.b2, config.lax.b3) == (1.0, 0.0, -1.0)
    assert config.time.t_final == 0.5
    assert config.marchenko.method == "dense"
    assert config.tolerances.compare == 5e-2
    assert config.run.output_dir == "output"


@pytest.mark.unit
@pytest.mark.parametrize("name", ["default.toml", "zero.toml", "smallamp.toml"])
def test_example_scenarios_load(config_dir: Path, name: str) -> None:
    """Test every shipped scenario validates.

    Args:
        config_dir: Scenario directory fixture
        name: Scenario file name
    """
    config = load_scenario(config_dir / name)

    assert isinstance(config, ScenarioConfig)
    assert config.schema_version == "1.0"


@pytest.mark.unit
def test_parse_override_values() -> None:
    """Test override values parse as TOML literals with a string fallback."""
    assert parse_override("grid.n=128") == (["grid", "n"], 128)
    assert parse_override("run.strict = true") == (["run", "strict"], True)
    assert parse_override('marchenko.method="reduced"') == (["marchenko", "method"], "reduced")
    assert parse_override("potential.family=zero") == (["potential", "family"], "zero")
    assert parse_override("scattering.edge_tol=1e-8") == (["scattering", "edge_tol"], 1e-8)


@pytest.mark.unit
def test_parse_override_rejects_missing_value() -> None:
    """Test overrides without '=' are configuration errors."""
    with pytest.raises(ConfigurationException):
        parse_override("grid.n")


@pytest.mark.unit
def test_apply_overrides_nests_sections() -> None:
    """Test overrides create nested sections and refuse to cross scalars."""
    data = apply_overrides({"grid": {"n": 32}}, ["grid.n=64", "potential.q1.amplitude=0.2"])

    assert data == {"grid": {"n": 64}, "potential": {"q1": {"amplitude": 0.2}}}
    with pytest.raises(ConfigurationException):
        apply_overrides({"grid": {"n": 32}}, ["grid.n.x=1"])


@pytest.mark.unit
def test_file_then_overrides_then_output(config_dir: Path) -> None:
    """Test overrides patch the file and the output argument wins.

    Args:
        config_dir: Scenario directory fixture
    """
    config = load_scenario(config_dir / "smallamp.toml", ["grid.n=32", "time.t_final=0.25"], "elsewhere")

    assert config.grid.n == 32
    assert config.time.t_final == 0.25
    assert config.marchenko.method == "reduced"
    assert config.run.output_dir == "elsewhere"


@pytest.mark.unit
def test_output_dir_from_environment(monkeypatch: pytest.MonkeyPatch, config_dir: Path) -> None:
    """Test OUTPUT_DIR overrides the scenario but not the command line.

    Args:
        monkeypatch: Pytest monkeypatch fixture
        config_dir: Scenario directory fixture
    """
    monkeypatch.setattr(config_module.settings, "OUTPUT_DIR", "from-env")

    assert load_scenario(config_dir / "zero.toml").run.output_dir == "from-env"
    assert load_scenario(config_dir / "zero.toml", output_dir="from-cli").run.output_dir == "from-cli"


@pytest.mark.unit
@pytest.mark.parametrize(
    "override",
    [
        "grid.n=48",
        "grid.n=1024",
        "lax.b2=2.0",
        "time.t_final=-1.0",
        "tolerances.compare=0.0",
        "grid.x_max=6.0",
        "potential.family=file",
        "marchenko.method=qr",
        "grid.unknown=1",
    ],
)
def test_invalid_scenarios_are_rejected(override: str) -> None:
    """Test scenario invariants surface as configuration errors.

    Args:
        override: Override breaking one invariant
    """
    with pytest.raises(ConfigurationException) as exc_info:
        load_scenario(overrides=[override])

    assert exc_info.value.exit_code == 1
    assert "errors" in exc_info.value.details


@pytest.mark.unit
def test_missing_and_malformed_files(tmp_path: Path) -> None:
    """Test unreadable scenario files are configuration errors.

    Args:
        tmp_path: Temporary directory
    """
    bad = tmp_path / "bad.toml"
    bad.write_text("[grid\nn = 32\n", encoding="utf-8")

    with pytest.raises(ConfigurationException):
        load_scenario(tmp_path / "missing.toml")
    with pytest.raises(ConfigurationException):
        load_scenario(bad)


@pytest.mark.unit
def test_gaussian_centres_inside_support() -> None:
    """Test Gaussian centres outside the support box are rejected."""
    with pytest.raises(ConfigurationException):
        load_scenario(overrides=["potential.q1.x0=3.5"])


@pytest.mark.unit
def test_settings_validation(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test runtime settings normalise and validate the log options.

    Args:
        monkeypatch: Pytest monkeypatch fixture
    """
    monkeypatch.setenv("LOG_LEVEL", "debug")
    monkeypatch.setenv("LOG_FORMAT", "TEXT")
    settings = Settings()

    assert settings.LOG_LEVEL == "DEBUG"
    assert settings.LOG_FORMAT == "text"

    monkeypatch.setenv("LOG_LEVEL", "LOUD")
    with pytest.raises(ValueError):
        Settings()


@pytest.mark.unit
def test_with_grid_size() -> None:
    """Test resizing keeps the box and the other sections."""
    config = load_scenario(overrides=["time.t_final=0.1"])
    resized = config.with_grid_size(128)

    assert resized.grid.n == 128
    assert resized.grid.x_min == config.grid.x_min
    assert resized.time.t_final == 0.1


@pytest.mark.unit
def test_override_keeps_sibling_fields() -> None:
    """Test overriding one Gaussian key leaves the other keys of that component intact."""
    default = ScenarioConfig().potential.q1

    q1 = load_scenario(overrides=["potential.q1.width=0.5"]).potential.q1

    assert q1.width == 0.5
    assert (q1.amplitude, q1.x0, q1.y0, q1.phase) == (default.amplitude, default.x0, default.y0, default.phase)


@pytest.mark.unit
def test_partial_file_component_keeps_defaults(tmp_path: Path) -> None:
    """Test a scenario file naming one key of a component patches only that key.

    Args:
        tmp_path: Temporary directory
    """
    path = tmp_path / "partial.toml"
    path.write_text("[potential.q2]\namplitude = 0.05\n", encoding="utf-8")

    config = load_scenario(path)

    assert config.potential.q2.amplitude == 0.05
    assert (config.potential.q2.x0, config.potential.q2.y0) == (-0.3, 0.2)
    assert config.potential.q1 == ScenarioConfig().potential.q1


@pytest.mark.unit
def test_merge_scenario_data() -> None:
    """Test nested merges replace leaves and keep untouched keys."""
    base = {"grid": {"n": 64, "x_min": -4.0}, "run": {"seed": 0}}

    merged = merge_scenario_data(base, {"grid": {"n": 32}, "time": {"t_final": 1.0}})

    assert merged == {"grid": {"n": 32, "x_min": -4.0}, "run": {"seed": 0}, "time": {"t_final": 1.0}}
