"""Tests for the command line entry point."""

import json
import logging
from pathlib import Path
from typing import Iterator, List

import numpy as np
import pytest

from dirac_ist.core.config import load_scenario
from dirac_ist.main import create_parser, main, scenario_overrides
from dirac_ist.models.fields import KernelAxis
from dirac_ist.services.direct_scattering import forward_scattering
from dirac_ist.services.marchenko import reconstruct_potential
from dirac_ist.services.potentials import build_potential
from dirac_ist.utils.field_io import read_potential

SMALL = ["--override", "grid.n=32", "--override", "time.t_final=0.0"]


@pytest.fixture(autouse=True)
def reset_logging() -> Iterator[None]:
    """Drop handlers bound to captured streams after each invocation."""
    yield
    root = logging.getLogger()
    for handler in root.handlers[:]:
        root.removeHandler(handler)


def _error_document(stderr: str) -> dict:
    lines: List[str] = [line for line in stderr.splitlines() if line.startswith('{"success"')]
    assert len(lines) == 1
    return json.loads(lines[0])


@pytest.mark.unit
def test_parser_builds_overrides() -> None:
    """Test dedicated flags become scenario overrides after the explicit ones."""
    args = create_parser().parse_args(
        ["convergence", "--override", "grid.n=32", "--strict", "--threads", "4", "--study", "transport"]
    )

    assert scenario_overrides(args) == [
        "grid.n=32",
        "run.strict=true",
        "run.threads=4",
        'convergence.study="transport"',
    ]


@pytest.mark.unit
def test_unknown_command(capsys: pytest.CaptureFixture[str]) -> None:
    """Test bad command lines exit with the usage code and one error document.

    Args:
        capsys: Pytest capture fixture
    """
    code = main(["bogus"])
    document = _error_document(capsys.readouterr().err)

    assert code == 1
    assert document["success"] is False
    assert document["error"]["exit_code"] == 1
    assert "usage" in document["error"]["details"]


@pytest.mark.unit
def test_invert_requires_input(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test missing required options are usage errors.

    Args:
        tmp_path: Temporary directory
        capsys: Pytest capture fixture
    """
    assert main(["invert", "--output", str(tmp_path)]) == 1
    assert _error_document(capsys.readouterr().err)["error"]["exit_code"] == 1


@pytest.mark.unit
def test_invalid_scenario(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test scenario validation errors exit with code 1 before any file is written.

    Args:
        tmp_path: Temporary directory
        capsys: Pytest capture fixture
    """
    out = tmp_path / "out"

    code = main(["ist", "--output", str(out), "--override", "grid.n=48"])

    assert code == 1
    assert "errors" in _error_document(capsys.readouterr().err)["error"]["details"]
    assert not out.exists()


@pytest.mark.unit
def test_ist_on_zero_data(tmp_path: Path, config_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test the spectral solve of zero data writes exact zeros and its diagnostics.

    Args:
        tmp_path: Temporary directory
        config_dir: Scenario directory fixture
        capsys: Pytest capture fixture
    """
    code = main(["ist", "--config", str(config_dir / "zero.toml"), "--output", str(tmp_path)])

    assert code == 0
    assert not read_potential(tmp_path / "potential.dist").fields.any()
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["kind"] == "potential"
    assert manifest["t_final"] == 0.5
    assert (tmp_path / "diagnostics.json").exists()
    assert (tmp_path / "conditioning.txt").exists()
    timings = json.loads((tmp_path / "timings.json").read_text(encoding="utf-8"))
    assert timings["command"] == "ist"
    assert set(timings["stages"]) == {"initial", "forward", "evolve", "reconstruct"}
    assert "kernel nodes m" in capsys.readouterr().out


@pytest.mark.unit
def test_quiet_suppresses_reports(tmp_path: Path, config_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test --quiet keeps standard output empty.

    Args:
        tmp_path: Temporary directory
        config_dir: Scenario directory fixture
        capsys: Pytest capture fixture
    """
    assert main(["direct", "--config", str(config_dir / "zero.toml"), "--output", str(tmp_path), "--quiet"]) == 0

    assert capsys.readouterr().out == ""
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["kind"] == "trajectory"
    assert manifest["snapshots"][-1]["t"] == 0.5


@pytest.mark.unit
def test_compare_zero_scenario_reports(tmp_path: Path, config_dir: Path) -> None:
    """Test compare writes a timing-free report next to the timings.

    Args:
        tmp_path: Temporary directory
        config_dir: Scenario directory fixture
    """
    code = main(["compare", "--config", str(config_dir / "zero.toml"), "--output", str(tmp_path), "--quiet"])

    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert code == 0
    assert report["passed"] is True
    assert "timings" not in report
    assert "PASSED" in (tmp_path / "report.txt").read_text(encoding="utf-8")
    assert (tmp_path / "timings.json").exists()
    assert (tmp_path / "potential_direct.dist").exists()
    assert (tmp_path / "potential_ist.dist").exists()


@pytest.mark.integration
def test_forward_then_invert_matches_in_process(tmp_path: Path) -> None:
    """Test the file round trip reproduces the in-process reconstruction bit for bit.

    Args:
        tmp_path: Temporary directory
    """
    data_dir = tmp_path / "scattering"
    pot_dir = tmp_path / "potential"

    assert main(["forward", "--output", str(data_dir), "--quiet", *SMALL]) == 0
    assert main(["invert", "--input", str(data_dir), "--output", str(pot_dir), "--quiet", *SMALL]) == 0

    config = load_scenario(overrides=SMALL[1::2])
    grid = config.grid.to_grid()
    q0 = build_potential(grid, config.potential)
    expected, _ = reconstruct_potential(forward_scattering(q0, KernelAxis.for_grid(grid)), method="dense")

    restored = read_potential(pot_dir / "potential.dist")
    np.testing.assert_array_equal(restored.fields, expected.fields)
    np.testing.assert_array_equal(read_potential(data_dir / "potential_initial.dist").fields, q0.fields)


@pytest.mark.integration
def test_input_must_differ_from_output(tmp_path: Path) -> None:
    """Test commands refuse to overwrite their input.

    Args:
        tmp_path: Temporary directory
    """
    assert main(["forward", "--output", str(tmp_path), "--quiet", *SMALL]) == 0

    assert main(["evolve", "--input", str(tmp_path), "--output", str(tmp_path), "--quiet", *SMALL]) == 1


@pytest.mark.integration
def test_evolving_beyond_the_window(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test evolving unpadded data far in time is a numerical failure.

    Args:
        tmp_path: Temporary directory
        capsys: Pytest capture fixture
    """
    data_dir = tmp_path / "scattering"
    assert main(["forward", "--output", str(data_dir), "--quiet", *SMALL]) == 0
    capsys.readouterr()

    code = main(["evolve", "--input", str(data_dir), "--output", str(tmp_path / "late"), "--time", "6", *SMALL])

    assert code == 2
    assert _error_document(capsys.readouterr().err)["error"]["details"]["stage"] == "evolve"


@pytest.mark.integration
def test_compare_report_is_thread_independent(tmp_path: Path) -> None:
    """Test report.json does not depend on the thread count.

    Args:
        tmp_path: Temporary directory
    """
    overrides = ["--override", "grid.n=32", "--override", "time.t_final=0.25", "--quiet"]
    codes = [
        main(["compare", "--output", str(tmp_path / str(threads)), "--threads", str(threads), *overrides])
        for threads in (1, 4)
    ]

    assert codes[0] == codes[1]
    assert codes[0] in (0, 3)
    single = (tmp_path / "1" / "report.json").read_bytes()
    assert single == (tmp_path / "4" / "report.json").read_bytes()


@pytest.mark.integration
def test_study_commands(tmp_path: Path, config_dir: Path) -> None:
    """Test both study commands write their tables and validate levels.

    Args:
        tmp_path: Temporary directory
        config_dir: Scenario directory fixture
    """
    zero = ["--config", str(config_dir / "zero.toml"), "--quiet"]

    assert main(["convergence", "--output", str(tmp_path / "c"), "--study", "transport", "--levels", "2", *zero]) == 0
    report = json.loads((tmp_path / "c" / "report.json").read_text(encoding="utf-8"))
    assert report["kind"] == "refinement"
    assert [row["n"] for row in report["rows"]] == [32, 63]

    assert main(["verify-lax", "--output", str(tmp_path / "l"), "--levels", "2", *zero]) == 0
    report = json.loads((tmp_path / "l" / "report.json").read_text(encoding="utf-8"))
    assert report["kind"] == "lax"
    assert len(report["rows"]) == 6

    assert main(["convergence", "--output", str(tmp_path / "bad"), "--levels", "9", *zero]) == 1
