"""Tests for field file formats."""

from pathlib import Path

import numpy as np
import pytest

from dirac_ist.core.exceptions import ValidationException
from dirac_ist.models.fields import Grid2D, Potential
from dirac_ist.utils.field_io import field_path, read_fields, read_potential, write_fields, write_potential


@pytest.fixture
def random_potential(grid32: Grid2D, rng: np.random.Generator) -> Potential:
    """Potential with random complex entries.

    Args:
        grid32: Grid fixture
        rng: Random generator fixture

    Returns:
        Potential on grid32
    """
    fields = rng.normal(size=(4, 32, 32)) + 1j * rng.normal(size=(4, 32, 32))
    return Potential.from_fields(grid32, fields / 3.0)


@pytest.mark.unit
@pytest.mark.parametrize("fmt", ["binary", "text"])
def test_potential_files_are_bit_exact(tmp_path: Path, random_potential: Potential, fmt: str) -> None:
    """Test both formats restore float64 values bit for bit.

    Args:
        tmp_path: Temporary directory
        random_potential: Potential fixture
        fmt: File format
    """
    path = write_potential(field_path(tmp_path, "q", fmt), random_potential, fmt)
    restored = read_potential(path)

    assert path.suffix == (".dist" if fmt == "binary" else ".txt")
    assert restored.grid == random_potential.grid
    np.testing.assert_array_equal(restored.fields, random_potential.fields)


@pytest.mark.unit
def test_text_format_header(tmp_path: Path, grid32: Grid2D) -> None:
    """Test the text format starts with the grid header.

    Args:
        tmp_path: Temporary directory
        grid32: Grid fixture
    """
    path = write_fields(tmp_path / "f.txt", grid32, [np.zeros((32, 32))], "text")
    first = path.read_text(encoding="utf-8").splitlines()[0]

    assert first.startswith("# grid -4.0 4.0 -4.0 4.0 32")


@pytest.mark.unit
def test_rejects_shape_mismatch(tmp_path: Path, grid32: Grid2D) -> None:
    """Test fields must match the grid.

    Args:
        tmp_path: Temporary directory
        grid32: Grid fixture
    """
    with pytest.raises(ValidationException):
        write_fields(tmp_path / "f.dist", grid32, [np.zeros((31, 32))])


@pytest.mark.unit
def test_rejects_truncated_binary(tmp_path: Path, random_potential: Potential) -> None:
    """Test truncated binary files are detected.

    Args:
        tmp_path: Temporary directory
        random_potential: Potential fixture
    """
    path = write_potential(tmp_path / "q.dist", random_potential)
    path.write_bytes(path.read_bytes()[:-8])

    with pytest.raises(ValidationException):
        read_fields(path)


@pytest.mark.unit
def test_potential_file_needs_four_fields(tmp_path: Path, grid32: Grid2D) -> None:
    """Test a file with a single field is not a potential.

    Args:
        tmp_path: Temporary directory
        grid32: Grid fixture
    """
    path = write_fields(tmp_path / "one.dist", grid32, [np.ones((32, 32))])

    with pytest.raises(ValidationException):
        read_potential(path)
