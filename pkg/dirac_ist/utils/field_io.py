"""Text and binary file formats for complex fields on a grid.

Text::

    # grid x_min x_max y_min y_max n
    i j re im            (n*n lines per field, fields one after another)

Binary (little-endian)::

    b"DIST" | u32 version | 4 x float64 bounds | u64 n | per field: row-major float64 (re, im)

Both formats round-trip float64 values bit for bit.
"""

import struct
from pathlib import Path
from typing import Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from dirac_ist.core.exceptions import ValidationException
from dirac_ist.core.logging import get_logger
from dirac_ist.models.fields import Grid2D, Potential

logger = get_logger(__name__)

FieldFormat = Literal["binary", "text"]

MAGIC = b"DIST"
FORMAT_VERSION = 1
SUFFIXES = {"binary": ".dist", "text": ".txt"}

_HEADER = struct.Struct("<4sI4dQ")

PathLike = Union[str, Path]


def field_path(directory: PathLike, stem: str, fmt: FieldFormat) -> Path:
    """File name for ``stem`` in ``directory`` with the suffix of ``fmt``."""
    return Path(directory) / f"{stem}{SUFFIXES[fmt]}"


def write_fields(path: PathLike, grid: Grid2D, fields: Sequence[np.ndarray], fmt: FieldFormat = "binary") -> Path:
    """Write complex (n, n) fields sharing one grid.

    Args:
        path: Destination file
        grid: Grid of every field
        fields: Complex arrays indexed [i, j]
        fmt: "binary" or "text"

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stack = np.asarray(np.stack([np.asarray(f, dtype=complex) for f in fields]), dtype="<c16")
    if stack.shape[1:] != (grid.n, grid.n):
        raise ValidationException("Field shape does not match grid", details={"shape": list(stack.shape)})

    if fmt == "binary":
        header = _HEADER.pack(MAGIC, FORMAT_VERSION, grid.x_min, grid.x_max, grid.y_min, grid.y_max, grid.n)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(stack).tobytes(order="C"))
    elif fmt == "text":
        i, j = np.meshgrid(np.arange(grid.n), np.arange(grid.n), indexing="ij")
        header = f"grid {grid.x_min!r} {grid.x_max!r} {grid.y_min!r} {grid.y_max!r} {grid.n}"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# {header}\n")
            for field in stack:
                rows = np.column_stack([i.ravel(), j.ravel(), field.real.ravel(), field.imag.ravel()])
                np.savetxt(fh, rows, fmt=["%d", "%d", "%.17g", "%.17g"])
    else:
        raise ValidationException(f"Unknown field format {fmt!r}")

    logger.debug("Fields written", extra={"path": str(path), "fields": len(stack), "format": fmt})
    return path


def _read_binary(raw: bytes) -> Tuple[Grid2D, np.ndarray]:
    magic, version, x_min, x_max, y_min, y_max, n = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValidationException("Not a field file", details={"magic": magic.hex()})
    if version != FORMAT_VERSION:
        raise ValidationException("Unsupported field file version", details={"version": version})
    grid = Grid2D(x_min, x_max, y_min, y_max, int(n))
    payload = raw[_HEADER.size:]
    block = grid.n * grid.n * 16
    if len(payload) == 0 or len(payload) % block:
        raise ValidationException("Truncated field file", details={"bytes": len(payload)})
    data = np.frombuffer(payload, dtype="<c16").astype(complex)
    return grid, data.reshape(len(payload) // block, grid.n, grid.n)


def _read_text(text: str) -> Tuple[Grid2D, np.ndarray]:
    first, _, body = text.partition("\n")
    parts = first.lstrip("#").split()
    if len(parts) != 6 or parts[0] != "grid":
        raise ValidationException("Missing '# grid' header", details={"header": first})
    grid = Grid2D(float(parts[1]), float(parts[2]), float(parts[3]), float(parts[4]), int(parts[5]))
    rows = np.loadtxt(body.splitlines(), dtype=float, ndmin=2) if body.strip() else np.empty((0, 4))
    per_field = grid.n * grid.n
    if rows.shape[0] == 0 or rows.shape[0] % per_field or rows.shape[1] != 4:
        raise ValidationException("Truncated field file", details={"rows": int(rows.shape[0])})
    count = rows.shape[0] // per_field
    fields = np.zeros((count, grid.n, grid.n), dtype=complex)
    for k in range(count):
        block = rows[k * per_field:(k + 1) * per_field]
        ii = block[:, 0].astype(int)
        jj = block[:, 1].astype(int)
        fields[k, ii, jj] = block[:, 2] + 1j * block[:, 3]
    return grid, fields


def read_fields(path: PathLike) -> Tuple[Grid2D, np.ndarray]:
    """Read a field file in either format (detected from the magic bytes).

    Args:
        path: Source file

    Returns:
        Grid and a (count, n, n) complex array
    """
    raw = Path(path).read_bytes()
    if raw[:4] == MAGIC:
        return _read_binary(raw)
    return _read_text(raw.decode("utf-8"))


def write_potential(path: PathLike, pot: Potential, fmt: FieldFormat = "binary") -> Path:
    """Write q1..q4 as four consecutive fields."""
    return write_fields(path, pot.grid, [pot.q1, pot.q2, pot.q3, pot.q4], fmt)


def read_potential(path: PathLike) -> Potential:
    """Read a potential written by :func:`write_potential`."""
    grid, fields = read_fields(path)
    if fields.shape[0] != 4:
        raise ValidationException("A potential file holds exactly four fields", details={"fields": fields.shape[0]})
    return Potential.from_fields(grid, fields)


def write_model(path: PathLike, model: BaseModel, exclude: set[str] | None = None) -> Path:
    """Write a pydantic model as indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2, exclude=exclude) + "\n", encoding="utf-8")
    return path
