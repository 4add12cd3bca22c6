"""Interpolation of complex fields on uniform grids.

Real and imaginary parts are interpolated separately with scipy.ndimage splines: order 1
(bilinear) for potential sampling, order 3 (bicubic) for shifts of kernel tables and
semi-Lagrangian advection.
"""

from typing import Literal, Sequence, Union

import numpy as np
from scipy import ndimage

from dirac_ist.core.exceptions import ValidationException
from dirac_ist.core.logging import get_logger
from dirac_ist.models.fields import Grid2D

logger = get_logger(__name__)

Method = Literal["bilinear", "bicubic"]

_ORDERS = {"bilinear": 1, "bicubic": 3}
_INSIDE_TOL = 1e-9
_BOUNDARY_TOL = 1e-12


def _order(method: str) -> int:
    try:
        return _ORDERS[method]
    except KeyError as exc:
        raise ValidationException(f"Unknown interpolation method {method!r}", details={"method": method}) from exc


def sample(values: np.ndarray, fi: np.ndarray, fj: np.ndarray, order: int = 1) -> np.ndarray:
    """Evaluate a complex (n, n) table at fractional indices.

    Queries outside the table return zero. A warning is logged when such a query lies next to a
    boundary node whose value is not negligible, since that means the field is not compactly
    supported inside the table.

    Args:
        values: Complex table indexed [i, j]
        fi: Fractional first indices
        fj: Fractional second indices, same shape as ``fi``
        order: Spline order, 1 or 3

    Returns:
        Complex array with the shape of ``fi``
    """
    fi = np.asarray(fi, dtype=float)
    fj = np.asarray(fj, dtype=float)
    n0, n1 = values.shape
    inside = (fi >= -_INSIDE_TOL) & (fi <= n0 - 1 + _INSIDE_TOL) & (fj >= -_INSIDE_TOL) & (fj <= n1 - 1 + _INSIDE_TOL)

    coords = np.stack([np.clip(fi, 0, n0 - 1).ravel(), np.clip(fj, 0, n1 - 1).ravel()])
    real = ndimage.map_coordinates(np.ascontiguousarray(values.real), coords, order=order, mode="nearest")
    imag = ndimage.map_coordinates(np.ascontiguousarray(values.imag), coords, order=order, mode="nearest")
    out = (real + 1j * imag).reshape(fi.shape)

    if not np.all(inside):
        outside = ~inside
        ci = np.clip(np.rint(fi[outside]), 0, n0 - 1).astype(int)
        cj = np.clip(np.rint(fj[outside]), 0, n1 - 1).astype(int)
        boundary = np.abs(values[ci, cj])
        if boundary.size and boundary.max() > _BOUNDARY_TOL:
            logger.warning(
                "Interpolation query outside a table with non-negligible boundary values",
                extra={"queries_outside": int(outside.sum()), "boundary_max": float(boundary.max())}
            )
        out[outside] = 0.0
    return out


def interp2(
    grid: Grid2D,
    field: np.ndarray,
    x: Union[float, np.ndarray],
    y: Union[float, np.ndarray],
    method: Method = "bilinear",
) -> Union[complex, np.ndarray]:
    """Interpolate a complex field on ``grid`` at physical points.

    Args:
        grid: Grid carrying the field
        field: Complex (n, n) array indexed [i, j]
        x: Query abscissae
        y: Query ordinates, broadcastable against ``x``
        method: "bilinear" or "bicubic"

    Returns:
        Interpolated values; a Python complex for scalar queries
    """
    xa, ya = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    fi = (xa - grid.x_min) / grid.h
    fj = (ya - grid.y_min) / grid.h
    out = sample(np.asarray(field, dtype=complex), fi, fj, order=_order(method))
    if out.ndim == 0:
        return complex(out)
    return out


def shift_table(values: np.ndarray, shift: Sequence[float], order: int = 3) -> np.ndarray:
    """Translate a complex table by a constant number of nodes per axis.

    ``out[i, j] = values[i - shift[0], j - shift[1]]`` with spline evaluation between nodes and
    zero extension outside. A zero shift returns an exact copy.

    Args:
        values: Complex table
        shift: Node offsets per axis
        order: Spline order

    Returns:
        Shifted complex table
    """
    if all(s == 0.0 for s in shift):
        return np.array(values, dtype=complex, copy=True)
    kwargs = dict(shift=tuple(float(s) for s in shift), order=order, mode="grid-constant", cval=0.0)
    real = ndimage.shift(np.ascontiguousarray(values.real), **kwargs)
    imag = ndimage.shift(np.ascontiguousarray(values.imag), **kwargs)
    return real + 1j * imag
