"""Grids, fields and parameters shared by every stage.

Conventions used throughout the package:

* node coordinates are ``x_min + arange(n) * h`` (one multiply-add, never accumulated);
* arrays on a :class:`Grid2D` are indexed ``[i, j]`` for the node ``(x_i, y_j)``;
* characteristic coordinates are ``xi = y + x`` and ``eta = y - x``; components 1 and 2 of a
  free solution are constant on ``xi = const``, component 3 on ``eta = const``.

All value types are immutable: their arrays are private copies with the writeable flag cleared,
so instances can be shared freely between worker threads.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from dirac_ist.core.exceptions import ValidationException

# Principal part of the linear system: d/dy - SIGMA d/dx - Q
SIGMA = np.array([1.0, 1.0, -1.0])


def frozen_array(values: object, shape: Tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(values, dtype=complex, copy=True)
    if array.shape != shape:
        raise ValidationException(
            f"{name} has shape {array.shape}, expected {shape}",
            details={"field": name, "shape": list(array.shape), "expected": list(shape)}
        )
    if not np.all(np.isfinite(array)):
        raise ValidationException(f"{name} contains non-finite values", details={"field": name})
    array.flags.writeable = False
    return array


def characteristic_coords(x, y):
    """Map physical coordinates to ``(xi, eta) = (y + x, y - x)``."""
    return y + x, y - x


def physical_coords(xi, eta):
    """Inverse of :func:`characteristic_coords`."""
    return 0.5 * (xi - eta), 0.5 * (xi + eta)


@dataclass(frozen=True)
class Grid2D:
    """Uniform square-cell grid on a rectangular box."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 8:
            raise ValidationException("Grid needs at least 8 points per axis", details={"n": self.n})
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValidationException("Grid bounds must be increasing")
        hx = (self.x_max - self.x_min) / (self.n - 1)
        hy = (self.y_max - self.y_min) / (self.n - 1)
        if not math.isclose(hx, hy, rel_tol=1e-12):
            raise ValidationException(
                "Grid steps differ between axes; characteristics would leave the nodes",
                details={"hx": hx, "hy": hy}
            )

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + np.arange(self.n) * self.h

    @property
    def y(self) -> np.ndarray:
        return self.y_min + np.arange(self.n) * self.h

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node coordinates as two (n, n) arrays indexed ``[i, j]``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def support_box(self, fraction: float) -> Tuple[float, float, float, float]:
        """Central box covering ``fraction`` of each axis, as (x_lo, x_hi, y_lo, y_hi)."""
        cx = 0.5 * (self.x_min + self.x_max)
        cy = 0.5 * (self.y_min + self.y_max)
        hx = 0.5 * fraction * (self.x_max - self.x_min)
        hy = 0.5 * fraction * (self.y_max - self.y_min)
        return cx - hx, cx + hx, cy - hy, cy + hy

    def support_mask(self, fraction: float) -> np.ndarray:
        """Boolean (n, n) mask of the nodes inside the support box."""
        x_lo, x_hi, y_lo, y_hi = self.support_box(fraction)
        X, Y = self.mesh()
        return (X >= x_lo) & (X <= x_hi) & (Y >= y_lo) & (Y <= y_hi)

    def frame_mask(self, width: int = 2) -> np.ndarray:
        """Boolean (n, n) mask of the outermost ``width`` rows and columns."""
        mask = np.zeros((self.n, self.n), dtype=bool)
        mask[:width, :] = True
        mask[-width:, :] = True
        mask[:, :width] = True
        mask[:, -width:] = True
        return mask

    def refine(self) -> "Grid2D":
        """Same box with half the step; every node of ``self`` stays a node."""
        return Grid2D(self.x_min, self.x_max, self.y_min, self.y_max, 2 * self.n - 1)


@dataclass(frozen=True)
class KernelAxis:
    """Shared one-dimensional axis of the kernel tables and asymptotic profiles."""

    c_min: float
    h: float
    m: int

    @property
    def nodes(self) -> np.ndarray:
        return self.c_min + np.arange(self.m) * self.h

    @property
    def c_max(self) -> float:
        return self.c_min + (self.m - 1) * self.h

    @classmethod
    def for_grid(cls, grid: Grid2D, padding: int = 0) -> "KernelAxis":
        """Smallest node-aligned axis holding both characteristic ranges of ``grid``.

        Args:
            grid: Physical grid
            padding: Extra nodes on each side

        Returns:
            Axis with step ``grid.h``
        """
        h = grid.h
        xi_lo, xi_hi = grid.x_min + grid.y_min, grid.x_max + grid.y_max
        eta_lo, eta_hi = grid.y_min - grid.x_max, grid.y_max - grid.x_min
        shift = (xi_lo - eta_lo) / h
        if abs(shift - round(shift)) > 1e-9:
            raise ValidationException(
                "x_min + x_max must be a multiple of the grid step so both characteristic families share nodes",
                details={"x_min": grid.x_min, "x_max": grid.x_max, "h": h}
            )
        lo = min(xi_lo, eta_lo)
        hi = max(xi_hi, eta_hi)
        span = int(round((hi - lo) / h))
        return cls(lo - padding * h, h, span + 1 + 2 * padding)

    def grid_offsets(self, grid: Grid2D) -> Tuple[int, int]:
        """Lattice index offsets such that node (i, j) sits at ``(off_xi + i + j, off_eta + j - i)``."""
        off_xi = int(round((grid.x_min + grid.y_min - self.c_min) / self.h))
        off_eta = int(round((grid.y_min - grid.x_min - self.c_min) / self.h))
        return off_xi, off_eta

    def lattice_indices(self, grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
        """Characteristic lattice indices (a, b) of every grid node, each (n, n)."""
        off_xi, off_eta = self.grid_offsets(grid)
        i, j = np.meshgrid(np.arange(grid.n), np.arange(grid.n), indexing="ij")
        a = off_xi + i + j
        b = off_eta + j - i
        if a.min() < 0 or b.min() < 0 or a.max() >= self.m or b.max() >= self.m:
            raise ValidationException("Kernel axis does not cover the grid", details={"m": self.m, "n": grid.n})
        return a, b

    def as_grid(self) -> Grid2D:
        """Square grid spanned by the axis in both directions; used to store kernel tables."""
        return Grid2D(self.c_min, self.c_max, self.c_min, self.c_max, self.m)


@dataclass(frozen=True, eq=False)
class Potential:
    """Coefficients q1..q4 of the off-diagonal potential Q on a grid."""

    grid: Grid2D
    q1: np.ndarray
    q2: np.ndarray
    q3: np.ndarray
    q4: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.grid.n, self.grid.n)
        for name in ("q1", "q2", "q3", "q4"):
            object.__setattr__(self, name, frozen_array(getattr(self, name), shape, name))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Potential":
        zero = np.zeros((grid.n, grid.n), dtype=complex)
        return cls(grid, zero, zero, zero, zero)

    @classmethod
    def from_fields(cls, grid: Grid2D, fields: np.ndarray) -> "Potential":
        """Build from a stacked (4, n, n) array."""
        return cls(grid, fields[0], fields[1], fields[2], fields[3])

    @property
    def fields(self) -> np.ndarray:
        """Stacked (4, n, n) copy of q1..q4."""
        return np.stack([self.q1, self.q2, self.q3, self.q4])

    def energy(self) -> float:
        """Sum of |q_i|^2 h^2 over all four fields."""
        return float(np.sum(np.abs(self.fields) ** 2) * self.grid.h ** 2)

    def norm_l2(self) -> float:
        return math.sqrt(self.energy())

    def frame_max(self, width: int = 2) -> float:
        """Largest |q_i| on the outer frame of the box."""
        mask = self.grid.frame_mask(width)
        return float(np.max(np.abs(self.fields[:, mask]))) if mask.any() else 0.0

    def outside_support(self, fraction: float) -> float:
        """Sum of |q_i| over nodes outside the support box."""
        outside = ~self.grid.support_mask(fraction)
        return float(np.sum(np.abs(self.fields[:, outside])))


@dataclass(frozen=True, eq=False)
class WaveField:
    """Solution components psi1..psi3 on a grid."""

    grid: Grid2D
    psi1: np.ndarray
    psi2: np.ndarray
    psi3: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.grid.n, self.grid.n)
        for name in ("psi1", "psi2", "psi3"):
            object.__setattr__(self, name, frozen_array(getattr(self, name), shape, name))

    @property
    def fields(self) -> np.ndarray:
        """Stacked (3, n, n) copy."""
        return np.stack([self.psi1, self.psi2, self.psi3])


@dataclass(frozen=True, eq=False)
class AsymptoticProfile:
    """Profiles a1(xi), a2(xi), a3(eta) of a solution far below or far above the potential."""

    axis: KernelAxis
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray

    def __post_init__(self) -> None:
        for name in ("a1", "a2", "a3"):
            object.__setattr__(self, name, frozen_array(getattr(self, name), (self.axis.m,), name))

    @classmethod
    def zeros(cls, axis: KernelAxis) -> "AsymptoticProfile":
        zero = np.zeros(axis.m, dtype=complex)
        return cls(axis, zero, zero, zero)

    @classmethod
    def from_components(cls, axis: KernelAxis, components: np.ndarray) -> "AsymptoticProfile":
        return cls(axis, components[0], components[1], components[2])

    @classmethod
    def gaussian(
        cls,
        axis: KernelAxis,
        centers: Sequence[float],
        widths: Sequence[float],
        amplitudes: Sequence[complex],
    ) -> "AsymptoticProfile":
        """Three Gaussian components on the axis."""
        c = axis.nodes
        parts = [amp * np.exp(-((c - c0) / w) ** 2) for c0, w, amp in zip(centers, widths, amplitudes)]
        return cls(axis, parts[0], parts[1], parts[2])

    @property
    def components(self) -> np.ndarray:
        """Stacked (3, m) copy."""
        return np.stack([self.a1, self.a2, self.a3])

    def is_compactly_supported(self, tol: float = 1e-12, edge: int = 2) -> bool:
        """True when every component is below ``tol`` on the ``edge`` outermost nodes."""
        parts = self.components
        return bool(np.max(np.abs(np.concatenate([parts[:, :edge], parts[:, -edge:]], axis=1))) <= tol)


class LaxParameters(BaseModel):
    """Diagonal entries b1 > b2 > b3 of tau and the derived advection coefficients."""

    model_config = ConfigDict(frozen=True)

    b1: float = Field(..., description="Largest eigenvalue of tau")
    b2: float = Field(..., description="Middle eigenvalue of tau")
    b3: float = Field(..., description="Smallest eigenvalue of tau")

    @model_validator(mode="after")
    def validate_order(self) -> "LaxParameters":
        """Enforce strict ordering."""
        if not (self.b1 > self.b2 > self.b3):
            raise ValueError("Lax parameters must satisfy b1 > b2 > b3")
        return self

    @classmethod
    def unchecked(cls, b1: float, b2: float, b3: float) -> "LaxParameters":
        """Instance with the ordering constraint relaxed, for algebraic checks."""
        return cls.model_construct(b1=float(b1), b2=float(b2), b3=float(b3))

    @computed_field  # type: ignore[prop-decorator]
    @property
    def k1(self) -> float:
        return -(self.b1 - self.b3) / 2

    @computed_field  # type: ignore[prop-decorator]
    @property
    def k2(self) -> float:
        return -(self.b1 + self.b3) / 2

    @computed_field  # type: ignore[prop-decorator]
    @property
    def k3(self) -> float:
        return -(self.b2 - self.b3) / 2

    @computed_field  # type: ignore[prop-decorator]
    @property
    def k4(self) -> float:
        return -(self.b2 + self.b3) / 2

    @property
    def tau(self) -> np.ndarray:
        """Diagonal of tau as a length-3 array."""
        return np.array([self.b1, self.b2, self.b3])

    @property
    def max_speed(self) -> float:
        """Largest advection coefficient magnitude."""
        return max(abs(self.k1), abs(self.k2), abs(self.k3), abs(self.k4))

    @property
    def max_shift_speed(self) -> float:
        """Largest |b_i|; bounds how fast kernel tables move."""
        return max(abs(self.b1), abs(self.b2), abs(self.b3))
