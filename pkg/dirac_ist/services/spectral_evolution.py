"""Time evolution of scattering data.

The kernels obey constant-coefficient transport equations,

    (d/dt - b1 d/dy + b3 d/dtau) F13 = 0,    (d/dt - b2 d/dy + b3 d/dtau) F23 = 0,
    (d/dt + b3 d/dy - b1 d/dtau) G31 = 0,    (d/dt + b3 d/dy - b2 d/dtau) G32 = 0,

where y is the first and tau the second table argument. They are solved exactly by shifting
the arguments; between nodes the tables are resampled with cubic splines.
"""

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from dirac_ist.core.exceptions import ValidationException, WindowOverflowException
from dirac_ist.core.logging import get_logger
from dirac_ist.core.parallel import parallel_map
from dirac_ist.models.fields import LaxParameters
from dirac_ist.services.direct_scattering import KERNEL_NAMES, ScatteringData
from dirac_ist.utils.interpolation import shift_table

logger = get_logger(__name__)

SPLINE_MARGIN = 3


@dataclass(frozen=True)
class EvolutionOperator:
    """Argument shifts carrying scattering data over a time ``t``."""

    params: LaxParameters
    t: float

    def shifts(self) -> Dict[str, Tuple[float, float]]:
        """Physical argument offsets per kernel: new(y, tau) = old(y + dy, tau + dtau)."""
        b1, b2, b3, t = self.params.b1, self.params.b2, self.params.b3, self.t
        return {
            "F13": (b1 * t, -b3 * t),
            "F23": (b2 * t, -b3 * t),
            "G31": (-b3 * t, b1 * t),
            "G32": (-b3 * t, b2 * t),
        }

    def node_shifts(self, h: float) -> Dict[str, Tuple[float, float]]:
        """Shifts in table nodes, in the ``shift_table`` sense (content moves by +shift)."""
        return {name: (-dy / h, -dtau / h) for name, (dy, dtau) in self.shifts().items()}

    def apply(self, scat: ScatteringData, edge_tol: float = 1e-6, threads: int = 1) -> ScatteringData:
        """Evolve ``scat`` by ``t``."""
        if self.t == 0.0:
            return scat
        shifts = self.node_shifts(scat.axis.h)

        def move(item: Tuple[str, np.ndarray]) -> np.ndarray:
            name, table = item
            shift = shifts[name]
            lost = departing_max(table, shift)
            if lost > edge_tol:
                raise WindowOverflowException(
                    "Evolved kernel would leave the table window",
                    details={"table": name, "lost_max": lost, "edge_tol": edge_tol, "t": self.t}
                )
            return shift_table(table, shift, order=3)

        tables = parallel_map(move, list(zip(KERNEL_NAMES, scat.tables)), threads)
        logger.debug("Scattering data evolved", extra={"t": self.t, "m": scat.axis.m})
        return ScatteringData(scat.axis, scat.grid, *tables, t=scat.t + self.t)


def departing_max(table: np.ndarray, shift: Sequence[float]) -> float:
    """Largest |entry| among the nodes that a shift pushes out of the table."""
    m0, m1 = table.shape
    mask = np.zeros(table.shape, dtype=bool)
    for axis, (s, size) in enumerate(zip(shift, (m0, m1))):
        width = min(size, math.ceil(abs(s)))
        if width == 0:
            continue
        index = slice(size - width, size) if s > 0 else slice(0, width)
        if axis == 0:
            mask[index, :] = True
        else:
            mask[:, index] = True
    return float(np.max(np.abs(table[mask]))) if mask.any() else 0.0


def evolve(
    scat0: ScatteringData,
    params: LaxParameters,
    t: float,
    edge_tol: float = 1e-6,
    threads: int = 1,
) -> ScatteringData:
    """Scattering data at time ``scat0.t + t``.

    Args:
        scat0: Initial scattering data
        params: Lax parameters b1, b2, b3
        t: Evolution time, any sign
        edge_tol: Largest kernel magnitude allowed to leave the window
        threads: Worker threads over the four tables

    Returns:
        Evolved scattering data; ``scat0`` itself when ``t == 0``
    """
    return EvolutionOperator(params, float(t)).apply(scat0, edge_tol, threads)


@dataclass(frozen=True)
class TransportResidual:
    """Max-norm residual of each transport equation over interior nodes."""

    f13: float
    f23: float
    g31: float
    g32: float

    @property
    def max(self) -> float:
        return max(self.f13, self.f23, self.g31, self.g32)


def transport_residual(
    series: Sequence[ScatteringData],
    params: LaxParameters,
    band: int = 2,
) -> TransportResidual:
    """Central-difference residual of the transport equations at the middle of three snapshots.

    Args:
        series: Scattering data at t - dt, t, t + dt on one axis
        params: Lax parameters
        band: Nodes excluded at every table edge

    Returns:
        Residual per kernel
    """
    if len(series) != 3:
        raise ValidationException("Transport residual needs exactly three snapshots", details={"count": len(series)})
    first, mid, last = series
    if not (first.axis == mid.axis == last.axis):
        raise ValidationException("Snapshots live on different kernel axes")
    dt = mid.t - first.t
    if dt <= 0.0 or not math.isclose(last.t - mid.t, dt, rel_tol=1e-9, abs_tol=1e-14):
        raise ValidationException(
            "Snapshots must be equally spaced in increasing time",
            details={"times": [first.t, mid.t, last.t]}
        )

    h = mid.axis.h
    b1, b2, b3 = params.b1, params.b2, params.b3
    coefficients = {
        "f13": (-b1, b3),
        "f23": (-b2, b3),
        "g31": (b3, -b1),
        "g32": (b3, -b2),
    }
    inner = (slice(band, -band), slice(band, -band))
    result = {}
    for index, (name, (c0, c1)) in enumerate(coefficients.items()):
        d_t = (last.tables[index] - first.tables[index]) / (2.0 * dt)
        d0, d1 = np.gradient(mid.tables[index], h)
        residual = d_t + c0 * d0 + c1 * d1
        result[name] = float(np.max(np.abs(residual[inner])))
    return TransportResidual(**result)


def required_padding(params: LaxParameters, t: float, h: float) -> int:
    """Kernel nodes to add on each side so tables shifted by time ``t`` stay inside the window."""
    if t == 0.0:
        return 0
    return math.ceil(params.max_shift_speed * abs(t) / h) + SPLINE_MARGIN
