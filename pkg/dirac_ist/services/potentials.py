"""Initial potentials."""

from typing import Optional

import numpy as np

from dirac_ist.core.config import GaussianSpec, PotentialSpec
from dirac_ist.core.exceptions import ValidationException
from dirac_ist.core.logging import get_logger
from dirac_ist.models.fields import Grid2D, Potential
from dirac_ist.utils.field_io import read_potential

logger = get_logger(__name__)


def _smooth_step(r: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 for r <= 0, 0 for r >= 1."""
    r = np.clip(r, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        up = np.where(r < 1.0, np.exp(-1.0 / np.maximum(1.0 - r, 1e-300)), 0.0)
        down = np.where(r > 0.0, np.exp(-1.0 / np.maximum(r, 1e-300)), 0.0)
    return up / (up + down)


def taper(grid: Grid2D, support_fraction: float, taper_fraction: float) -> np.ndarray:
    """Smooth cutoff that is 1 on the inner ``taper_fraction`` of the support box and 0 outside it."""
    x_lo, x_hi, y_lo, y_hi = grid.support_box(support_fraction)
    X, Y = grid.mesh()
    out = np.ones((grid.n, grid.n))
    for coord, lo, hi in ((X, x_lo, x_hi), (Y, y_lo, y_hi)):
        centre = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        inner = taper_fraction * half
        out *= _smooth_step((np.abs(coord - centre) - inner) / (half - inner))
    out[~grid.support_mask(support_fraction)] = 0.0
    return out


def gaussian_field(grid: Grid2D, spec: Optional[GaussianSpec]) -> np.ndarray:
    """eps * exp(-((x - x0)^2 + (y - y0)^2) / w^2) * exp(i phase) on the grid."""
    if spec is None or spec.amplitude == 0.0:
        return np.zeros((grid.n, grid.n), dtype=complex)
    X, Y = grid.mesh()
    r2 = (X - spec.x0) ** 2 + (Y - spec.y0) ** 2
    return spec.amplitude * np.exp(-r2 / spec.width ** 2) * np.exp(1j * spec.phase)


def build_potential(grid: Grid2D, spec: PotentialSpec) -> Potential:
    """Initial potential of the configured family.

    Args:
        grid: Computational grid
        spec: Potential section of the scenario

    Returns:
        Potential with exact zeros outside the support box
    """
    if spec.family == "zero":
        return Potential.zeros(grid)

    if spec.family == "file":
        pot = read_potential(spec.path)
        if pot.grid != grid:
            raise ValidationException(
                "Potential file grid differs from the scenario grid",
                details={"path": spec.path, "file_n": pot.grid.n, "n": grid.n}
            )
        return pot

    cutoff = taper(grid, spec.support_fraction, spec.taper_fraction)
    fields = [cutoff * gaussian_field(grid, getattr(spec, name)) for name in ("q1", "q2", "q3", "q4")]
    pot = Potential(grid, *fields)
    logger.debug("Initial potential built", extra={"n": grid.n, "energy": pot.energy()})
    return pot
