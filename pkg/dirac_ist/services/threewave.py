"""Direct solver for the three-wave system.

    q1_t + k1 q1_y + k2 q1_x =  v12 q2        q3_t + k1 q3_y + k2 q3_x = -v21 q4
    q2_t + k3 q2_y + k4 q2_x =  v21 q1        q4_t + k3 q4_y + k4 q4_x = -v12 q3

with the nonlocal coefficients

    (d/dy - d/dx) v12 = -(b1 - b2)/2 q1 q4,    (d/dy - d/dx) v21 = -(b2 - b1)/2 q2 q3,

integrated from zero inflow. Time stepping is Strang splitting: half a semi-Lagrangian advection
step, a full implicit-midpoint source step, another half advection step. The implicit midpoint
rule is solved by fixed-point iteration and is time symmetric, so a step of -dt undoes a step of
dt up to the spline error of the advection.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from dirac_ist.core.exceptions import BlowUpException, ValidationException, WindowOverflowException
from dirac_ist.core.logging import get_logger
from dirac_ist.models.fields import Grid2D, LaxParameters, Potential
from dirac_ist.models.schemas import GridInfo, RunManifest, SnapshotInfo
from dirac_ist.utils.field_io import FieldFormat, field_path, write_model, write_potential
from dirac_ist.utils.interpolation import shift_table

logger = get_logger(__name__)

FRAME_TOL = 1e-6
SOURCE_TOL = 1e-14
SOURCE_MAX_ITER = 50


@dataclass(frozen=True, eq=False)
class AuxiliaryFields:
    """Coefficients v12, v21 of the P matrix on a grid."""

    grid: Grid2D
    v12: np.ndarray
    v21: np.ndarray

    def outflow(self) -> float:
        """Largest |v| where the characteristics leave the box (top row and left column)."""
        edges = [self.v12[:, -1], self.v12[0, :], self.v21[:, -1], self.v21[0, :]]
        return float(max(np.max(np.abs(e)) for e in edges))


def _integrate_characteristics(source: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid integral of (d/dy - d/dx) v = source from the bottom and right edges."""
    n = source.shape[0]
    v = np.zeros_like(source, dtype=complex)
    for j in range(n - 1):
        # node (i, j + 1) is reached from (i + 1, j) along x + y = const
        v[:-1, j + 1] = v[1:, j] + 0.5 * h * (source[1:, j] + source[:-1, j + 1])
    return v


def compute_aux(pot: Potential, params: LaxParameters, outflow_tol: float = 1e-8) -> AuxiliaryFields:
    """Solve the characteristic equations for v12 and v21.

    Args:
        pot: Potential
        params: Lax parameters
        outflow_tol: Outflow magnitude above which a warning is logged

    Returns:
        Auxiliary fields
    """
    c12 = -(params.b1 - params.b2) / 2.0
    c21 = -(params.b2 - params.b1) / 2.0
    h = pot.grid.h
    aux = AuxiliaryFields(
        pot.grid,
        _integrate_characteristics(c12 * pot.q1 * pot.q4, h),
        _integrate_characteristics(c21 * pot.q2 * pot.q3, h),
    )
    outflow = aux.outflow()
    if outflow > outflow_tol:
        logger.warning(
            "Auxiliary fields do not vanish on the outflow edges",
            extra={"outflow": outflow, "outflow_tol": outflow_tol}
        )
    return aux


def stable_dt(params: LaxParameters, h: float, cfl: float = 0.9) -> float:
    """Largest time step allowed by the CFL number."""
    return cfl * h / max(params.max_speed, 1e-12)


def velocities(params: LaxParameters) -> Tuple[Tuple[float, float], ...]:
    """Advection velocity (dx/dt, dy/dt) of q1, q2, q3, q4."""
    v13 = (params.k2, params.k1)
    v24 = (params.k4, params.k3)
    return v13, v24, v13, v24


def _advect(fields: np.ndarray, params: LaxParameters, dt: float, h: float) -> np.ndarray:
    out = np.empty_like(fields)
    for index, (vx, vy) in enumerate(velocities(params)):
        out[index] = shift_table(fields[index], (vx * dt / h, vy * dt / h), order=3)
    return out


def _sources(fields: np.ndarray, grid: Grid2D, params: LaxParameters, aux: Optional[AuxiliaryFields]) -> np.ndarray:
    if aux is None:
        aux = compute_aux(Potential.from_fields(grid, fields), params, outflow_tol=math.inf)
    q1, q2, q3, q4 = fields
    return np.stack([aux.v12 * q2, aux.v21 * q1, -aux.v21 * q4, -aux.v12 * q3])


def _check(fields: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(fields)):
        raise BlowUpException("Non-finite values in the direct solver", details={"t": t})


def _source_step(
    fields: np.ndarray, grid: Grid2D, params: LaxParameters, dt: float, aux: Optional[AuxiliaryFields], t: float
) -> np.ndarray:
    """Implicit midpoint step of the coupling terms: y1 = y0 + dt S((y0 + y1) / 2)."""
    mid = fields + 0.5 * dt * _sources(fields, grid, params, aux)
    _check(mid, t)
    scale = max(1.0, float(np.max(np.abs(fields))))
    for _ in range(SOURCE_MAX_ITER):
        update = fields + 0.5 * dt * _sources(mid, grid, params, None)
        _check(update, t)
        change = float(np.max(np.abs(update - mid)))
        mid = update
        if change <= SOURCE_TOL * scale:
            return 2.0 * mid - fields
    raise BlowUpException(
        "Implicit source step did not converge",
        details={"t": t, "dt": dt, "last_change": change}
    )


def step(
    pot: Potential,
    params: LaxParameters,
    dt: float,
    cfl: float = 0.9,
    sources: bool = True,
    aux: Optional[AuxiliaryFields] = None,
    t: float = 0.0,
) -> Potential:
    """Advance the potential by ``dt`` (either sign).

    Args:
        pot: Potential at time t
        params: Lax parameters
        dt: Time step
        cfl: CFL number bounding |dt|
        sources: Include the v12, v21 couplings
        aux: Auxiliary fields for the first source evaluation, computed when omitted
        t: Current time, for error reports

    Returns:
        Potential at time t + dt
    """
    grid = pot.grid
    limit = stable_dt(params, grid.h, cfl)
    if abs(dt) > limit * (1.0 + 1e-12):
        raise ValidationException("Time step violates the CFL bound", details={"dt": dt, "dt_max": limit})

    fields = _advect(pot.fields, params, 0.5 * dt, grid.h)
    if sources:
        fields = _source_step(fields, grid, params, dt, aux, t)
    fields = _advect(fields, params, 0.5 * dt, grid.h)
    _check(fields, t + dt)

    result = Potential.from_fields(grid, fields)
    frame = result.frame_max()
    if frame > FRAME_TOL:
        raise WindowOverflowException(
            "Solution reached the frame of the box",
            details={"t": t + dt, "frame_max": frame, "frame_tol": FRAME_TOL}
        )
    return result


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Stored state of a trajectory."""

    t: float
    pot: Potential
    energy: float
    outflow: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots of one direct run, always including t = 0 and t_final."""

    params: LaxParameters
    dt: float
    steps: int
    snapshots: List[Snapshot] = field(default_factory=list)

    @property
    def final(self) -> Potential:
        return self.snapshots[-1].pot

    @property
    def times(self) -> List[float]:
        return [s.t for s in self.snapshots]

    @property
    def outflow_max(self) -> float:
        return max(s.outflow for s in self.snapshots)


def _snapshot(t: float, pot: Potential, params: LaxParameters) -> Snapshot:
    aux = compute_aux(pot, params, outflow_tol=math.inf)
    return Snapshot(t, pot, pot.energy(), aux.outflow())


def run(
    pot0: Potential,
    params: LaxParameters,
    t_final: float,
    dt: Optional[float] = None,
    snapshot_stride: int = 1,
    sources: bool = True,
    cfl: float = 0.9,
) -> Trajectory:
    """Integrate from 0 to ``t_final``.

    The step is shrunk so that a whole number of steps lands on ``t_final``.

    Args:
        pot0: Initial potential
        params: Lax parameters
        t_final: Final time, non-negative
        dt: Requested step; the CFL-limited step when omitted
        snapshot_stride: Steps between stored snapshots
        sources: Include the v12, v21 couplings
        cfl: CFL number

    Returns:
        Trajectory
    """
    if t_final < 0.0:
        raise ValidationException("t_final must be non-negative", details={"t_final": t_final})
    if snapshot_stride < 1:
        raise ValidationException("snapshot_stride must be positive", details={"snapshot_stride": snapshot_stride})
    requested = dt if dt is not None else stable_dt(params, pot0.grid.h, cfl)
    if requested <= 0.0:
        raise ValidationException("dt must be positive", details={"dt": requested})

    if t_final == 0.0:
        return Trajectory(params, requested, 0, [_snapshot(0.0, pot0, params)])

    steps = max(1, math.ceil(t_final / requested - 1e-12))
    step_dt = t_final / steps
    snapshots = [_snapshot(0.0, pot0, params)]
    pot = pot0
    for index in range(1, steps + 1):
        pot = step(pot, params, step_dt, cfl=cfl, sources=sources, t=(index - 1) * step_dt)
        if index % snapshot_stride == 0 or index == steps:
            t = t_final if index == steps else index * step_dt
            snapshots.append(_snapshot(t, pot, params))

    logger.info(
        "Direct run finished",
        extra={"n": pot0.grid.n, "steps": steps, "dt": step_dt, "t_final": t_final,
               "energy_drift": snapshots[-1].energy - snapshots[0].energy}
    )
    return Trajectory(params, step_dt, steps, snapshots)


def write_trajectory(trajectory: Trajectory, directory: Path, fmt: FieldFormat = "binary") -> Path:
    """Write every snapshot and a run manifest into ``directory``."""
    directory = Path(directory)
    infos = []
    for index, snap in enumerate(trajectory.snapshots):
        path = field_path(directory, f"snapshot_{index:04d}", fmt)
        write_potential(path, snap.pot, fmt)
        infos.append(SnapshotInfo(index=index, t=snap.t, file=path.name, energy=snap.energy, outflow=snap.outflow))
    params = trajectory.params
    manifest = RunManifest(
        kind="trajectory",
        grid=GridInfo.from_grid(trajectory.final.grid),
        b1=params.b1,
        b2=params.b2,
        b3=params.b3,
        t_final=trajectory.snapshots[-1].t,
        dt=trajectory.dt,
        steps=trajectory.steps,
        format=fmt,
        snapshots=infos,
    )
    write_model(directory / "manifest.json", manifest)
    return directory
