"""Refinement studies.

Levels halve the grid step on a fixed box (n -> 2n - 1), so every coarse node is also a fine
node and self-convergence errors can be measured node by node.
"""

import math
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

from dirac_ist.core.config import ScenarioConfig
from dirac_ist.core.exceptions import ValidationException
from dirac_ist.core.logging import get_logger
from dirac_ist.models.fields import Grid2D, KernelAxis, LaxParameters
from dirac_ist.models.schemas import RefinementRow, ResidualRow
from dirac_ist.services.direct_scattering import born_kernels, forward_scattering, propagate
from dirac_ist.services.lax_verify import (
    check_constraint,
    commutator_residual,
    default_profile,
    lemma1_residual,
    pair_for,
)
from dirac_ist.services.marchenko import reconstruct_potential
from dirac_ist.services.pipeline import relative_l2
from dirac_ist.services.potentials import build_potential
from dirac_ist.services.spectral_evolution import evolve, transport_residual
from dirac_ist.services.threewave import run

logger = get_logger(__name__)

STUDIES = ("roundtrip", "propagate", "direct", "transport")


def refinement_grids(grid: Grid2D, levels: int) -> List[Grid2D]:
    """``levels`` nested grids starting from ``grid``."""
    grids = [grid]
    for _ in range(levels - 1):
        grids.append(grids[-1].refine())
    return grids


def estimate_orders(errors: Sequence[float]) -> List[Optional[float]]:
    """log2 of successive error ratios; None where undefined."""
    orders: List[Optional[float]] = [None]
    for coarse, fine in zip(errors[:-1], errors[1:]):
        orders.append(math.log2(coarse / fine) if coarse > 0.0 and fine > 0.0 else None)
    return orders


def _roundtrip_errors(config: ScenarioConfig, grids: List[Grid2D]) -> List[float]:
    errors = []
    for grid in grids:
        q0 = build_potential(grid, config.potential)
        scat = forward_scattering(
            q0, edge_tol=config.scattering.edge_tol, threads=config.run.threads,
            domain_tol=config.scattering.domain_tol
        )
        q1, _ = reconstruct_potential(
            scat, grid, config.marchenko.method, config.marchenko.cond_limit, config.run.threads
        )
        errors.append(relative_l2(q1, q0))
    return errors


def _self_convergence(compute: Callable[[Grid2D], np.ndarray], grids: List[Grid2D]) -> List[float]:
    """Max difference between consecutive levels on the coarse nodes; needs one extra level."""
    values = [compute(g) for g in grids + [grids[-1].refine()]]
    errors = []
    for coarse, fine in zip(values[:-1], values[1:]):
        restricted = fine[(slice(None),) + (slice(None, None, 2),) * (fine.ndim - 1)]
        errors.append(float(np.max(np.abs(restricted - coarse))))
    return errors


def _propagate_output(config: ScenarioConfig) -> Callable[[Grid2D], np.ndarray]:
    def compute(grid: Grid2D) -> np.ndarray:
        q0 = build_potential(grid, config.potential)
        axis = KernelAxis.for_grid(grid)
        _, a_plus = propagate(q0, default_profile(axis), config.scattering.domain_tol)
        return a_plus.components
    return compute


def _direct_output(config: ScenarioConfig) -> Callable[[Grid2D], np.ndarray]:
    def compute(grid: Grid2D) -> np.ndarray:
        q0 = build_potential(grid, config.potential)
        trajectory = run(q0, config.lax, config.time.t_final, cfl=config.time.cfl)
        return trajectory.final.fields
    return compute


def _transport_residuals(config: ScenarioConfig, grids: List[Grid2D]) -> List[float]:
    residuals = []
    for grid in grids:
        scat = born_kernels(build_potential(grid, config.potential))
        delta = grid.h
        t = config.time.t_final
        series = [evolve(scat, config.lax, t + s * delta) for s in (-1, 0, 1)]
        residuals.append(transport_residual(series, config.lax).max)
    return residuals


def refinement_study(
    config: ScenarioConfig,
    study: Optional[str] = None,
    levels: Optional[int] = None,
) -> List[RefinementRow]:
    """Errors and observed orders over nested grids.

    ``roundtrip`` compares reconstruct(forward(q0)) with q0. ``propagate`` and ``direct`` are
    self-convergence studies of the marching solver and of the direct three-wave solver.
    ``transport`` measures the transport residual of evolved data at time ``t_final``.

    Args:
        config: Scenario; its grid is the coarsest level
        study: Study name, ``convergence.study`` when omitted
        levels: Number of levels, ``convergence.levels`` when omitted

    Returns:
        One row per level
    """
    study = study or config.convergence.study
    levels = levels or config.convergence.levels
    grids = refinement_grids(config.grid.to_grid(), levels)

    if study == "roundtrip":
        errors = _roundtrip_errors(config, grids)
    elif study == "propagate":
        errors = _self_convergence(_propagate_output(config), grids)
    elif study == "direct":
        errors = _self_convergence(_direct_output(config), grids)
    elif study == "transport":
        errors = _transport_residuals(config, grids)
    else:
        raise ValidationException(f"Unknown study {study!r}", details={"study": study, "known": list(STUDIES)})

    rows = [
        RefinementRow(study=study, n=g.n, h=g.h, error=e, order=o)
        for g, e, o in zip(grids, errors, estimate_orders(errors))
    ]
    logger.info("Refinement study finished", extra={"study": study, "levels": levels, "errors": errors})
    return rows


def lax_study(
    config: ScenarioConfig,
    levels: Optional[int] = None,
    params: Optional[LaxParameters] = None,
) -> List[ResidualRow]:
    """Constraint, commutator and solution-mapping residuals over nested grids.

    Each level runs the direct solver with dt = h/2 up to ``t_final`` (at least two steps) and
    evaluates the residuals on the last three snapshots.

    Args:
        config: Scenario; its grid is the coarsest level
        levels: Number of levels, ``convergence.levels`` when omitted
        params: Parameters of the evolution; ``config.lax`` when omitted. The checks always use
            ``config.lax``, so a different value here produces an inconsistent trajectory.

    Returns:
        Rows for the checks ``constraint``, ``commutator`` and ``lemma1``
    """
    levels = levels or config.convergence.levels
    evolution = params or config.lax
    rows: dict[str, List[ResidualRow]] = {"constraint": [], "commutator": [], "lemma1": []}

    for grid in refinement_grids(config.grid.to_grid(), levels):
        q0 = build_potential(grid, config.potential)
        dt = 0.5 * grid.h
        t_final = max(config.time.t_final, 2.0 * dt)
        trajectory = run(q0, evolution, t_final, dt, cfl=1.0)
        window = [s.pot for s in trajectory.snapshots[-3:]]
        step = trajectory.dt
        pair = pair_for(window[1], config.lax)
        values = {
            "constraint": check_constraint(pair),
            "commutator": commutator_residual(window, config.lax, step, aux=pair.aux, seed=config.run.seed),
            "lemma1": lemma1_residual(window, config.lax, step, aux=pair.aux),
        }
        for check, value in values.items():
            rows[check].append(ResidualRow(check=check, n=grid.n, h=grid.h, dt=step, residual=value))

    result: List[ResidualRow] = []
    for check_rows in rows.values():
        orders = estimate_orders([r.residual for r in check_rows])
        result.extend(r.model_copy(update={"order": o}) for r, o in zip(check_rows, orders))
    logger.info("Lax study finished", extra={"levels": levels, "rows": len(result)})
    return result


def format_table(rows: Sequence[RefinementRow | ResidualRow]) -> str:
    """Study rows as an aligned text table with a header line."""
    lines: List[str] = []
    for row in rows:
        data = row.model_dump()
        if not lines:
            lines.append("  ".join(f"{key:>12}" for key in data))
        cells = []
        for value in data.values():
            if value is None:
                cells.append(f"{'-':>12}")
            elif isinstance(value, float):
                cells.append(f"{value:>12.4e}")
            else:
                cells.append(f"{value!s:>12}")
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"


def write_table(path: Path, rows: Sequence[RefinementRow | ResidualRow]) -> Path:
    """Write study rows as an aligned text table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_table(rows), encoding="utf-8")
    return path
