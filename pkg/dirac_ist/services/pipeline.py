"""Spectral solution of the three-wave problem and its comparison with the direct solver."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from dirac_ist.core.config import ScenarioConfig
from dirac_ist.core.exceptions import ToleranceException
from dirac_ist.core.instrumentation import RunContext
from dirac_ist.core.logging import get_logger
from dirac_ist.models.fields import KernelAxis, LaxParameters, Potential
from dirac_ist.models.schemas import ComparisonReport, FieldError, StageDiagnostics
from dirac_ist.services.direct_scattering import ScatteringData, forward_scattering
from dirac_ist.services.marchenko import ReconstructionStats, reconstruct_potential
from dirac_ist.services.potentials import build_potential
from dirac_ist.services.spectral_evolution import evolve, required_padding
from dirac_ist.services.threewave import Trajectory, run

logger = get_logger(__name__)

FIELD_NAMES = ("q1", "q2", "q3", "q4")


@dataclass(frozen=True, eq=False)
class IstDiagnostics:
    """Intermediate data and diagnostics of one spectral solve."""

    summary: StageDiagnostics
    stats: ReconstructionStats
    scat0: ScatteringData
    scat_t: ScatteringData


def ist_solve(
    q0: Potential,
    params: LaxParameters,
    t: float,
    config: Optional[ScenarioConfig] = None,
    context: Optional[RunContext] = None,
) -> Tuple[Potential, IstDiagnostics]:
    """Potential at time ``t``: forward scattering, evolution of the data, reconstruction.

    Args:
        q0: Initial potential
        params: Lax parameters
        t: Evolution time
        config: Scenario supplying tolerances, solver method and threads; defaults when omitted
        context: Run context for stage timing

    Returns:
        Potential at ``t`` and diagnostics
    """
    config = config or ScenarioConfig()
    context = context or RunContext()
    scattering = config.scattering
    threads = config.run.threads
    strict = config.run.strict

    padding = required_padding(params, t, q0.grid.h) + scattering.padding
    axis = KernelAxis.for_grid(q0.grid, padding)

    with context.stage("forward", m=axis.m, n=q0.grid.n):
        scat0 = forward_scattering(
            q0, axis, edge_tol=scattering.edge_tol, strict=strict, threads=threads, domain_tol=scattering.domain_tol
        )
    with context.stage("evolve", t=t):
        scat_t = evolve(scat0, params, t, edge_tol=scattering.edge_tol, threads=threads)
        edge_t = scat_t.check_edge_decay(scattering.edge_tol, strict)
    with context.stage("reconstruct", method=config.marchenko.method):
        pot, stats = reconstruct_potential(
            scat_t, q0.grid, config.marchenko.method, config.marchenko.cond_limit, threads
        )

    summary = StageDiagnostics(
        kernel_m=axis.m,
        padding=padding,
        edge_magnitude_initial=scat0.edge_magnitude(),
        edge_magnitude_evolved=edge_t,
        conditioning=stats.summary(),
    )
    return pot, IstDiagnostics(summary, stats, scat0, scat_t)


def field_errors(candidate: Potential, reference: Potential) -> list[FieldError]:
    """Relative L2 and max errors per component; relative falls back to absolute for zero references."""
    errors = []
    for name in FIELD_NAMES:
        a = getattr(candidate, name)
        b = getattr(reference, name)
        diff = np.linalg.norm(a - b)
        ref = np.linalg.norm(b)
        errors.append(FieldError(
            field=name,
            rel_l2=float(diff / ref) if ref > 0.0 else float(diff * candidate.grid.h),
            max_abs=float(np.max(np.abs(a - b))),
        ))
    return errors


def relative_l2(candidate: Potential, reference: Potential) -> float:
    """||candidate - reference|| / ||reference|| over all four components."""
    diff = np.linalg.norm(candidate.fields - reference.fields)
    ref = np.linalg.norm(reference.fields)
    return float(diff / ref) if ref > 0.0 else float(diff * candidate.grid.h)


@dataclass(frozen=True, eq=False)
class Comparison:
    """Report plus the two solutions it was computed from."""

    report: ComparisonReport
    trajectory: Trajectory
    ist: Potential
    diagnostics: IstDiagnostics


def compare(config: ScenarioConfig, context: Optional[RunContext] = None, enforce: bool = True) -> Comparison:
    """Run both solvers to ``time.t_final`` and compare.

    Args:
        config: Scenario
        context: Run context for stage timing
        enforce: Raise ToleranceException when the comparison fails

    Returns:
        Comparison
    """
    context = context or RunContext()
    grid = config.grid.to_grid()
    params = config.lax
    t_final = config.time.t_final

    with context.stage("initial"):
        q0 = build_potential(grid, config.potential)
    with context.stage("direct", t_final=t_final):
        trajectory = run(
            q0, params, t_final, config.time.dt, config.time.snapshot_stride, cfl=config.time.cfl
        )
    q_ist, diagnostics = ist_solve(q0, params, t_final, config, context)

    errors = field_errors(q_ist, trajectory.final)
    max_rel = max(e.rel_l2 for e in errors)
    tolerance = config.tolerances.compare
    report = ComparisonReport(
        n=grid.n,
        t_final=t_final,
        b1=params.b1,
        b2=params.b2,
        b3=params.b3,
        method=config.marchenko.method,
        dt=trajectory.dt,
        steps=trajectory.steps,
        tolerance=tolerance,
        passed=max_rel <= tolerance,
        max_rel_l2=max_rel,
        fields=errors,
        diagnostics=diagnostics.summary,
        outflow_max=trajectory.outflow_max,
        energy_initial=q0.energy(),
        energy_direct=trajectory.final.energy(),
        energy_ist=q_ist.energy(),
    )
    logger.info(
        "Comparison finished",
        extra={"run_id": context.run_id, "max_rel_l2": max_rel, "tolerance": tolerance, "passed": report.passed}
    )
    if enforce:
        check_report(report)
    return Comparison(report, trajectory, q_ist, diagnostics)


def check_report(report: ComparisonReport) -> None:
    """Raise ToleranceException for a failed comparison."""
    if not report.passed:
        raise ToleranceException(
            "Spectral and direct solutions differ by more than the tolerance",
            details={"max_rel_l2": report.max_rel_l2, "tolerance": report.tolerance}
        )
