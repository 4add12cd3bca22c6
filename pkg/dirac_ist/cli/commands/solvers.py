"""Solver commands: direct, ist, compare."""

import argparse

from dirac_ist.cli.invocation import Invocation
from dirac_ist.cli.outputs import render_comparison, render_diagnostics, write_report
from dirac_ist.core.exceptions import EXIT_OK
from dirac_ist.models.fields import Potential
from dirac_ist.models.schemas import GridInfo, RunManifest
from dirac_ist.services.marchenko import write_diagnostics
from dirac_ist.services.pipeline import check_report, compare, ist_solve
from dirac_ist.services.potentials import build_potential
from dirac_ist.services.threewave import run, write_trajectory
from dirac_ist.utils.field_io import field_path, write_model, write_potential


def _initial(inv: Invocation) -> Potential:
    config = inv.config
    with inv.context.stage("initial", family=config.potential.family):
        return build_potential(config.grid.to_grid(), config.potential)


def direct(inv: Invocation) -> int:
    """Reference trajectory of the direct solver."""
    config = inv.config
    q0 = _initial(inv)
    with inv.context.stage("direct", t_final=config.time.t_final):
        trajectory = run(
            q0, config.lax, config.time.t_final, config.time.dt, config.time.snapshot_stride, cfl=config.time.cfl
        )
    write_trajectory(trajectory, inv.output, inv.fmt)
    inv.echo(
        f"{len(trajectory.snapshots)} snapshots ({trajectory.steps} steps, dt = {trajectory.dt:.4e}) "
        f"written to {inv.output}"
    )
    return EXIT_OK


def ist(inv: Invocation) -> int:
    """Potential at ``time.t_final`` through forward scattering, evolution and reconstruction."""
    config = inv.config
    params = config.lax
    q0 = _initial(inv)
    pot, diagnostics = ist_solve(q0, params, config.time.t_final, config, inv.context)

    write_potential(field_path(inv.output, "potential", inv.fmt), pot, inv.fmt)
    write_model(
        inv.output / "manifest.json",
        RunManifest(
            kind="potential",
            grid=GridInfo.from_grid(pot.grid),
            b1=params.b1,
            b2=params.b2,
            b3=params.b3,
            t_final=config.time.t_final,
            format=inv.fmt,
        ),
    )
    write_model(inv.output / "diagnostics.json", diagnostics.summary)
    write_diagnostics(inv.output / "conditioning.txt", diagnostics.stats)
    inv.echo("\n".join(render_diagnostics(diagnostics.summary)))
    return EXIT_OK


def compare_solvers(inv: Invocation) -> int:
    """Spectral and direct solutions at ``time.t_final`` and their comparison report.

    Files are written before the tolerance is enforced, so a failing comparison still leaves
    its report behind.

    Args:
        inv: Command invocation

    Returns:
        Exit code; a failed comparison raises ToleranceException
    """
    comparison = compare(inv.config, inv.context, enforce=False)
    report = comparison.report

    write_potential(field_path(inv.output, "potential_direct", inv.fmt), comparison.trajectory.final, inv.fmt)
    write_potential(field_path(inv.output, "potential_ist", inv.fmt), comparison.ist, inv.fmt)
    text = render_comparison(report)
    write_report(inv.output, report, text)
    inv.echo(text)

    check_report(report)
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("direct", parents=[common], help="Run the direct three-wave solver")
    parser.set_defaults(handler=direct)

    parser = subparsers.add_parser("ist", parents=[common], help="Solve through the spectral pipeline")
    parser.set_defaults(handler=ist)

    parser = subparsers.add_parser("compare", parents=[common], help="Compare spectral and direct solutions")
    parser.set_defaults(handler=compare_solvers)
