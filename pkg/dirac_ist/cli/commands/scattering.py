"""Scattering-data commands: forward, invert, evolve."""

import argparse
from pathlib import Path

from dirac_ist.cli.invocation import Invocation
from dirac_ist.core.exceptions import EXIT_OK, UsageException
from dirac_ist.core.logging import get_logger
from dirac_ist.models.fields import KernelAxis
from dirac_ist.models.schemas import GridInfo, RunManifest
from dirac_ist.services.direct_scattering import forward_scattering, load_scattering_data, save_scattering_data
from dirac_ist.services.marchenko import reconstruct_potential, write_diagnostics
from dirac_ist.services.potentials import build_potential
from dirac_ist.services.spectral_evolution import evolve, required_padding
from dirac_ist.utils.field_io import field_path, write_model, write_potential

logger = get_logger(__name__)


def _input_dir(inv: Invocation) -> Path:
    source = Path(inv.args.input)
    if source.resolve() == inv.output.resolve():
        raise UsageException(
            "--input and the output directory must differ",
            details={"input": str(source), "output": str(inv.output)}
        )
    return source


def forward(inv: Invocation) -> int:
    """Potential of the scenario to scattering data files.

    The kernel window is padded for evolution up to ``time.t_final``.

    Args:
        inv: Command invocation

    Returns:
        Exit code
    """
    config = inv.config
    grid = config.grid.to_grid()
    with inv.context.stage("initial", family=config.potential.family):
        q0 = build_potential(grid, config.potential)

    padding = required_padding(config.lax, config.time.t_final, grid.h) + config.scattering.padding
    axis = KernelAxis.for_grid(grid, padding)
    with inv.context.stage("forward", n=grid.n, m=axis.m):
        scat = forward_scattering(
            q0,
            axis,
            edge_tol=config.scattering.edge_tol,
            strict=config.run.strict,
            threads=config.run.threads,
            domain_tol=config.scattering.domain_tol,
        )

    save_scattering_data(inv.output, scat, inv.fmt)
    write_potential(field_path(inv.output, "potential_initial", inv.fmt), q0, inv.fmt)
    inv.echo(f"scattering data (m = {axis.m}, edge {scat.edge_magnitude():.3e}) written to {inv.output}")
    return EXIT_OK


def invert(inv: Invocation) -> int:
    """Scattering data files to a potential."""
    config = inv.config
    scat = load_scattering_data(_input_dir(inv))
    with inv.context.stage("reconstruct", method=config.marchenko.method, m=scat.axis.m):
        pot, stats = reconstruct_potential(
            scat, None, config.marchenko.method, config.marchenko.cond_limit, config.run.threads
        )

    write_potential(field_path(inv.output, "potential", inv.fmt), pot, inv.fmt)
    write_diagnostics(inv.output / "conditioning.txt", stats)
    write_model(
        inv.output / "manifest.json",
        RunManifest(kind="reconstruction", grid=GridInfo.from_grid(pot.grid), t_final=scat.t, format=inv.fmt),
    )
    summary = stats.summary()
    inv.echo(f"potential at t = {scat.t:g} written to {inv.output} (cond max {summary.cond_max:.3e})")
    return EXIT_OK


def evolve_data(inv: Invocation) -> int:
    """Scattering data files advanced by ``--time`` (``time.t_final`` when omitted)."""
    config = inv.config
    t = inv.args.time if inv.args.time is not None else config.time.t_final
    scat0 = load_scattering_data(_input_dir(inv))
    with inv.context.stage("evolve", t=t, m=scat0.axis.m):
        scat_t = evolve(scat0, config.lax, t, edge_tol=config.scattering.edge_tol, threads=config.run.threads)
        edge = scat_t.check_edge_decay(config.scattering.edge_tol, config.run.strict)

    save_scattering_data(inv.output, scat_t, inv.fmt)
    inv.echo(f"scattering data at t = {scat_t.t:g} (edge {edge:.3e}) written to {inv.output}")
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("forward", parents=[common], help="Potential to scattering data")
    parser.set_defaults(handler=forward)

    parser = subparsers.add_parser("invert", parents=[common], help="Scattering data to potential")
    parser.add_argument("--input", metavar="DIR", required=True, help="Directory written by forward or evolve")
    parser.set_defaults(handler=invert)

    parser = subparsers.add_parser("evolve", parents=[common], help="Advance scattering data in time")
    parser.add_argument("--input", metavar="DIR", required=True, help="Directory written by forward or evolve")
    parser.add_argument("--time", metavar="T", type=float, default=None, help="Evolution time, time.t_final by default")
    parser.set_defaults(handler=evolve_data)
