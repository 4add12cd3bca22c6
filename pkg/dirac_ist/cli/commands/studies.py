"""Study commands: verify-lax, convergence."""

import argparse

from dirac_ist.cli.invocation import Invocation
from dirac_ist.cli.outputs import write_report
from dirac_ist.core.exceptions import EXIT_OK
from dirac_ist.models.schemas import StudyReport
from dirac_ist.services.convergence import STUDIES, format_table, lax_study, refinement_study


def verify_lax(inv: Invocation) -> int:
    """Constraint, commutator and solution-mapping residuals over refined grids."""
    config = inv.config
    levels = config.convergence.levels
    with inv.context.stage("verify-lax", levels=levels):
        rows = lax_study(config, levels)

    text = format_table(rows)
    write_report(inv.output, StudyReport(kind="lax", n_coarse=config.grid.n, levels=levels, rows=rows), text)
    inv.echo(text)
    return EXIT_OK


def convergence(inv: Invocation) -> int:
    """Errors and observed orders of one refinement study."""
    config = inv.config
    study = config.convergence.study
    levels = config.convergence.levels
    with inv.context.stage("convergence", study=study, levels=levels):
        rows = refinement_study(config, study, levels)

    text = format_table(rows)
    write_report(inv.output, StudyReport(kind="refinement", n_coarse=config.grid.n, levels=levels, rows=rows), text)
    inv.echo(text)
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("verify-lax", parents=[common], help="Lax-pair residual suite")
    parser.add_argument("--levels", type=int, default=None, help="Refinement levels, overrides convergence.levels")
    parser.set_defaults(handler=verify_lax)

    parser = subparsers.add_parser("convergence", parents=[common], help="Refinement study table")
    parser.add_argument("--study", choices=STUDIES, default=None, help="Study, overrides convergence.study")
    parser.add_argument("--levels", type=int, default=None, help="Refinement levels, overrides convergence.levels")
    parser.set_defaults(handler=convergence)
