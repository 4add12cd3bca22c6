"""Command line router configuration."""

import argparse

from dirac_ist.cli.commands import scattering, solvers, studies
from dirac_ist.cli.invocation import CliParser

# Command groups, each contributing subcommands through register(subparsers, common)
COMMAND_GROUPS = (scattering, solvers, studies)


def common_options() -> argparse.ArgumentParser:
    """Options accepted by every subcommand."""
    common = CliParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None, help="TOML scenario file")
    common.add_argument("--output", metavar="DIR", default=None, help="Output directory, overrides run.output_dir")
    common.add_argument(
        "--override",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        help="Dotted scenario override such as grid.n=128; repeatable",
    )
    common.add_argument("--strict", action="store_true", help="Escalate diagnostics to errors")
    common.add_argument("--quiet", action="store_true", help="Log warnings only and print no reports")
    common.add_argument("--threads", metavar="N", type=int, default=None, help="Worker threads")
    return common


def build_router(parser: argparse.ArgumentParser) -> None:
    """Attach every subcommand to ``parser``."""
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    common = common_options()
    for group in COMMAND_GROUPS:
        group.register(subparsers, common)
