"""Command line entry point."""

import argparse
import sys
import time
from typing import List, Optional, Sequence

from dirac_ist import __app_name__, __version__
from dirac_ist.cli.invocation import CliParser, Invocation
from dirac_ist.cli.outputs import write_timings
from dirac_ist.cli.router import build_router
from dirac_ist.core.config import load_scenario, settings
from dirac_ist.core.error_handlers import handle_exception
from dirac_ist.core.exceptions import UsageException
from dirac_ist.core.instrumentation import RunContext
from dirac_ist.core.logging import get_logger, setup_logging

logger = get_logger(__name__)


def create_parser() -> CliParser:
    """Create the argument parser with every subcommand.

    Returns:
        Configured parser
    """
    parser = CliParser(
        prog=__app_name__,
        description="Inverse scattering toolkit for the 2+1 dimensional three-wave system",
    )
    parser.add_argument("--version", action="version", version=f"{__app_name__} {__version__}")
    build_router(parser)
    return parser


def scenario_overrides(args: argparse.Namespace) -> List[str]:
    """Overrides from ``--override`` followed by those implied by dedicated flags."""
    overrides = list(args.override)
    if args.strict:
        overrides.append("run.strict=true")
    if args.threads is not None:
        overrides.append(f"run.threads={args.threads}")
    if getattr(args, "levels", None) is not None:
        overrides.append(f"convergence.levels={args.levels}")
    if getattr(args, "study", None) is not None:
        overrides.append(f'convergence.study="{args.study}"')
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command.

    Args:
        argv: Arguments without the program name, ``sys.argv[1:]`` when omitted

    Returns:
        Exit code: 0 success, 1 usage or configuration error, 2 numerical failure,
        3 tolerance failure
    """
    context = RunContext()
    start_time = time.perf_counter()

    try:
        args = create_parser().parse_args(argv)
    except UsageException as exc:
        setup_logging(run_id=context.run_id)
        return handle_exception(exc, context.run_id)

    setup_logging(level="WARNING" if args.quiet else None, run_id=context.run_id)
    logger.info(
        f"Starting {settings.APP_NAME} v{settings.APP_VERSION}",
        extra={"run_id": context.run_id, "command": args.command}
    )

    invocation: Optional[Invocation] = None
    try:
        config = load_scenario(args.config, scenario_overrides(args), args.output)
        invocation = Invocation(args.command, args, config, context)
        exit_code = args.handler(invocation)
    except Exception as exc:
        exit_code = handle_exception(exc, context.run_id)

    duration = time.perf_counter() - start_time
    if invocation is not None:
        try:
            write_timings(invocation.output, context, args.command, duration)
        except OSError as exc:
            logger.warning("Could not write timings", extra={"run_id": context.run_id, "error": str(exc)})

    logger.info(
        "Run finished",
        extra={"run_id": context.run_id, "exit_code": exit_code, "duration_seconds": round(duration, 4)}
    )
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
