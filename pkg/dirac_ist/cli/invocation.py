"""State shared by every command handler."""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NoReturn

from dirac_ist.core.config import ScenarioConfig
from dirac_ist.core.exceptions import UsageException
from dirac_ist.core.instrumentation import RunContext
from dirac_ist.utils.field_io import FieldFormat


class CliParser(argparse.ArgumentParser):
    """Argument parser that reports bad command lines as :class:`UsageException`."""

    def error(self, message: str) -> NoReturn:
        raise UsageException(message, details={"usage": self.format_usage().strip()})


@dataclass(frozen=True)
class Invocation:
    """Parsed arguments, validated scenario and run context of one command."""

    command: str
    args: argparse.Namespace
    config: ScenarioConfig
    context: RunContext

    @property
    def output(self) -> Path:
        return Path(self.config.run.output_dir)

    @property
    def fmt(self) -> FieldFormat:
        return self.config.run.format

    @property
    def quiet(self) -> bool:
        return bool(getattr(self.args, "quiet", False))

    def echo(self, text: str) -> None:
        """Print a human-readable report to standard output unless quiet."""
        if not self.quiet:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")


Handler = Callable[[Invocation], int]
