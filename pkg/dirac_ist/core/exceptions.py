"""Custom exceptions for the toolkit.

Every exception carries the process exit code the command line reports for it:
1 for usage and configuration problems, 2 for numerical failures, 3 for tolerance failures.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_TOLERANCE = 3


class ISTException(Exception):
    """Base toolkit exception."""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_NUMERICAL,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize exception.

        Args:
            message: Error message
            exit_code: Process exit code reported by the CLI
            details: Additional error details
        """
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class UsageException(ISTException):
    """Invalid command line."""

    def __init__(self, message: str = "Usage error", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, exit_code=EXIT_USAGE, details=details)


class ConfigurationException(ISTException):
    """Invalid scenario configuration or override."""

    def __init__(self, message: str = "Configuration error", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, exit_code=EXIT_USAGE, details=details)


class ValidationException(ISTException):
    """A value type was constructed or used against its invariants."""

    def __init__(self, message: str = "Validation error", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, exit_code=EXIT_USAGE, details=details)


class NumericalException(ISTException):
    """Base class for numerical failures inside a pipeline stage."""

    def __init__(
        self,
        message: str = "Numerical failure",
        details: Optional[Dict[str, Any]] = None,
        stage: Optional[str] = None
    ) -> None:
        """Initialize exception.

        Args:
            message: Error message
            details: Additional error details
            stage: Pipeline stage label, attached later when unknown at raise time
        """
        super().__init__(message=message, exit_code=EXIT_NUMERICAL, details=details)
        if stage is not None:
            self.details["stage"] = stage

    @property
    def stage(self) -> Optional[str]:
        """Stage label, if one has been attached."""
        return self.details.get("stage")

    def with_stage(self, stage: str) -> "NumericalException":
        """Attach a stage label unless one is already present."""
        self.details.setdefault("stage", stage)
        return self


class DivergedPropagationException(NumericalException):
    """Characteristic marching produced non-finite values or a singular local step."""

    def __init__(self, message: str = "Propagation diverged", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, details=details)


class DomainException(NumericalException):
    """Potential does not vanish on the frame of the computational box."""

    def __init__(
        self,
        message: str = "Potential violates the support box",
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize exception."""
        super().__init__(message=message, details=details)


class EdgeDecayException(NumericalException):
    """Kernel tables have not decayed at the edge of their window."""

    def __init__(self, message: str = "Kernel tables do not decay", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, details=details)


class WindowOverflowException(NumericalException):
    """Significant mass would leave the tabulation window."""

    def __init__(self, message: str = "Window overflow", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, details=details)


class InversionBreakdownException(NumericalException):
    """Nyström system is singular or too ill-conditioned."""

    def __init__(self, message: str = "Inversion breakdown", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, details=details)


class BlowUpException(NumericalException):
    """Direct solver produced non-finite values."""

    def __init__(self, message: str = "Solution blew up", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, details=details)


class ToleranceException(ISTException):
    """A comparison exceeded its tolerance."""

    def __init__(self, message: str = "Tolerance exceeded", details: Optional[Dict[str, Any]] = None) -> None:
        """Initialize exception."""
        super().__init__(message=message, exit_code=EXIT_TOLERANCE, details=details)
