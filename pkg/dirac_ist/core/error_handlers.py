"""Global error handling for command invocations.

Every failure ends as one ``ErrorResponse`` JSON document on standard error and a process
exit code.
"""

import sys
from typing import Optional, TextIO

from dirac_ist.core.exceptions import EXIT_NUMERICAL, ISTException
from dirac_ist.core.logging import get_logger
from dirac_ist.models.schemas import ErrorDetail, ErrorResponse

logger = get_logger(__name__)


def _emit(detail: ErrorDetail, stream: Optional[TextIO]) -> None:
    stream = stream or sys.stderr
    stream.write(ErrorResponse(error=detail).model_dump_json() + "\n")
    stream.flush()


def toolkit_exception_handler(exc: ISTException, run_id: Optional[str] = None, stream: Optional[TextIO] = None) -> int:
    """Handle toolkit exceptions.

    Args:
        exc: Toolkit exception
        run_id: Identifier of the failed run
        stream: Destination of the error document, standard error when omitted

    Returns:
        Exit code carried by the exception
    """
    logger.error(
        f"Run failed: {exc.message}",
        extra={
            "run_id": run_id,
            "exit_code": exc.exit_code,
            "details": exc.details,
        }
    )

    _emit(
        ErrorDetail(message=exc.message, details=exc.details, run_id=run_id, exit_code=exc.exit_code),
        stream,
    )
    return exc.exit_code


def generic_exception_handler(exc: Exception, run_id: Optional[str] = None, stream: Optional[TextIO] = None) -> int:
    """Handle unexpected exceptions.

    Args:
        exc: Exception
        run_id: Identifier of the failed run
        stream: Destination of the error document, standard error when omitted

    Returns:
        Numerical-failure exit code
    """
    logger.error(
        f"Unexpected error: {str(exc)}",
        extra={"run_id": run_id},
        exc_info=exc
    )

    _emit(
        ErrorDetail(
            message="Internal error",
            details={"type": type(exc).__name__, "error": str(exc)},
            run_id=run_id,
            exit_code=EXIT_NUMERICAL,
        ),
        stream,
    )
    return EXIT_NUMERICAL


def handle_exception(exc: BaseException, run_id: Optional[str] = None, stream: Optional[TextIO] = None) -> int:
    """Dispatch to the matching handler and return the exit code."""
    if isinstance(exc, ISTException):
        return toolkit_exception_handler(exc, run_id, stream)
    if isinstance(exc, Exception):
        return generic_exception_handler(exc, run_id, stream)
    raise exc
