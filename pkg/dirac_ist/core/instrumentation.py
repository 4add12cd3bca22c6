"""Run identifiers and per-stage timing."""

import time
import uuid
from contextlib import contextmanager
from typing import Dict, Iterator, Optional

from dirac_ist.core.exceptions import NumericalException
from dirac_ist.core.logging import get_logger

logger = get_logger(__name__)


class RunContext:
    """Identifies one command invocation and collects stage timings."""

    def __init__(self, run_id: Optional[str] = None) -> None:
        """Initialize context.

        Args:
            run_id: Explicit identifier, a fresh uuid4 when omitted
        """
        self.run_id = run_id or str(uuid.uuid4())
        self.timings: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str, **fields: object) -> Iterator[None]:
        """Time and log one pipeline stage.

        Numerical exceptions escaping the stage are labelled with its name.

        Args:
            name: Stage label
            **fields: Extra structured fields for the log records

        Yields:
            None
        """
        start_time = time.perf_counter()

        logger.info(
            "Stage started",
            extra={"run_id": self.run_id, "stage": name, **fields}
        )

        try:
            yield
        except NumericalException as e:
            e.with_stage(name)
            logger.error(
                "Stage failed",
                extra={"run_id": self.run_id, "stage": name, "error": e.message, "details": e.details}
            )
            raise
        except Exception as e:
            logger.error(
                "Stage failed",
                extra={"run_id": self.run_id, "stage": name, "error": str(e)},
                exc_info=True
            )
            raise

        duration = time.perf_counter() - start_time
        self.timings[name] = self.timings.get(name, 0.0) + duration

        logger.info(
            "Stage completed",
            extra={
                "run_id": self.run_id,
                "stage": name,
                "duration_seconds": round(duration, 4),
            }
        )
