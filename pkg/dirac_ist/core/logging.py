"""Structured logging configuration.

Log records go to standard error; standard output carries the human readable reports of the
commands. Every record of one invocation carries its run id.
"""

import logging
import sys
from typing import Any, Dict, Optional

from pythonjsonlogger import jsonlogger

from dirac_ist.core.config import settings

JSON_FORMAT = "%(timestamp)s %(level)s %(name)s %(message)s"
TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(run_id)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class RunIdFilter(logging.Filter):
    """Stamps records with the run id unless the caller passed one in ``extra``."""

    def __init__(self, run_id: Optional[str]) -> None:
        super().__init__()
        self.run_id = run_id or "-"

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "run_id"):
            record.run_id = self.run_id
        return True


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    """JSON formatter adding the toolkit identity to each record."""

    def add_fields(
        self,
        log_record: Dict[str, Any],
        record: logging.LogRecord,
        message_dict: Dict[str, Any]
    ) -> None:
        """Add toolkit fields to log record."""
        super().add_fields(log_record, record, message_dict)

        log_record["app_name"] = settings.APP_NAME
        log_record["app_version"] = settings.APP_VERSION
        log_record["level"] = record.levelname
        log_record["logger_name"] = record.name
        log_record.setdefault("timestamp", self.formatTime(record, self.datefmt))


def setup_logging(level: Optional[str] = None, fmt: Optional[str] = None, run_id: Optional[str] = None) -> None:
    """Install the single stderr handler of the toolkit.

    Args:
        level: Logging level, defaults to settings.LOG_LEVEL
        fmt: "json" or "text", defaults to settings.LOG_FORMAT
        run_id: Identifier stamped on every record
    """
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    log_level = getattr(logging, (level or settings.LOG_LEVEL).upper())
    root_logger.setLevel(log_level)

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(log_level)
    handler.addFilter(RunIdFilter(run_id))
    if (fmt or settings.LOG_FORMAT) == "json":
        handler.setFormatter(CustomJsonFormatter(JSON_FORMAT, datefmt=DATE_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT, datefmt=DATE_FORMAT))
    root_logger.addHandler(handler)

    # joblib workers log through the same handler
    logging.getLogger("joblib").propagate = True


def get_logger(name: str) -> logging.Logger:
    """Module logger, ``get_logger(__name__)``."""
    return logging.getLogger(name)
