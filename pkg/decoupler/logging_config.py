"""
Logging setup for Decoupler runs.

Console output is colored and prefixed with the run context (run id,
subcommand, chain pair, ...). JSON records and operation logs carry the
same context as fields, so lines from one run or one pair of a chain scan
can be filtered out of a shared log file.
"""

import json
import logging
import logging.handlers
import os
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

LOG_LEVELS = {
    "development": logging.DEBUG,
    "production": logging.INFO,
    "testing": logging.WARNING,
}

# Context keys shown on the console, in this order
CONSOLE_CONTEXT = ("run_id", "command", "pair", "scheme", "cell")

_context_stack: List[Dict[str, Any]] = []
_context_lock = threading.Lock()


def current_context() -> Dict[str, Any]:
    """Merged fields of every active LogContext, innermost last."""
    with _context_lock:
        merged: Dict[str, Any] = {}
        for fields in _context_stack:
            merged.update(fields)
        return merged


class JSONFormatter(logging.Formatter):
    """One JSON object per record with the run context and operation data as fields."""

    def format(self, record: logging.LogRecord) -> str:
        log_obj = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        context = getattr(record, "context", None)
        if context:
            log_obj["context"] = context
        data = getattr(record, "data", None)
        if data:
            log_obj["data"] = data
        if record.exc_info:
            log_obj["exception"] = self.formatException(record.exc_info)
        return json.dumps(log_obj, default=str)


class ConsoleFormatter(logging.Formatter):
    """Colored single-line records, prefixed with the short run context."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"

    @staticmethod
    def _prefix(context: Dict[str, Any]) -> str:
        parts = [f"{key}={context[key]}" for key in CONSOLE_CONTEXT if key in context]
        return f"[{' '.join(parts)}] " if parts else ""

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelname, self.RESET)
        timestamp = datetime.now().strftime("%H:%M:%S")
        prefix = self._prefix(getattr(record, "context", None) or {})
        return (
            f"{color}[{timestamp}] {record.levelname:8}{self.RESET} "
            f"{prefix}{record.name}: {record.getMessage()}"
        )


def setup_logging(
    level: Optional[str] = None,
    json_logs: bool = False,
    log_file: Optional[str] = None,
) -> logging.Logger:
    """
    Configure package-wide logging.

    Args:
        level: Log level name; default depends on DECOUPLER_ENV
        json_logs: JSON records on stderr instead of colored lines
        log_file: Optional rotating JSON log file

    Returns:
        Root logger
    """
    env = os.environ.get("DECOUPLER_ENV", "development")
    if level:
        log_level = getattr(logging, level.upper(), logging.INFO)
    else:
        log_level = LOG_LEVELS.get(env, logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()

    # stderr, so stdout stays clean for tables
    console_handler = logging.StreamHandler()
    console_handler.setLevel(log_level)
    console_handler.setFormatter(JSONFormatter() if json_logs else ConsoleFormatter())
    root_logger.addHandler(console_handler)

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file, maxBytes=10 * 1024 * 1024, backupCount=5, encoding="utf-8"
        )
        file_handler.setLevel(log_level)
        file_handler.setFormatter(JSONFormatter())
        root_logger.addHandler(file_handler)

    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    return root_logger


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


class LogContext:
    """
    Attach fields such as the run id or a chain pair index to every record
    created inside the block. Contexts nest; inner fields win.

    Usage:
        with LogContext(run_id=manifest.run_id, command="chain-scan"):
            with LogContext(pair=1):
                ...
    """

    def __init__(self, **fields: Any):
        self.fields = fields
        self._old_factory = None

    def __enter__(self) -> "LogContext":
        with _context_lock:
            _context_stack.append(self.fields)
        self._old_factory = logging.getLogRecordFactory()
        old_factory = self._old_factory

        def record_factory(*args, **kwargs):
            record = old_factory(*args, **kwargs)
            record.context = current_context()
            return record

        logging.setLogRecordFactory(record_factory)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        logging.setLogRecordFactory(self._old_factory)
        with _context_lock:
            _context_stack.remove(self.fields)


class OperationLogger:
    """Logger for long-running operations like flux sweeps, grids and pulse optimization.

    Entries are kept in memory and, when a directory is given, appended as JSON
    lines to ``<directory>/<operation>.jsonl`` together with the active run context.
    """

    def __init__(self, operation_type: str, directory: Optional[Path] = None):
        self.operation_type = operation_type
        self.start_time = datetime.now()
        self.log_file: Optional[Path] = None
        if directory is not None:
            Path(directory).mkdir(parents=True, exist_ok=True)
            self.log_file = Path(directory) / f"{operation_type}.jsonl"
        self.logger = get_logger(f"operation.{operation_type}")
        self.entries: List[Dict[str, Any]] = []

    def log(self, message: str, level: str = "INFO", **data):
        entry = {
            "timestamp": datetime.now().isoformat(),
            "level": level,
            "message": message,
            **current_context(),
            **data,
        }
        self.entries.append(entry)

        log_method = getattr(self.logger, level.lower(), self.logger.info)
        log_method(f"[{self.operation_type}] {message}", extra={"data": data} if data else {})

        if self.log_file is not None:
            with open(self.log_file, "a") as f:
                f.write(json.dumps(entry, default=str) + "\n")

    def info(self, message: str, **data):
        self.log(message, "INFO", **data)

    def debug(self, message: str, **data):
        self.log(message, "DEBUG", **data)

    def warning(self, message: str, **data):
        self.log(message, "WARNING", **data)

    def error(self, message: str, **data):
        self.log(message, "ERROR", **data)

    def success(self, message: str, **data):
        self.log(message, "INFO", status="success", **data)

    def get_summary(self) -> dict:
        duration = (datetime.now() - self.start_time).total_seconds()
        return {
            "operation": self.operation_type,
            "started_at": self.start_time.isoformat(),
            "duration_seconds": round(duration, 2),
            "total_entries": len(self.entries),
            "errors": sum(1 for e in self.entries if e.get("level") == "ERROR"),
            "warnings": sum(1 for e in self.entries if e.get("level") == "WARNING"),
            "log_file": str(self.log_file) if self.log_file else None,
        }
