"""
Logging System

Console output is colored by level when colorama is installed. File output
(plain and JSON lines, both rotated) goes under <output_root>/logs. Every
record carries the run id, preset and replica of the work that emitted it.
"""

import json
import logging
import logging.handlers
import sys
import threading
import traceback
import uuid
from pathlib import Path
from typing import Any, Dict, Optional, Union

try:
    from colorama import Fore, Style, init
    init()
    COLORAMA_AVAILABLE = True
except ImportError:
    COLORAMA_AVAILABLE = False

DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
CONSOLE_FORMAT = "%(asctime)s [%(name)s] [%(levelname)s] %(where)s%(message)s"
FILE_FORMAT = "%(asctime)s [%(name)s] [%(levelname)s] [%(run_id)s] %(where)s%(message)s"
ROTATE_BYTES = 10 * 1024 * 1024

# Fields always present on a record, so formats can name them.
CONTEXT_DEFAULTS = {"run_id": "-", "preset": None, "replica": None}


class ContextFilter(logging.Filter):
    """Stamps records with the current thread's run context."""

    _local = threading.local()

    @classmethod
    def get_context(cls) -> Dict[str, Any]:
        if not hasattr(cls._local, "context"):
            cls._local.context = {}
        return cls._local.context

    @classmethod
    def set_context_value(cls, key: str, value: Any) -> None:
        cls.get_context()[key] = value

    @classmethod
    def remove_context_value(cls, key: str) -> None:
        cls.get_context().pop(key, None)

    def filter(self, record: logging.LogRecord) -> bool:
        context = {**CONTEXT_DEFAULTS, **self.get_context()}
        for key, value in context.items():
            if not hasattr(record, key):
                setattr(record, key, value)
        record.where = _where(record.preset, record.replica)
        return True


def _where(preset: Optional[str], replica: Optional[int]) -> str:
    if preset is None and replica is None:
        return ""
    if replica is None:
        return f"{preset}: "
    return f"{preset or '?'}#{replica}: "


class ColorFormatter(logging.Formatter):
    """Colors the level name; the message text is left untouched."""

    LEVEL_COLORS = {
        logging.DEBUG: "CYAN",
        logging.INFO: "GREEN",
        logging.WARNING: "YELLOW",
        logging.ERROR: "RED",
        logging.CRITICAL: "MAGENTA",
    }

    def format(self, record: logging.LogRecord) -> str:
        if not COLORAMA_AVAILABLE:
            return super().format(record)
        color = getattr(Fore, self.LEVEL_COLORS.get(record.levelno, "WHITE"))
        levelname = record.levelname
        record.levelname = f"{color}{levelname}{Style.RESET_ALL}"
        try:
            return super().format(record)
        finally:
            record.levelname = levelname


class JsonFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record: logging.LogRecord) -> str:
        data = {
            "timestamp": self.formatTime(record, DATE_FORMAT),
            "level": record.levelname,
            "name": record.name,
            "message": record.getMessage(),
        }
        for key in CONTEXT_DEFAULTS:
            data[key] = getattr(record, key, CONTEXT_DEFAULTS[key])
        if record.exc_info:
            data["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": "".join(traceback.format_exception(*record.exc_info)),
            }
        return json.dumps(data, default=str)


class LogManager:
    """
    Process-wide logging configuration.

    The first construction configures the root logger; later constructions
    return the same instance untouched. reset() drops the instance so the
    next construction reconfigures (the CLI and the tests use this). With
    log_dir=None only the console handler is installed.
    """

    _instance = None

    def __new__(cls, *args, **kwargs):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self, log_level: str = "INFO",
                 log_dir: Optional[Union[str, Path]] = None,
                 json_logs: bool = True):
        if self._initialized:
            return

        level = logging.getLevelName(str(log_level).upper())
        self.level = level if isinstance(level, int) else logging.INFO
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.context_filter = ContextFilter()

        root = logging.getLogger()
        root.setLevel(self.level)
        for handler in root.handlers[:]:
            root.removeHandler(handler)

        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(ColorFormatter(CONSOLE_FORMAT, DATE_FORMAT))
        self._install(console)

        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            plain = self._rotating("stablebrw.log")
            plain.setFormatter(logging.Formatter(FILE_FORMAT, DATE_FORMAT))
            self._install(plain)
            if json_logs:
                structured = self._rotating("stablebrw.json.log")
                structured.setFormatter(JsonFormatter())
                self._install(structured)

        self._initialized = True
        logging.getLogger("LogManager").debug("Logging configured at %s", logging.getLevelName(self.level))

    def _rotating(self, name: str) -> logging.Handler:
        return logging.handlers.RotatingFileHandler(
            self.log_dir / name, maxBytes=ROTATE_BYTES, backupCount=5)

    def _install(self, handler: logging.Handler) -> None:
        handler.setLevel(self.level)
        handler.addFilter(self.context_filter)
        logging.getLogger().addHandler(handler)

    @classmethod
    def reset(cls) -> None:
        if cls._instance is not None:
            root = logging.getLogger()
            for handler in root.handlers[:]:
                handler.close()
                root.removeHandler(handler)
        cls._instance = None

    def get_logger(self, name: str) -> logging.Logger:
        return logging.getLogger(name)

    def set_correlation_id(self, correlation_id: Optional[str] = None) -> str:
        """Tag every following record with a run id (a fresh UUID by default)."""
        if correlation_id is None:
            correlation_id = uuid.uuid4().hex[:12]
        ContextFilter.set_context_value("run_id", correlation_id)
        return correlation_id
