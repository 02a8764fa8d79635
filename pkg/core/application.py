"""
StableBRW Application

Bootstraps configuration and logging for a command, installs signal
handlers, and exposes the shutdown event the orchestrator polls between
replicas.
"""

import signal
import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from . import __version__
from .config import ConfigManager
from .logger import LogManager


class Application:
    """
    Application lifecycle for one CLI invocation

    Features:
    - Configuration and logging initialization
    - Signal handling for graceful shutdown
    - Run status for run_info.json
    """

    def __init__(self,
                 app_name: str = "StableBRW",
                 config_dir: Optional[str] = None,
                 config_file: Optional[str] = None,
                 log_level: Optional[str] = None,
                 output_root: Optional[str] = None,
                 install_signal_handlers: bool = True):
        self.app_name = app_name
        self.start_time = datetime.now()
        self.shutdown_event = threading.Event()
        self._previous_handlers: Dict[int, Any] = {}

        self.config_manager = ConfigManager(config_dir, override_file=config_file)
        if output_root is not None:
            self.config_manager.set("system.output_root", str(output_root))

        settings = self.config_manager.config
        level = log_level or settings.system.log_level("INFO")
        log_dir = None
        if settings.logging.to_file(True):
            log_dir = self.output_root / "logs"
        self.log_manager = LogManager(
            level, log_dir=log_dir,
            json_logs=settings.logging.json(True),
        )
        self.logger = self.log_manager.get_logger("Application")
        self.run_id = self.log_manager.set_correlation_id()

        if install_signal_handlers:
            self._setup_signal_handlers()
        self.logger.info(f"{self.app_name} {__version__} initialized (run {self.run_id})")

    @property
    def output_root(self) -> Path:
        return self.config_manager.output_root()

    def _setup_signal_handlers(self) -> None:
        """Set up signal handlers for graceful shutdown"""
        try:
            self._previous_handlers = {
                sig: signal.signal(sig, self._signal_handler)
                for sig in (signal.SIGINT, signal.SIGTERM)
            }
        except ValueError:
            # not the main thread
            self.logger.debug("Signal handlers not installed")

    def _signal_handler(self, sig, frame) -> None:
        if sig == signal.SIGINT:
            self.logger.info("Received SIGINT (Ctrl+C), stopping after running replicas...")
        elif sig == signal.SIGTERM:
            self.logger.info("Received SIGTERM, stopping after running replicas...")
        self.shutdown()

    def shutdown(self) -> None:
        if self.shutdown_event.is_set():
            return
        self.logger.info(f"Shutting down {self.app_name}")
        self.shutdown_event.set()

    def is_shutting_down(self) -> bool:
        return self.shutdown_event.is_set()

    def get_uptime(self) -> float:
        """Get the application uptime in seconds"""
        return (datetime.now() - self.start_time).total_seconds()

    def get_status(self) -> Dict[str, Any]:
        return {
            "name": self.app_name,
            "version": __version__,
            "run_id": self.run_id,
            "uptime": self.get_uptime(),
            "start_time": self.start_time.isoformat(),
            "shutting_down": self.is_shutting_down(),
        }

    def close(self) -> None:
        """Restore the signal handlers that were active before this application"""
        for sig, handler in self._previous_handlers.items():
            try:
                signal.signal(sig, handler)
            except (ValueError, TypeError):
                pass
        self._previous_handlers = {}
