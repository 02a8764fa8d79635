"""Shared pytest fixtures"""

import logging

import pytest
from hypothesis import settings

from core.logger import ContextFilter, LogManager

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def quiet_logging():
    """Console-only logging per test; no log files in the source tree"""
    LogManager.reset()
    ContextFilter.get_context().clear()
    LogManager("WARNING", log_dir=None)
    yield
    LogManager.reset()
    ContextFilter.get_context().clear()
    logging.getLogger().setLevel(logging.WARNING)


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    root = tmp_path / "results"
    monkeypatch.setenv("STABLEBRW_OUTPUT_ROOT", str(root))
    return root
