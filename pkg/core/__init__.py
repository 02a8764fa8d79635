"""
StableBRW Core Module
=====================

Configuration, logging, errors, random streams and the application
lifecycle shared by every simulation package.
"""

__version__ = "0.3.0"

from .config import ConfigManager
from .logger import LogManager
from .errors import StableBRWError, DomainError, ConfigError
from .application import Application

__all__ = ['__version__', 'ConfigManager', 'LogManager', 'Application',
           'StableBRWError', 'DomainError', 'ConfigError']
