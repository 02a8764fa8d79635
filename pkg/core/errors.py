"""
Error hierarchy

Every failure the toolkit reports on purpose derives from StableBRWError so
the CLI can map it to an exit code. Categories follow the way the config and
application layers raise their own exception types.
"""

from typing import Any, Dict, List, Optional


class StableBRWError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 1


class DomainError(StableBRWError, ValueError):
    """A parameter lies outside its mathematical domain"""
    exit_code = 2


class ConfigError(StableBRWError):
    """Exception raised for configuration errors"""
    exit_code = 2


class InsufficientDataError(StableBRWError):
    """Not enough usable samples for an estimator"""
    pass


class NumericalError(StableBRWError):
    """Quadrature or another numerical routine did not converge"""
    pass


class PolicyError(StableBRWError, ValueError):
    """A truncation policy cannot be applied to the current generation"""
    exit_code = 2


class PopulationOverflowError(StableBRWError):
    """Streaming population capping failed to bound the population"""
    pass


class SurvivalError(StableBRWError):
    """Conditioning on survival gave up"""

    def __init__(self, message: str, attempts: int, survivors: int):
        super().__init__(message)
        self.attempts = attempts
        self.survivors = survivors

    @property
    def survival_rate(self) -> float:
        return self.survivors / self.attempts if self.attempts else 0.0


class CostGuardError(StableBRWError):
    """Pre-flight cost estimate exceeds the configured budget"""
    exit_code = 3

    def __init__(self, message: str, estimate: float, budget: float):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


class ApplicationError(StableBRWError):
    """Exception raised for application-level errors"""

    def __init__(self, message: str, missing: Optional[List[int]] = None,
                 manifest_path: Optional[str] = None):
        super().__init__(message)
        self.missing = missing or []
        self.manifest_path = manifest_path

    def to_dict(self) -> Dict[str, Any]:
        return {
            "message": str(self),
            "missing": list(self.missing),
            "manifest_path": self.manifest_path,
        }
