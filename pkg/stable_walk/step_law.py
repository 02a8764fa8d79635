"""
Step Law

Increment law of the associated one-dimensional walk: a Pareto right tail
with index alpha above x_m and a uniform left part on [-d, 0], calibrated to
mean zero. The right tail is exactly c * y^(-alpha) beyond x_m and the left
tail vanishes below -d.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
from scipy import integrate

from core.errors import DomainError, NumericalError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class StepLaw:
    """
    Pareto-right / uniform-left increment law

    Attributes:
        alpha: Tail index in (1, 2)
        x_m: Pareto lower cutoff
        d: Left-support depth
        p_r: Mass of the Pareto component (derived)
        c: Right-tail constant p_r * x_m^alpha (derived)
        c0_symbol: Scale of the stable characteristic exponent; not computed
    """
    alpha: float
    x_m: float
    d: float
    p_r: float = field(init=False)
    c: float = field(init=False)
    c0_symbol: Optional[float] = field(default=None, init=False)

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise DomainError("alpha must lie in (1,2)")
        if not self.x_m > 0:
            raise DomainError("x_m must be > 0")
        if not self.d > 0:
            raise DomainError("d must be > 0")
        half_d = self.d / 2.0
        pareto_mean = self.x_m * self.alpha / (self.alpha - 1.0)
        p_r = half_d / (half_d + pareto_mean)
        object.__setattr__(self, "p_r", p_r)
        object.__setattr__(self, "c", p_r * self.x_m ** self.alpha)

    @property
    def q(self) -> float:
        """Mass of the uniform left component"""
        return 1.0 - self.p_r

    def pdf(self, s: ArrayLike) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        left = (s >= -self.d) & (s <= 0.0)
        right = s >= self.x_m
        out[left] = self.q / self.d
        out[right] = (self.p_r * self.alpha * self.x_m ** self.alpha
                      * s[right] ** (-(self.alpha + 1.0)))
        return out

    def cdf(self, s: ArrayLike) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        left = (s >= -self.d) & (s < 0.0)
        gap = (s >= 0.0) & (s < self.x_m)
        right = s >= self.x_m
        out[left] = self.q * (s[left] + self.d) / self.d
        out[gap] = self.q
        out[right] = 1.0 - self.c * s[right] ** (-self.alpha)
        return out

    def sf(self, s: ArrayLike) -> np.ndarray:
        """P(S_1 > s); equals c * s^(-alpha) exactly for s >= x_m"""
        s = np.asarray(s, dtype=float)
        out = 1.0 - self.cdf(s)
        right = s >= self.x_m
        out[right] = self.c * s[right] ** (-self.alpha)
        return out

    def ppf(self, u: ArrayLike) -> np.ndarray:
        """
        Monotone inverse CDF.

        u < q maps onto [-d, 0) linearly, u >= q onto the Pareto tail
        x_m * ((1 - u) / p_r)^(-1/alpha).
        """
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        left = u < self.q
        out[left] = -self.d + self.d * u[left] / self.q
        tail = (1.0 - u[~left]) / self.p_r
        with np.errstate(divide="ignore"):
            out[~left] = self.x_m * tail ** (-1.0 / self.alpha)
        return out

    def mean(self) -> float:
        """Mean by quadrature over both components"""
        left, err_left = integrate.quad(lambda s: s * self.q / self.d, -self.d, 0.0)
        # tail part in the variable w = (x_m / s)^alpha, integrand x_m * p_r * w^(-1/alpha)
        right, err_right = integrate.quad(
            lambda w: self.x_m * self.p_r, 0.0, 1.0,
            weight="alg", wvar=(-1.0 / self.alpha, 0.0),
        )
        if err_left + err_right > 1e-10:
            raise NumericalError(f"mean quadrature error {err_left + err_right:.3g} too large")
        return left + right

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "x_m": self.x_m, "d": self.d,
                "p_r": self.p_r, "c": self.c, "c0_symbol": self.c0_symbol}


def make_step_law(alpha: float, x_m: float = 1.0, d: float = 2.0) -> StepLaw:
    """
    Build the mean-zero step law

    Args:
        alpha: Tail index, strictly between 1 and 2
        x_m: Pareto cutoff, positive
        d: Depth of the uniform left part, positive

    Returns:
        StepLaw with p_r = (d/2) / (d/2 + x_m * alpha / (alpha - 1))
    """
    law = StepLaw(float(alpha), float(x_m), float(d))
    logging.getLogger(__name__).debug(f"Step law {law.to_dict()}")
    return law


def sample_steps(law: StepLaw, size, rng: np.random.Generator) -> np.ndarray:
    """Vectorized sampler: one uniform per step through the inverse CDF"""
    return law.ppf(rng.random(size))


def sample_step(law: StepLaw, rng: np.random.Generator) -> float:
    return float(sample_steps(law, 1, rng)[0])


def ks_distance(law: StepLaw, samples: np.ndarray) -> float:
    """One-sample Kolmogorov-Smirnov distance against the closed-form CDF"""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("ks_distance needs at least one sample")
    cdf = law.cdf(x)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))
