"""
Single-location brood law

A brood is empty with probability 1 - Z. Otherwise all children sit at one
displacement Y drawn from h / Z, where

    h(y) = p(y) * e^y / lambda(y),   lambda(y) = max(1, e^y)

and p is the step-law density. Their number is the randomized rounding
N = floor(lambda(Y)) + Bernoulli(frac(lambda(Y))), so E[N | Y] = lambda(Y)
and the e^{-V}-weighted intensity of the brood equals p exactly.
"""

import logging
import math
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy import integrate

from core.errors import NumericalError
from stable_walk.step_law import StepLaw
from .interfaces import BroodBatch, ReproductionLaw, TiltedBatch

# above this log-size a group size is no longer an exact float integer
EXACT_LOG_SIZE = 52 * math.log(2.0)
MAX_LOG_FLOAT = 700.0


def _rounded_sizes(log_lam: np.ndarray, uniforms: np.ndarray, size_biased: bool):
    """Randomized rounding of lambda = e^{log_lam} (size-biased when requested)"""
    exact = log_lam <= EXACT_LOG_SIZE
    lam = np.exp(np.minimum(log_lam, EXACT_LOG_SIZE))
    floor = np.floor(lam)
    frac = lam - floor
    if size_biased:
        up = uniforms < (floor + 1.0) * frac / lam
    else:
        up = uniforms < frac
    sizes = floor + up
    log_sizes = np.log(sizes)

    huge = ~exact
    if huge.any():
        sizes = np.where(huge, np.where(log_lam > MAX_LOG_FLOAT, np.inf,
                                        np.exp(np.minimum(log_lam, MAX_LOG_FLOAT))), sizes)
        log_sizes = np.where(huge, log_lam, log_sizes)
    return sizes, log_sizes


class BroodLaw(ReproductionLaw):
    """Reproduction law satisfying the boundary and stable-tail conditions"""

    name = "brood"

    def __init__(self, base: StepLaw, rtol: float = 1e-8):
        self.base = base
        self.logger = logging.getLogger("BroodLaw")
        self.left_mass, self.Z = self._integrate_mass(rtol)
        self.logger.debug(f"BroodLaw alpha={base.alpha} x_m={base.x_m} d={base.d} Z={self.Z:.10f}")

    def _integrate_mass(self, rtol: float) -> Tuple[float, float]:
        base = self.base
        left, err_left = integrate.quad(lambda y: base.q / base.d * math.exp(y), -base.d, 0.0,
                                        epsrel=rtol * 1e-2)
        # lambda = e^y on the Pareto part, so h = p there
        scale = base.p_r * base.alpha * base.x_m ** base.alpha
        right, err_right = integrate.quad(lambda y: scale * y ** (-(base.alpha + 1.0)),
                                          base.x_m, np.inf, epsrel=rtol * 1e-2)
        total = left + right
        if err_left + err_right > rtol * total:
            raise NumericalError(
                f"mass quadrature did not reach relative tolerance {rtol} "
                f"(error {err_left + err_right:.3g})"
            )
        if not 0.0 < total <= 1.0 + 1e-12:
            raise NumericalError(f"brood mass Z={total} outside (0,1]")
        return left, min(total, 1.0)

    @property
    def closed_form_Z(self) -> float:
        base = self.base
        return base.p_r + base.q * (1.0 - math.exp(-base.d)) / base.d

    @property
    def alpha(self) -> float:
        return self.base.alpha

    @property
    def satisfies_stable_tail(self) -> bool:
        return True

    @property
    def uniforms_per_brood(self) -> int:
        return 2

    @property
    def uniforms_per_tilted_brood(self) -> int:
        return 3

    def lambda_profile(self, y: np.ndarray) -> np.ndarray:
        """Expected brood size at location y"""
        return np.maximum(1.0, np.exp(np.asarray(y, dtype=float)))

    def location_density(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.base.pdf(y) * np.exp(y - np.maximum(y, 0.0))

    def location_ppf(self, w: np.ndarray) -> np.ndarray:
        """Inverse CDF of h / Z at w in [0, 1)"""
        base = self.base
        mass = np.asarray(w, dtype=float) * self.Z
        out = np.empty_like(mass)
        left = mass < self.left_mass
        v = mass[left] / self.left_mass
        out[left] = np.log(math.exp(-base.d) + v * (1.0 - math.exp(-base.d)))
        tail = 1.0 - (mass[~left] - self.left_mass) / base.p_r
        out[~left] = base.x_m * np.maximum(tail, 1e-300) ** (-1.0 / base.alpha)
        return out

    def draw_broods(self, uniforms: np.ndarray) -> BroodBatch:
        uniforms = np.atleast_2d(uniforms)
        alive = uniforms[:, 0] < self.Z
        parent_index = np.flatnonzero(alive)
        y = self.location_ppf(uniforms[alive, 0] / self.Z)
        sizes, log_sizes = _rounded_sizes(np.maximum(y, 0.0), uniforms[alive, 1], size_biased=False)
        return BroodBatch(parent_index, np.zeros(parent_index.size, dtype=np.int64),
                          y, sizes, log_sizes)

    def tilted_broods(self, uniforms: np.ndarray) -> TiltedBatch:
        uniforms = np.atleast_2d(uniforms)
        y = self.base.ppf(uniforms[:, 0])
        sizes, log_sizes = _rounded_sizes(np.maximum(y, 0.0), uniforms[:, 1], size_biased=True)
        chosen = np.floor(uniforms[:, 2] * np.minimum(sizes, 2.0 ** 53)).astype(np.int64)

        has_brothers = sizes > 1.0
        owner = np.flatnonzero(has_brothers)
        bro_sizes = sizes[has_brothers] - 1.0
        bro_log = np.where(np.isfinite(bro_sizes) & (log_sizes[has_brothers] <= EXACT_LOG_SIZE),
                           np.log(np.maximum(bro_sizes, 1.0)), log_sizes[has_brothers])
        return TiltedBatch(y, sizes, chosen, owner, y[has_brothers], bro_sizes, bro_log)

    def walk_increments(self, size, rng: np.random.Generator) -> np.ndarray:
        return self.base.ppf(rng.random(size))

    def step_cdf(self, s: np.ndarray) -> np.ndarray:
        return self.base.cdf(s)

    def intensity_targets(self) -> List[Tuple[str, float, float, float]]:
        base = self.base
        a = base.alpha
        return [
            ("left_part", -base.d, 0.0, base.q),
            ("left_half", -base.d / 2.0, 0.0, base.q / 2.0),
            ("pareto_2_4", 2.0 * base.x_m, 4.0 * base.x_m,
             base.c * ((2.0 * base.x_m) ** -a - (4.0 * base.x_m) ** -a)),
            ("pareto_tail_10", 10.0 * base.x_m, math.inf, base.c * (10.0 * base.x_m) ** -a),
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.name, "alpha": self.base.alpha, "x_m": self.base.x_m,
                "d": self.base.d, "Z": self.Z}


def make_brood_law(step_law: StepLaw) -> BroodLaw:
    return BroodLaw(step_law)
