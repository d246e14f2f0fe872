"""The bivariate Gaussian orthant identity.

For standard normals X, Y with correlation rho,

    P(X >= 0, Y < 0) = arccos(rho) / (2 pi),

pinned by the independent case (rho = 0 forces 1/4) and verified here by a
direct Monte Carlo oracle over the construction Y = rho X + sqrt(1-rho^2) Z.
The two-orthant symmetric difference P({X>=0} triangle {Y>=0}) doubles it
to arccos(rho) / pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .reporting import EstimateReport, binomial_stderr
from .rng import derive_rng


@dataclass(frozen=True)
class CorrelatedGaussianPair:
    """Standard normal marginals with E[XY] = rho."""

    rho: float

    def __post_init__(self):
        if abs(self.rho) > 1.0:
            raise ValueError("correlation must lie in [-1, 1]")

    def sample(self, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
        rng = derive_rng(seed, "gaussian-pair")
        x = rng.standard_normal(n)
        z = rng.standard_normal(n)
        y = self.rho * x + math.sqrt(max(0.0, 1.0 - self.rho**2)) * z
        return x, y


def orthant_probability(rho: float) -> float:
    """P(X >= 0, Y < 0) = arccos(rho) / (2 pi)."""
    if abs(rho) > 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    return math.acos(rho) / (2.0 * math.pi)


def orthant_probability_mc(rho: float, n: int, seed: int) -> EstimateReport:
    """Sampling oracle for the orthant probability (frequency of X>=0, Y<0)."""
    if n < 1:
        raise ValueError("need at least one trial")
    x, y = CorrelatedGaussianPair(rho).sample(n, seed)
    p_hat = float(np.count_nonzero((x >= 0.0) & (y < 0.0))) / n
    return EstimateReport(
        quantity=f"orthant[rho={rho}]",
        estimate=p_hat,
        stderr=binomial_stderr(p_hat, n),
        trials=n,
        master_seed=seed,
    )


def symmetric_difference_probability(rho: float) -> float:
    """P({X >= 0} triangle {Y >= 0}) = 2 * orthant = arccos(rho) / pi."""
    if abs(rho) > 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    return math.acos(rho) / math.pi
