"""Probability that two Poisson request streams overlap within a waiting window.

Rates are requests per hour throughout the package; the waiting window is
stored in minutes and converted to hours here, in one place, so that
rate x time products in the exponentials are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WaitWindow:
    """Maximum waiting time between two requests for pooling, in minutes."""

    t_bar: float

    def __post_init__(self):
        if not (self.t_bar > 0 and math.isfinite(self.t_bar)):
            raise ValueError(f"t_bar must be positive and finite, got {self.t_bar}")

    @property
    def hours(self) -> float:
        return self.t_bar / 60.0


def pair_probability(alpha_m: float, alpha_n: float, w: WaitWindow) -> float:
    """Probability that two independent Poisson streams with rates
    alpha_m, alpha_n (per hour) each produce an occurrence within the
    window of one another.

    Closed form: 1 - (a*exp(-b*t) + b*exp(-a*t)) / (a + b) with t the
    window in hours. Returns the continuous limit 0 when a + b == 0
    (depleted streams feed zero rates here).
    """
    if alpha_m < 0 or alpha_n < 0:
        raise ValueError(f"rates must be nonnegative, got ({alpha_m}, {alpha_n})")
    total = alpha_m + alpha_n
    if total == 0.0:
        return 0.0
    t = w.hours
    p = 1.0 - (alpha_m * math.exp(-alpha_n * t) + alpha_n * math.exp(-alpha_m * t)) / total
    # exact formula stays in [0, 1]; clip float dust
    return min(1.0, max(0.0, p))


def pair_probability_mc(
    alpha_m: float,
    alpha_n: float,
    w: WaitWindow,
    samples: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of the overlap probability, with standard error.

    Draws first-arrival times T_m ~ Exp(alpha_m), T_n ~ Exp(alpha_n) and
    estimates P(|T_m - T_n| <= t_bar). Deterministic for a given seed.
    """
    if alpha_m <= 0 or alpha_n <= 0:
        raise ValueError(f"rates must be positive, got ({alpha_m}, {alpha_n})")
    if samples <= 0:
        raise ValueError(f"samples must be positive, got {samples}")
    rng = np.random.default_rng(seed)
    t = w.hours
    hits = 0
    remaining = samples
    chunk = 1_000_000
    while remaining > 0:
        k = min(chunk, remaining)
        tm = rng.exponential(1.0 / alpha_m, size=k)
        tn = rng.exponential(1.0 / alpha_n, size=k)
        hits += int(np.count_nonzero(np.abs(tm - tn) <= t))
        remaining -= k
    p = hits / samples
    std_error = math.sqrt(p * (1.0 - p) / samples)
    return p, std_error
