"""Rayleigh fading with power-law path loss, and SINR evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# near-field clamp; PPP sampling can put nodes arbitrarily close together
MIN_DISTANCE_M = 1e-3


@dataclass(frozen=True)
class LinkGain:
    """Fading power and distance of one transmitter-receiver pair."""

    fading_power: float
    distance_m: float
    pathloss_exponent: float

    def __post_init__(self):
        if self.fading_power < 0:
            raise ValueError("fading_power must be non-negative")
        if not self.distance_m > 0:
            raise ValueError("distance_m must be positive")

    @property
    def value(self) -> float:
        d = max(self.distance_m, MIN_DISTANCE_M)
        return self.fading_power * d ** (-self.pathloss_exponent)


@dataclass(frozen=True)
class InterferenceTerm:
    tx_power_w: float
    gain: LinkGain

    def __post_init__(self):
        if self.tx_power_w < 0:
            raise ValueError("tx_power_w must be non-negative")


def sample_fading(rng: np.random.Generator, size=None):
    """Unit-mean exponential power gain(s) of a Rayleigh channel."""
    return rng.exponential(1.0, size=size)


def path_gain(fading, distance, alpha: float) -> np.ndarray:
    """Vectorized ``fading * max(d, MIN_DISTANCE_M)**-alpha``."""
    d = np.maximum(np.asarray(distance, dtype=float), MIN_DISTANCE_M)
    return np.asarray(fading, dtype=float) * d ** (-alpha)


def received_power(p_w: float, g: LinkGain) -> float:
    if p_w < 0:
        raise ValueError("transmit power must be non-negative")
    return p_w * g.value


def sinr(signal: InterferenceTerm, interferers: Sequence[InterferenceTerm],
         noise_w: float) -> float:
    """Signal power over the sum of interference powers plus noise.

    Raises
    ------
    ZeroDivisionError
        If the denominator is zero (no noise and no interfering power).
    """
    if noise_w < 0:
        raise ValueError("noise_w must be non-negative")
    denom = sum(received_power(t.tx_power_w, t.gain) for t in interferers) + noise_w
    if denom <= 0:
        raise ZeroDivisionError("SINR denominator is zero")
    return received_power(signal.tx_power_w, signal.gain) / denom
