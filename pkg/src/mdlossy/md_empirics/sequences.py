"""Moderate-deviation rate-gap sequences eps_n = c n^{-t} and blocklength grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, InvalidExponent, InvalidScale

REGIMES = ("dms", "gaussian")


@dataclass(frozen=True)
class EpsilonSequence:
    """eps_n = c n^{-t} with 0 < t < 1/2, so eps_n -> 0 while n eps_n^2 / log n -> inf."""

    c: float
    t: float
    regime: str = "dms"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c > 0):
            raise InvalidScale(f"scale c must be positive, got {self.c}")
        if not (0.0 < self.t < 0.5):
            raise InvalidExponent(f"exponent t must lie strictly inside (0, 1/2), got {self.t}")
        if self.regime not in REGIMES:
            raise DomainError(f"regime must be one of {REGIMES}, got {self.regime!r}")

    def __call__(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"blocklength must be >= 1, got {n}")
        return self.c * float(n) ** (-self.t)

    def normalizer(self, n: int) -> float:
        """n eps_n^2."""
        return n * self(n) ** 2


def make_epsilon(c: float, t: float, regime: str = "dms") -> EpsilonSequence:
    return EpsilonSequence(float(c), float(t), regime)


def log_grid(start: int, stop: int, count: int = 12) -> list[int]:
    """``count`` log-spaced integers from start to stop inclusive, deduplicated."""
    start, stop = int(round(start)), int(round(stop))
    if start < 1 or stop < start:
        raise DomainError(f"need 1 <= start <= stop, got {start}:{stop}")
    if count < 1:
        raise DomainError("grid needs at least one point")
    pts = np.rint(np.geomspace(start, stop, count)).astype(int)
    return sorted(set(int(v) for v in pts))
