"""Dispersion of lossy source coding: the variance, under the source law, of the
per-symbol derivative of R(P, D) with respect to P."""

from __future__ import annotations

import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core_math import PmfLike, as_pmf
from .errors import CrossCheckMismatch, DomainError, StepTooLarge
from .rd_solver import (
    DEFAULT_OPTIONS,
    DistortionSpec,
    RdSolution,
    SolverOptions,
    max_useful_distortion,
    rate_distortion_dms,
    tilted_information,
)

DEGENERATE_BELOW = 1e-10
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DerivativeVector:
    """Directional derivatives of R(., D) along e_x - P, one per source symbol.

    These equal the partial derivatives up to a common additive constant,
    which a variance ignores. ``centered`` records whether the P-mean has
    been subtracted.
    """

    values: np.ndarray
    method: str
    step: float
    centered: bool = False
    support_changed: bool = False

    def centered_values(self, p: PmfLike) -> np.ndarray:
        w = np.asarray(as_pmf(p).weights)
        return self.values - float(w @ self.values)


@dataclass(frozen=True)
class DispersionResult:
    value: float
    tilted_value: float
    derivative: DerivativeVector
    degenerate: bool

    def __float__(self) -> float:
        return self.value


def weighted_variance(p: PmfLike, values: np.ndarray) -> float:
    w = np.asarray(as_pmf(p).weights)
    v = np.asarray(values, dtype=float)
    mean = math.fsum((w * v).tolist())
    return math.fsum((w * (v - mean) ** 2).tolist())


def _central_difference(pw, d, D, step, base, options):
    k = pw.size
    out = np.empty(k)
    changed = False
    for x in range(k):
        direction = -pw.copy()
        direction[x] += 1.0
        plus = pw + step * direction
        minus = pw - step * direction
        if np.any(minus < 0) or np.any(plus < 0):
            raise StepTooLarge(f"step {step} leaves the simplex along symbol {x}")
        sp = rate_distortion_dms(plus, d, D, options=options, warm=base)
        sm = rate_distortion_dms(minus, d, D, options=options, warm=base)
        if sp.zero_rate or sm.zero_rate or sp.pruned != base.pruned or sm.pruned != base.pruned:
            changed = True
        out[x] = (sp.rate - sm.rate) / (2.0 * step)
    return out, changed


def rd_derivative(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    step: float = 1e-4,
    *,
    richardson: bool = True,
    options: SolverOptions = DEFAULT_OPTIONS,
    executor: Optional[Executor] = None,
) -> DerivativeVector:
    """Central differences of R along e_x - P, with one Richardson level by default."""
    pw = np.asarray(as_pmf(p).weights, dtype=float)
    if not 0 < step < 0.1:
        raise DomainError(f"step must lie in (0, 0.1), got {step}")
    if np.any(pw <= 0):
        raise DomainError("finite differences need a strictly positive source law")
    d_cap = max_useful_distortion(pw, d)
    if not 0 < D < d_cap:
        raise DomainError(f"need 0 < D < D_max = {d_cap}, got {D}")
    base = rate_distortion_dms(pw, d, D, options=options)
    steps = (step, step / 2.0) if richardson else (step,)
    if executor is not None:
        futures = [executor.submit(_central_difference, pw, d, D, h, base, options) for h in steps]
        results = [f.result() for f in futures]
    else:
        results = [_central_difference(pw, d, D, h, base, options) for h in steps]
    changed = any(flag for _, flag in results)
    if richardson:
        coarse, fine = results[0][0], results[1][0]
        values = (4.0 * fine - coarse) / 3.0
    else:
        values = results[0][0]
    return DerivativeVector(values=values, method="finite-difference", step=step, support_changed=changed)


def tilted_derivative(
    p: PmfLike, d: DistortionSpec, D: float, *, solution: Optional[RdSolution] = None, options: SolverOptions = DEFAULT_OPTIONS
) -> DerivativeVector:
    j, _ = tilted_information(p, d, D, solution=solution, options=options)
    return DerivativeVector(values=j, method="tilted", step=0.0)


def dispersion_dms(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    step: float = 1e-4,
    *,
    options: SolverOptions = DEFAULT_OPTIONS,
    executor: Optional[Executor] = None,
) -> DispersionResult:
    """V(P, D) from finite differences, cross-checked against Var_P of the tilted information.

    Raises CrossCheckMismatch when the two disagree by more than
    max(1e-4, 1% relative), which signals that R(., D) is not smooth at P.
    """
    deriv = rd_derivative(p, d, D, step, options=options, executor=executor)
    v_fd = weighted_variance(p, deriv.values)
    v_tilt = weighted_variance(p, tilted_derivative(p, d, D, options=options).values)
    if abs(v_fd - v_tilt) > max(1e-4, 0.01 * max(abs(v_fd), abs(v_tilt))):
        raise CrossCheckMismatch(
            "finite-difference and tilted-information dispersions disagree",
            finite_difference=v_fd,
            tilted=v_tilt,
            support_changed=deriv.support_changed,
        )
    return DispersionResult(value=v_fd, tilted_value=v_tilt, derivative=deriv, degenerate=v_fd < DEGENERATE_BELOW)


def dispersion_binary_hamming(alpha: float) -> float:
    """alpha (1 - alpha) ln^2((1 - alpha) / alpha); the same for every D below min(alpha, 1 - alpha)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha * (1.0 - alpha) * math.log((1.0 - alpha) / alpha) ** 2


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    e = a + GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    while b - a > tol:
        if fc > fe:
            b, e, fe = e, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + GOLDEN * (b - a)
            fe = f(e)
    return 0.5 * (a + b)


def max_dispersion_bernoulli() -> tuple[float, float]:
    """Bernoulli parameter in (0, 1/2) with the largest binary-Hamming dispersion."""
    alpha = golden_section_max(dispersion_binary_hamming, 1e-9, 0.5 - 1e-9)
    return alpha, dispersion_binary_hamming(alpha)


def dispersion_gaussian() -> float:
    return 0.5
