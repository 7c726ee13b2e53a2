"""Normalized exponent curves z_n = ln P / (n eps_n^2) along a blocklength grid."""

from __future__ import annotations

import io
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from ..core_math import LogProb, PmfLike, as_pmf, log_chi2_cdf, log_chi2_sf, log_sum_exp
from ..errors import DomainError
from ..exponents import md_exponent_prediction
from ..rd_solver import DEFAULT_OPTIONS, DistortionSpec, DmsProblem, GaussianProblem, SolverOptions, rate_distortion_dms
from .sequences import EpsilonSequence
from .types import DEFAULT_BUDGET, exact_correct_prob_dms, exact_excess_prob_dms

SIDES = ("excess", "correct")
TAILS = ("two-sided", "upper")
CSV_HEADER = "n,eps,logp,z,target"


@dataclass(frozen=True)
class MdRow:
    n: int
    eps: float
    logp: LogProb
    z: float


@dataclass
class MdCurve:
    rows: list[MdRow]
    target: float
    side: str = "excess"
    regime: str = "dms"
    trend_slope: float = math.nan
    notes: list[str] = field(default_factory=list)

    @property
    def ns(self) -> list[int]:
        return [r.n for r in self.rows]

    @property
    def z(self) -> np.ndarray:
        return np.array([r.z for r in self.rows])

    def gaps(self) -> np.ndarray:
        return np.abs(self.z - self.target)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(f"{r.n},{r.eps:.17g},{r.logp:.17g},{r.z:.17g},{self.target:.17g}\n")
        return buf.getvalue()

    def to_record(self) -> dict[str, Any]:
        return {
            "side": self.side,
            "regime": self.regime,
            "target": self.target,
            "trend_slope": self.trend_slope,
            "rows": [{"n": r.n, "eps": r.eps, "logp": r.logp, "z": r.z} for r in self.rows],
        }


def trend_slope(rows: Sequence[MdRow]) -> float:
    """Least-squares slope of z_n against ln n over the last half of the grid."""
    tail = [r for r in rows[len(rows) // 2 :] if math.isfinite(r.z)]
    if len(tail) < 2:
        return math.nan
    return float(np.polyfit(np.log([r.n for r in tail]), [r.z for r in tail], 1)[0])


def _check_grid(ns: Sequence[int]) -> list[int]:
    ns = [int(n) for n in ns]
    if not ns or any(n < 1 for n in ns):
        raise DomainError("blocklength grid must hold positive integers")
    return sorted(set(ns))


def _map(fn: Callable, items: list, executor: Optional[Executor]) -> list:
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


def md_curve_dms(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    eps: EpsilonSequence,
    ns: Sequence[int],
    *,
    side: str = "excess",
    budget: int = DEFAULT_BUDGET,
    options: SolverOptions = DEFAULT_OPTIONS,
    executor: Optional[Executor] = None,
) -> MdCurve:
    """Exact excess (R(type) >= R(P,D) + eps_n) or correct-decoding
    (R(type) <= R(P,D) - eps_n) log-probabilities over a blocklength grid."""
    if side not in SIDES:
        raise DomainError(f"side must be one of {SIDES}, got {side!r}")
    pmf = as_pmf(p)
    target = md_exponent_prediction(DmsProblem(pmf, d, D), options=options)
    base = rate_distortion_dms(pmf, d, D, options=options).rate
    grid = _check_grid(ns)

    def point(n: int) -> MdRow:
        e = eps(n)
        if side == "excess":
            logp = exact_excess_prob_dms(pmf, d, D, n, base + e, budget=budget, options=options)
        else:
            logp = exact_correct_prob_dms(pmf, d, D, n, base - e, budget=budget, options=options)
        return MdRow(n, e, logp, logp / (n * e * e))

    rows = _map(point, grid, executor)
    return MdCurve(rows, target, side, "dms", trend_slope(rows))


def gaussian_tail_logprob(n: int, eps: float, side: str = "excess", tails: str = "two-sided") -> LogProb:
    """Log-probability that the empirical variance of n i.i.d. N(0, sigma^2)
    samples leaves (excess) or falls below (correct) the band [e^{-2 eps}, e^{2 eps}] sigma^2.

    The event is scale free: sum X_i^2 / sigma^2 is chi-square with n degrees of freedom.
    """
    if side not in SIDES:
        raise DomainError(f"side must be one of {SIDES}, got {side!r}")
    if tails not in TAILS:
        raise DomainError(f"tails must be one of {TAILS}, got {tails!r}")
    if n < 1 or not eps > 0:
        raise DomainError(f"need n >= 1 and eps > 0, got n={n}, eps={eps}")
    lower = log_chi2_cdf(n * math.exp(-2.0 * eps), n)
    if side == "correct":
        return lower
    upper = log_chi2_sf(n * math.exp(2.0 * eps), n)
    if tails == "upper":
        return upper
    return log_sum_exp([upper, lower])


def gaussian_tail_curve(
    g: GaussianProblem,
    eps: Union[EpsilonSequence, float],
    ns: Sequence[int],
    *,
    side: str = "excess",
    tails: str = "two-sided",
    executor: Optional[Executor] = None,
) -> MdCurve:
    """Exact chi-square tail curve. ``eps`` may be a constant gap, which gives
    the large-deviation regime for contrast."""
    if not isinstance(g, GaussianProblem):
        raise DomainError("gaussian_tail_curve needs a GaussianProblem")
    grid = _check_grid(ns)
    gap = eps if callable(eps) else (lambda n, c=float(eps): c)

    def point(n: int) -> MdRow:
        e = gap(n)
        logp = gaussian_tail_logprob(n, e, side, tails)
        return MdRow(n, e, logp, logp / (n * e * e))

    rows = _map(point, grid, executor)
    return MdCurve(rows, -1.0, side, "gaussian", trend_slope(rows))
