"""Finite-blocklength achievability bounds from the direct parts of the
moderate-deviation theorems, and the exact error probability of the
type-covering code they describe.

The Berger covering constant J(|X|, |X_hat|) is not pinned down by the
covering lemma; the default |X| |X_hat| + 2 is a placeholder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core_math import LogProb, PmfLike, _log1pmx, as_pmf, log_sum_exp
from ..dispersion import dispersion_dms
from ..errors import BoundVacuous, DomainError
from ..exponents import marton_exponent_dms
from ..rd_solver import DEFAULT_OPTIONS, DistortionSpec, GaussianProblem, SolverOptions, rate_distortion_dms, rate_distortion_gaussian
from .types import DEFAULT_BUDGET, excess_mask, type_table


def default_J(d: DistortionSpec) -> float:
    k, k_hat = d.shape
    return float(k * k_hat + 2)


def effective_gap_dms(n: int, eps_n: float, k: int, J: float) -> float:
    """eps_n - J ln n / n - |X| ln(n+1) / n."""
    return eps_n - J * math.log(n) / n - k * math.log(n + 1) / n


@dataclass(frozen=True)
class DmsBound:
    logp: LogProb
    effective_gap: float
    type_term: LogProb
    l1_term: LogProb
    dispersion: float


def _dms_bound(p, d, D, n, eps_n, J, options) -> DmsBound:
    pw = np.asarray(as_pmf(p).weights)
    if n < 1 or not eps_n > 0:
        raise DomainError(f"need n >= 1 and eps_n > 0, got n={n}, eps_n={eps_n}")
    J = default_J(d) if J is None else float(J)
    k = pw.size
    gap = effective_gap_dms(n, eps_n, k, J)
    if gap <= 0:
        raise BoundVacuous("log-factor overhead exceeds the rate gap", n=n, eps=eps_n, effective_gap=gap)
    v = dispersion_dms(pw, d, D, options=options).value
    base = rate_distortion_dms(pw, d, D, options=options).rate
    f = marton_exponent_dms(pw, d, D, base + gap, options=options)
    type_term = k * math.log(n + 1) - n * f.value if f.feasible else -math.inf
    l1_term = k * math.log(2.0) - n * eps_n**2 / (2.0 * v)
    return DmsBound(log_sum_exp([type_term, l1_term]), gap, type_term, l1_term, v)


def achievability_bound_dms(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    n: int,
    eps_n: float,
    J: Optional[float] = None,
    side: str = "excess",
    *,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> LogProb:
    """ln[(n+1)^|X| e^{-n F(P, R(P,D) + eps', D)} + 2^|X| e^{-n eps_n^2 / (2V)}].

    An upper bound on the excess-distortion probability of the code that
    D-covers every type with R(Q,D) < R(P,D) + eps' and ||Q - P||_1 <= eps_n / sqrt(V).
    Only the excess side has such a bound.
    """
    if side != "excess":
        raise DomainError(f"only the excess side has an achievability bound, got {side!r}")
    bound = _dms_bound(p, d, D, n, eps_n, J, options)
    if bound.logp > 0:
        raise BoundVacuous("bound exceeds one", n=n, eps=eps_n, logp=bound.logp)
    return bound.logp


def exact_code_error_prob_dms(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    n: int,
    eps_n: float,
    J: Optional[float] = None,
    *,
    budget: int = DEFAULT_BUDGET,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> LogProb:
    """Exact ln P(type of X^n falls outside the covered set), i.e. of
    R(Q,D) >= R(P,D) + eps' or ||Q - P||_1 > eps_n / sqrt(V)."""
    pw = np.asarray(as_pmf(p).weights)
    J = default_J(d) if J is None else float(J)
    gap = effective_gap_dms(n, eps_n, pw.size, J)
    v = dispersion_dms(pw, d, D, options=options).value
    base = rate_distortion_dms(pw, d, D, options=options).rate
    table = type_table(pw, d, D, n, budget=budget, options=options)
    outside = excess_mask(table.rate, base + gap) | (table.l1_distance(pw) > eps_n / math.sqrt(v))
    return log_sum_exp(table.logprob[outside])


def effective_gap_gaussian(n: int, eps_n: float) -> float:
    """eps_n - 5 ln n / (2n) - ln 6 / n."""
    return eps_n - 2.5 * math.log(n) / n - math.log(6.0) / n


def gaussian_achievability_bound(g: GaussianProblem, n: int, eps_n: float) -> tuple[LogProb, float]:
    """(ln 4 - (n/2)(e^{2 eps'} - 1 - 2 eps'), ln[6 n^{5/2} (sigma^2 e^{2 eps'} / D)^{n/2}]).

    The error term bounds the two-sided empirical-variance deviation at eps'.
    It applies the upper-tail Chernoff rate to both tails; the lower tail
    actually decays more slowly, so the bound can fail once n eps'^3 is large
    (fixed-gap regime) and is only relied upon along moderate-deviation sequences.
    """
    if n < 1 or not eps_n > 0:
        raise DomainError(f"need n >= 1 and eps_n > 0, got n={n}, eps_n={eps_n}")
    gap = effective_gap_gaussian(n, eps_n)
    if gap <= 0:
        raise BoundVacuous("log-factor overhead exceeds the rate gap", n=n, eps=eps_n, effective_gap=gap)
    # e^{2g} - 1 - 2g = u - log1p(u) with u = e^{2g} - 1
    u = math.expm1(2.0 * gap)
    rate_fn = -_log1pmx(u)
    logp = math.log(4.0) - 0.5 * n * rate_fn
    log_size = math.log(6.0) + 2.5 * math.log(n) + 0.5 * n * (math.log(g.variance / g.distortion) + 2.0 * gap)
    if log_size / n > rate_distortion_gaussian(g) + eps_n + 1e-12 and g.variance > g.distortion:
        raise BoundVacuous("codebook exceeds the rate budget", n=n, log_size=log_size)
    if logp > 0:
        raise BoundVacuous("bound exceeds one", n=n, eps=eps_n, logp=logp)
    return logp, log_size
