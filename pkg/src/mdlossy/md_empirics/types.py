"""Exact evaluation of type-class events by exhaustive enumeration of n-types.

Each n-type Q carries ln P^n(T_Q) (log multinomial plus sum of counts ln p)
and R(Q, D). Both are tabulated once per (p, d, D, n) and cached.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from ..core_math import LogProb, PmfLike, as_pmf, log_sum_exp
from ..errors import BudgetExceeded, DomainError, NoFeasibleType
from ..exponents import marton_exponent_dms
from ..rd_solver import DEFAULT_OPTIONS, DistortionSpec, SolverOptions, rate_distortion_dms

DEFAULT_BUDGET = 10_000_000
TIE_TOL = 1e-12
CHUNK = 256  # types per warm-started solver chain; fixed so results never depend on worker count
_CACHE_SIZE = 32


def type_count(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def enumerate_types(n: int, k: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """All count vectors of length k summing to n, in colexicographic order."""
    if n < 1 or k < 1:
        raise DomainError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    total = type_count(n, k)
    if total > budget:
        raise BudgetExceeded(f"{total} types exceed the enumeration budget", types=total, budget=budget)

    def build(m: int, width: int) -> np.ndarray:
        # rows sum to m; last column is the slowest-varying
        if width == 2:
            last = np.arange(m + 1, dtype=np.int64)
            return np.column_stack([m - last, last])
        blocks = []
        for last in range(m + 1):
            head = build(m - last, width - 1)
            blocks.append(np.hstack([head, np.full((head.shape[0], 1), last, dtype=np.int64)]))
        return np.vstack(blocks)

    if k == 1:
        return np.array([[n]], dtype=np.int64)
    return build(n, k)


@dataclass(frozen=True)
class TypeTable:
    n: int
    counts: np.ndarray
    logprob: np.ndarray
    rate: np.ndarray

    def kl(self, p: PmfLike) -> np.ndarray:
        """D(Q||P) for every type (inf where Q is not dominated by P)."""
        pw = np.asarray(as_pmf(p).weights)
        q = self.counts / self.n
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(q > 0, q * (np.log(q) - np.log(pw)), 0.0)
        return terms.sum(axis=1)

    def l1_distance(self, p: PmfLike) -> np.ndarray:
        pw = np.asarray(as_pmf(p).weights)
        return np.abs(self.counts / self.n - pw).sum(axis=1)


def type_logprobs(p: PmfLike, counts: np.ndarray) -> np.ndarray:
    pw = np.asarray(as_pmf(p).weights)
    n = int(counts[0].sum())
    with np.errstate(divide="ignore"):
        logp = np.log(pw)
    weighted = np.where(counts > 0, counts * logp, 0.0).sum(axis=1)
    return gammaln(n + 1) - gammaln(counts + 1).sum(axis=1) + weighted


def _chunk_rates(counts: np.ndarray, d: DistortionSpec, D: float, options: SolverOptions) -> np.ndarray:
    out = np.empty(counts.shape[0])
    n = float(counts[0].sum())
    warm = None
    for i, row in enumerate(counts):
        sol = rate_distortion_dms(row / n, d, D, options=options, warm=warm)
        out[i] = sol.rate
        if not sol.zero_rate:
            warm = sol
    return out


_cache: "OrderedDict[tuple, TypeTable]" = OrderedDict()
_cache_lock = threading.Lock()


def clear_type_cache() -> None:
    with _cache_lock:
        _cache.clear()


def type_table(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    n: int,
    *,
    budget: int = DEFAULT_BUDGET,
    options: SolverOptions = DEFAULT_OPTIONS,
    executor: Optional[Executor] = None,
) -> TypeTable:
    pw = np.asarray(as_pmf(p).weights)
    if pw.size != d.shape[0]:
        raise DomainError(f"source alphabet {pw.size} does not match distortion rows {d.shape[0]}")
    key = (pw.tobytes(), d.table.tobytes(), d.shape, float(D), int(n), options)
    with _cache_lock:
        hit = _cache.get(key)
        if hit is not None:
            _cache.move_to_end(key)
            return hit
    counts = enumerate_types(int(n), pw.size, budget)
    chunks = [counts[i : i + CHUNK] for i in range(0, counts.shape[0], CHUNK)]
    if executor is not None and len(chunks) > 1:
        parts = list(executor.map(_chunk_rates, chunks, [d] * len(chunks), [D] * len(chunks), [options] * len(chunks)))
    else:
        parts = [_chunk_rates(c, d, D, options) for c in chunks]
    table = TypeTable(int(n), counts, type_logprobs(pw, counts), np.concatenate(parts))
    for arr in (table.counts, table.logprob, table.rate):
        arr.setflags(write=False)
    with _cache_lock:
        _cache[key] = table
        while len(_cache) > _CACHE_SIZE:
            _cache.popitem(last=False)
    return table


def excess_mask(rate: np.ndarray, threshold: float, inclusive: bool = True) -> np.ndarray:
    if inclusive:
        return rate >= threshold - TIE_TOL
    return rate > threshold + TIE_TOL


def correct_mask(rate: np.ndarray, threshold: float, inclusive: bool = True) -> np.ndarray:
    if inclusive:
        return rate <= threshold + TIE_TOL
    return rate < threshold - TIE_TOL


def total_log_mass(p: PmfLike, n: int, budget: int = DEFAULT_BUDGET) -> LogProb:
    """ln of the sum of P^n(T_Q) over every n-type; 0 up to rounding."""
    return log_sum_exp(type_logprobs(p, enumerate_types(n, as_pmf(p).size, budget)))


def exact_excess_prob_dms(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    n: int,
    threshold: float,
    *,
    inclusive: bool = True,
    budget: int = DEFAULT_BUDGET,
    options: SolverOptions = DEFAULT_OPTIONS,
    executor: Optional[Executor] = None,
) -> LogProb:
    """ln P(R(type of X^n, D) >= threshold); boundary types count when ``inclusive``."""
    table = type_table(p, d, D, n, budget=budget, options=options, executor=executor)
    return log_sum_exp(table.logprob[excess_mask(table.rate, threshold, inclusive)])


def exact_correct_prob_dms(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    n: int,
    threshold: float,
    *,
    inclusive: bool = True,
    budget: int = DEFAULT_BUDGET,
    options: SolverOptions = DEFAULT_OPTIONS,
    executor: Optional[Executor] = None,
) -> LogProb:
    """ln P(R(type of X^n, D) <= threshold)."""
    table = type_table(p, d, D, n, budget=budget, options=options, executor=executor)
    return log_sum_exp(table.logprob[correct_mask(table.rate, threshold, inclusive)])


def lemma2_ratio(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    epsprime: float,
    n: int,
    *,
    budget: int = DEFAULT_BUDGET,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """min over n-types with R(Q,D) >= R(P,D) + eps' of D(Q||P), divided by F(P, R(P,D) + eps', D)."""
    if epsprime <= 0:
        raise DomainError(f"rate gap must be positive, got {epsprime}")
    pw = np.asarray(as_pmf(p).weights)
    target = rate_distortion_dms(pw, d, D, options=options).rate + epsprime
    table = type_table(pw, d, D, n, budget=budget, options=options)
    mask = excess_mask(table.rate, target)
    kl = table.kl(pw)[mask]
    kl = kl[np.isfinite(kl)]
    if kl.size == 0:
        raise NoFeasibleType("no n-type reaches the rate threshold", n=n, threshold=target)
    exponent = marton_exponent_dms(pw, d, D, target, options=options)
    if not exponent.feasible:
        raise NoFeasibleType("rate threshold exceeds every achievable R(Q, D)", threshold=target)
    return float(kl.min()) / exponent.value
