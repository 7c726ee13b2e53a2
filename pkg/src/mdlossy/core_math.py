"""Numerical primitives: probability vectors, divergences, log-domain sums and
log-domain regularized incomplete gamma functions.

Everything is in nats. ``0 ln 0`` is taken to be 0 and ``-inf`` is a legal
log-probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .errors import AbsoluteContinuityViolation, DimensionMismatch, DomainError

LogProb = float  # natural-log probability, <= 0 or -inf

_NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector over a finite alphabet.

    Weights are normalized on construction; negative, non-finite or all-zero
    inputs are rejected. The stored array is read-only.
    """

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        if w.size < 1:
            raise DomainError("a pmf needs at least one symbol")
        if not np.all(np.isfinite(w)):
            raise DomainError("pmf weights must be finite")
        if np.any(w < 0):
            raise DomainError(f"pmf weights must be nonnegative, got {w.tolist()}")
        total = w.sum()
        if total <= 0:
            raise DomainError("pmf weights sum to zero")
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def bernoulli(cls, alpha: float) -> "Pmf":
        """Law of a binary symbol equal to 1 with probability ``alpha``."""
        if not 0.0 <= alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
        return cls(np.array([1.0 - alpha, alpha]))

    @classmethod
    def uniform(cls, k: int) -> "Pmf":
        return cls(np.full(int(k), 1.0 / int(k)))

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0

    def __len__(self) -> int:
        return self.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.size == other.size and bool(np.all(self.weights == other.weights))

    def __hash__(self) -> int:
        return hash(self.weights.tobytes())

    def __repr__(self) -> str:
        return f"Pmf({np.array2string(self.weights, precision=6)})"


PmfLike = Union[Pmf, Sequence[float], np.ndarray]


def as_pmf(p: PmfLike) -> Pmf:
    return p if isinstance(p, Pmf) else Pmf(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class NType:
    """An n-type: nonnegative integer counts summing to the blocklength."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 1:
            raise DomainError("a type needs at least one symbol")
        if any(c < 0 for c in counts):
            raise DomainError(f"type counts must be nonnegative, got {counts}")
        if sum(counts) < 1:
            raise DomainError("type counts must sum to a positive blocklength")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    def as_pmf(self) -> Pmf:
        return Pmf(np.array(self.counts, dtype=float) / self.n)

    def log_class_size(self) -> float:
        """ln |T_Q^n|, the log multinomial coefficient."""
        return log_multinomial(self.counts)


def _check_pair(q: PmfLike, p: PmfLike) -> tuple[np.ndarray, np.ndarray]:
    qw = np.asarray(as_pmf(q).weights)
    pw = np.asarray(as_pmf(p).weights)
    if qw.shape != pw.shape:
        raise DimensionMismatch(f"alphabet sizes differ: {qw.size} vs {pw.size}")
    return qw, pw


def kl_divergence(q: PmfLike, p: PmfLike) -> float:
    """D(q||p) in nats."""
    qw, pw = _check_pair(q, p)
    mask = qw > 0
    if np.any(pw[mask] == 0):
        bad = np.flatnonzero(mask & (pw == 0)).tolist()
        raise AbsoluteContinuityViolation(f"q puts mass on symbols {bad} where p vanishes")
    terms = qw[mask] * np.log(qw[mask] / pw[mask])
    return max(0.0, math.fsum(terms.tolist()))


def entropy(p: PmfLike) -> float:
    w = np.asarray(as_pmf(p).weights)
    w = w[w > 0]
    return math.fsum((-w * np.log(w)).tolist())


def binary_entropy(a: float) -> float:
    """h(a) = -a ln a - (1-a) ln(1-a)."""
    if not 0.0 <= a <= 1.0 or math.isnan(a):
        raise DomainError(f"binary_entropy needs a in [0, 1], got {a}")
    out = 0.0
    if a > 0:
        out -= a * math.log(a)
    if a < 1:
        out -= (1.0 - a) * math.log1p(-a)
    return out


def inverse_binary_entropy(h: float) -> float:
    """The root of binary_entropy(a) = h on the lower branch [0, 1/2]."""
    ln2 = math.log(2.0)
    if not 0.0 <= h <= ln2 + 1e-15:
        raise DomainError(f"inverse_binary_entropy needs h in [0, ln 2], got {h}")
    if h == 0.0:
        return 0.0
    if h >= ln2:
        return 0.5
    return brentq(lambda a: binary_entropy(a) - h, 0.0, 0.5, xtol=1e-16, rtol=4 * np.finfo(float).eps)


def log_sum_exp(values: Iterable[float]) -> float:
    """ln sum(exp(v)), independent of input order.

    Values are sorted and the shifted exponentials summed with ``math.fsum``
    (exactly rounded), so every permutation gives the same bits.
    """
    vals = sorted(float(v) for v in values)
    if not vals:
        return -math.inf
    top = vals[-1]
    if top == -math.inf:
        return -math.inf
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


def log_multinomial(counts: Sequence[int]) -> float:
    n = sum(counts)
    return math.lgamma(n + 1) - math.fsum(math.lgamma(c + 1) for c in counts)


# --- incomplete gamma -------------------------------------------------------

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _log1pmx(u: float) -> float:
    """ln(1+u) - u, accurate for small |u|."""
    if abs(u) > 0.25:
        return math.log1p(u) - u
    # alternating series -u^2/2 + u^3/3 - ...
    total = 0.0
    power = u * u
    k = 2
    while True:
        term = power / k
        total += -term if k % 2 == 0 else term
        if abs(term) <= 1e-17 * abs(total):
            return total
        power *= u
        k += 1


def _log_gamma_prefactor(s: float, x: float) -> float:
    """ln(x^s e^-x / Gamma(s)) without catastrophic cancellation for large s."""
    if s < 10.0 or abs(x / s - 1.0) > 0.5:
        return s * math.log(x) - x - math.lgamma(s)
    # s ln s - s - lgamma(s) via the Stirling series, plus s*(ln(x/s) - (x/s - 1))
    inv = 1.0 / s
    inv2 = inv * inv
    stirling = inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 / 1680)))
    base = 0.5 * math.log(s) - _HALF_LOG_2PI - stirling
    return base + s * _log1pmx(x / s - 1.0)


def _max_terms(s: float, x: float) -> int:
    return int(100 + 20 * math.sqrt(max(s, x)))


def _log_lower_series(s: float, x: float) -> float:
    # P(s,x) = x^s e^-x / Gamma(s+1) * sum_k x^k / ((s+1)...(s+k))
    term = 1.0
    total = 1.0
    k = 0
    cap = _max_terms(s, x)
    while True:
        k += 1
        term *= x / (s + k)
        total += term
        if term < 1e-17 * total:
            break
        if k > cap:
            raise ArithmeticError(f"incomplete gamma series did not converge (s={s}, x={x})")
    return _log_gamma_prefactor(s, x) - math.log(s) + math.log(total)


def _log_upper_fraction(s: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Gamma(s,x)
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    cap = _max_terms(s, x)
    for i in range(1, cap + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return _log_gamma_prefactor(s, x) + math.log(h)
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (s={s}, x={x})")


def _log1mexp(a: float) -> float:
    """ln(1 - e^a) for a <= 0."""
    if a == -math.inf:
        return 0.0
    if a > -math.log(2.0):
        return math.log(-math.expm1(a))
    return math.log1p(-math.exp(a))


def _check_gamma_args(s: float, x: float) -> None:
    if not (s > 0 and math.isfinite(s)):
        raise DomainError(f"shape must be positive and finite, got {s}")
    if not (x >= 0):
        raise DomainError(f"point must be nonnegative, got {x}")


def log_regularized_gamma_lower(s: float, x: float) -> float:
    """ln P(s, x) = ln(gamma(s, x) / Gamma(s))."""
    _check_gamma_args(s, x)
    if x == 0:
        return -math.inf
    if x == math.inf:
        return 0.0
    if x < s + 1.0:
        return min(0.0, _log_lower_series(s, x))
    return _log1mexp(min(0.0, _log_upper_fraction(s, x)))


def log_regularized_gamma_upper(s: float, x: float) -> float:
    """ln Q(s, x) = ln(Gamma(s, x) / Gamma(s)); stays finite deep in the tail."""
    _check_gamma_args(s, x)
    if x == 0:
        return 0.0
    if x == math.inf:
        return -math.inf
    if x < s + 1.0:
        return _log1mexp(min(0.0, _log_lower_series(s, x)))
    return min(0.0, _log_upper_fraction(s, x))


def log_chi2_sf(x: float, dof: float) -> float:
    """ln P(chi2_dof >= x)."""
    return log_regularized_gamma_upper(0.5 * dof, 0.5 * max(x, 0.0))


def log_chi2_cdf(x: float, dof: float) -> float:
    """ln P(chi2_dof <= x)."""
    return log_regularized_gamma_lower(0.5 * dof, 0.5 * max(x, 0.0))
