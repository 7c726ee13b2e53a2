"""Large-deviation exponents of lossy source coding and their quadratic behaviour
near the rate-distortion function.

Excess-distortion exponent (discrete source)::

    F(P, R, D) = min { D(Q||P) : R(Q, D) >= R }

Correct-decoding exponent::

    G(P, R, D) = min { D(Q||P) : R(Q, D) <= R }

Both are computed as KL projections. For a multiplier ``mu`` the Lagrangian
``D(Q||P) -/+ mu R(Q, D)`` is minimized by entropic mirror descent, using the
d-tilted information at Q as the gradient of R(., D); the multiplier is then
root-found so that the rate constraint is tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .core_math import PmfLike, _log1pmx, as_pmf, kl_divergence
from .dispersion import dispersion_dms, dispersion_gaussian
from .errors import DegenerateDispersion, DomainError, InfeasibleRate, NonConvergence
from .rd_solver import (
    DEFAULT_OPTIONS,
    DistortionSpec,
    DmsProblem,
    GaussianProblem,
    RdSolution,
    SolverOptions,
    rate_distortion_dms,
    rate_distortion_gaussian,
    tilted_information,
)

RATE_TOL = 1e-6
MULTIMODAL_TOL = 1e-6
N_STARTS = 8
MU_CAP = 1e4

Problem = Union[DmsProblem, GaussianProblem]


@dataclass
class ExponentResult:
    value: float
    minimizer: Any  # Pmf weights (discrete) or threshold variance ratio (Gaussian)
    active: bool
    multiplier: float
    converged: bool
    feasible: bool = True
    rate_at_minimizer: float = math.nan
    multimodal: bool = False
    starts: list[float] = field(default_factory=list)

    def to_record(self) -> dict[str, Any]:
        minimizer = self.minimizer
        if isinstance(minimizer, np.ndarray):
            minimizer = [float(v) for v in minimizer]
        return {
            "value": self.value if self.feasible else None,
            "feasible": self.feasible,
            "active": self.active,
            "multiplier": self.multiplier,
            "converged": self.converged,
            "multimodal": self.multimodal,
            "rate_at_minimizer": self.rate_at_minimizer,
            "minimizer": minimizer,
        }


# --- discrete sources ---------------------------------------------------------


class _Lagrangian:
    """D(Q||P) + sign * mu * R(Q, D) restricted to the support of P."""

    def __init__(self, pw: np.ndarray, d: DistortionSpec, D: float, sign: float, options: SolverOptions) -> None:
        self.support = pw > 0
        self.logp = np.log(pw[self.support])
        self.d = d
        self.D = D
        self.sign = sign
        self.options = options
        self.n = pw.size

    def full(self, qs: np.ndarray) -> np.ndarray:
        q = np.zeros(self.n)
        q[self.support] = qs
        return q

    def evaluate(self, logq: np.ndarray, warm: Optional[RdSolution]):
        qs = np.exp(logq)
        q = self.full(qs)
        sol = rate_distortion_dms(q, self.d, self.D, options=self.options, warm=warm)
        kl = float(np.sum(qs * (logq - self.logp)))
        return q, sol, max(kl, 0.0)

    def gradient(self, q: np.ndarray, sol: RdSolution) -> np.ndarray:
        if sol.zero_rate:
            return np.zeros(int(self.support.sum()))
        j, _ = tilted_information(q, self.d, self.D, solution=sol, options=self.options)
        return j[self.support]

    def minimize(self, mu: float, logq0: np.ndarray, warm: Optional[RdSolution] = None, tol: float = 1e-11, max_iter: int = 3000):
        logq = logq0 - _lse(logq0)
        q, sol, kl = self.evaluate(logq, warm)
        obj = kl + self.sign * mu * sol.rate
        eta = 1.0 / (1.0 + mu)
        for _ in range(max_iter):
            grad = (logq - self.logp) + self.sign * mu * self.gradient(q, sol)
            moved = False
            for _ in range(60):
                cand = logq - eta * grad
                cand -= _lse(cand)
                q_new, sol_new, kl_new = self.evaluate(cand, sol if not sol.zero_rate else warm)
                obj_new = kl_new + self.sign * mu * sol_new.rate
                if obj_new <= obj + 1e-15 * max(1.0, abs(obj)):
                    moved = True
                    break
                eta *= 0.5
            if not moved:
                return logq, q, sol, kl, True
            change = float(np.max(np.abs(cand - logq)))
            logq, q, sol, kl, obj = cand, q_new, sol_new, kl_new, obj_new
            if not sol.zero_rate:
                warm = sol
            if change < tol:
                return logq, q, sol, kl, True
            eta = min(1.0, eta * 1.5)
        return logq, q, sol, kl, False


def _lse(v: np.ndarray) -> float:
    top = float(v.max())
    return top + math.log(float(np.exp(v - top).sum()))


def _solve_multiplier(lag: _Lagrangian, target: float, logq0: np.ndarray, direction: float):
    """Root-find mu >= 0 so that R(Q_mu, D) = target.

    ``direction`` is +1 when R(Q_mu) increases with mu (excess side), -1 otherwise.
    Returns (mu, q, sol, kl, converged) or None when the target is not bracketed.
    """
    state = {"logq": logq0, "warm": None, "last": None}

    def gap(mu: float) -> float:
        logq, q, sol, kl, ok = lag.minimize(mu, state["logq"], state["warm"])
        state["logq"] = logq
        if not sol.zero_rate:
            state["warm"] = sol
        state["last"] = (mu, q, sol, kl, ok)
        return direction * (sol.rate - target)

    g_lo = gap(0.0)
    if g_lo >= 0:
        mu, q, sol, kl, ok = state["last"]
        return mu, q, sol, kl, ok
    lo, hi = 0.0, 0.25
    while True:
        g_hi = gap(hi)
        if g_hi >= 0:
            break
        lo = hi
        hi *= 2.0
        if hi > MU_CAP:
            return None
    brentq(gap, lo, hi, xtol=1e-13, rtol=1e-12, maxiter=200)
    mu, q, sol, kl, ok = state["last"]
    return mu, q, sol, kl, ok and abs(sol.rate - target) <= RATE_TOL


def _rate_ceiling(pw: np.ndarray, d: DistortionSpec) -> float:
    return math.log(min(int(np.count_nonzero(pw)), d.shape[1]))


def marton_exponent_dms(
    p: PmfLike, d: DistortionSpec, D: float, R: float, *, options: SolverOptions = DEFAULT_OPTIONS
) -> ExponentResult:
    """F(P, R, D): KL projection of P onto {Q : R(Q, D) >= R}."""
    pw = np.asarray(as_pmf(p).weights)
    if R < 0:
        raise DomainError(f"rate must be nonnegative, got {R}")
    base = rate_distortion_dms(pw, d, D, options=options)
    if R <= base.rate:
        return ExponentResult(0.0, pw.copy(), False, 0.0, True, rate_at_minimizer=base.rate)
    if R >= _rate_ceiling(pw, d):
        return ExponentResult(math.inf, None, True, math.inf, True, feasible=False)
    lag = _Lagrangian(pw, d, D, -1.0, options)
    found = _solve_multiplier(lag, R, lag.logp.copy(), +1.0)
    if found is None:
        return ExponentResult(math.inf, None, True, math.inf, True, feasible=False)
    mu, q, sol, kl, ok = found
    if abs(sol.rate - R) > RATE_TOL:
        raise NonConvergence("rate constraint not met at the projection", rate=sol.rate, target=R, multiplier=mu)
    return ExponentResult(kl, q, True, mu, ok, rate_at_minimizer=sol.rate)


def zero_rate_projection(p: PmfLike, d: DistortionSpec, D: float) -> tuple[float, np.ndarray]:
    """min D(Q||P) over the zero-rate region {Q : min_xh E_Q d(X, xh) <= D}.

    For each reproduction letter the region is a half-space, whose I-projection
    is an exponential tilt of P.
    """
    pw = np.asarray(as_pmf(p).weights)
    sup = pw > 0
    best = (math.inf, None)
    for col in range(d.shape[1]):
        f = d.table[sup, col]
        ps = pw[sup]
        if float(ps @ f) <= D:
            return 0.0, pw.copy()
        fmin = float(f.min())
        if fmin > D:
            continue
        if fmin == D:
            mask = f == fmin
            mass = float(ps[mask].sum())
            qs = np.where(mask, ps / mass, 0.0)
            value = -math.log(mass)
        else:
            def tilted(s: float):
                logw = np.log(ps) - s * f
                logw -= _lse(logw)
                return np.exp(logw)

            s_hi = 1.0
            while float(tilted(s_hi) @ f) > D:
                s_hi *= 2.0
            s = brentq(lambda s: float(tilted(s) @ f) - D, 0.0, s_hi, xtol=1e-14, rtol=1e-14)
            qs = tilted(s)
            value = kl_divergence(qs, ps)
        if value < best[0]:
            q = np.zeros_like(pw)
            q[sup] = qs
            best = (value, q)
    return best  # type: ignore[return-value]


def _starts(pw: np.ndarray, n_starts: int, seed: int) -> list[np.ndarray]:
    sup = pw > 0
    k = int(sup.sum())
    rng = np.random.default_rng(seed)
    starts = [np.log(pw[sup]), np.full(k, -math.log(k))]
    while len(starts) < n_starts:
        starts.append(np.log(rng.dirichlet(np.ones(k))))
    return starts[:n_starts]


def correct_exponent_dms(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    R: float,
    *,
    options: SolverOptions = DEFAULT_OPTIONS,
    n_starts: int = N_STARTS,
    seed: int = 0,
) -> ExponentResult:
    """G(P, R, D): KL projection of P onto {Q : R(Q, D) <= R}.

    That set need not be convex, so the multiplier search is run from several
    starting laws (P, uniform, Dirichlet draws); the exact projection onto the
    zero-rate region is always included as a feasible candidate.
    """
    pw = np.asarray(as_pmf(p).weights)
    if R < 0:
        raise DomainError(f"rate must be nonnegative, got {R}")
    base = rate_distortion_dms(pw, d, D, options=options)
    if R >= base.rate:
        return ExponentResult(0.0, pw.copy(), False, 0.0, True, rate_at_minimizer=base.rate)
    z_value, z_q = zero_rate_projection(pw, d, D)
    candidates: list[tuple[float, int, np.ndarray, float, float, bool]] = []
    if R > 0:
        lag = _Lagrangian(pw, d, D, +1.0, options)
        for idx, logq0 in enumerate(_starts(pw, n_starts, seed)):
            found = _solve_multiplier(lag, R, logq0, -1.0)
            if found is None:
                continue
            mu, q, sol, kl, ok = found
            if sol.rate <= R + RATE_TOL:
                candidates.append((kl, idx, q, mu, sol.rate, ok))
    if z_q is not None:
        candidates.append((z_value, n_starts, z_q, math.inf, 0.0, True))
    if not candidates:
        return ExponentResult(math.inf, None, True, math.inf, True, feasible=False)
    candidates.sort(key=lambda c: (c[0], c[1]))
    value, idx, q, mu, rate, ok = candidates[0]
    runs = [c[0] for c in candidates if c[1] < n_starts and c[5]]
    multimodal = len(runs) > 1 and (max(runs) - min(runs)) > MULTIMODAL_TOL
    return ExponentResult(
        value, q, True, mu, ok, rate_at_minimizer=rate, multimodal=multimodal, starts=[c[0] for c in candidates]
    )


# --- Gaussian source ------------------------------------------------------------


def gaussian_exponent_profile(g: GaussianProblem, R: float) -> float:
    """1/2 (x - 1 - ln x) with x = (D / sigma^2) e^{2R}, no clamping."""
    u = math.expm1(2.0 * R + math.log(g.distortion / g.variance))
    return -0.5 * _log1pmx(u)


def gaussian_excess_exponent(g: GaussianProblem, R: float) -> float:
    if R < 0:
        raise DomainError(f"rate must be nonnegative, got {R}")
    if R <= rate_distortion_gaussian(g):
        return 0.0
    return gaussian_exponent_profile(g, R)


def gaussian_correct_exponent(g: GaussianProblem, R: float) -> float:
    if R < 0:
        raise DomainError(f"rate must be nonnegative, got {R}")
    if R >= rate_distortion_gaussian(g):
        return 0.0
    return gaussian_exponent_profile(g, R)


# --- moderate-deviation diagnostics ----------------------------------------------


def problem_dispersion(problem: Problem, *, options: SolverOptions = DEFAULT_OPTIONS) -> float:
    if isinstance(problem, GaussianProblem):
        return dispersion_gaussian()
    return dispersion_dms(problem.source, problem.distortion, problem.level, options=options).value


def md_exponent_prediction(problem: Problem, *, options: SolverOptions = DEFAULT_OPTIONS) -> float:
    """Limit of log-probability / (n eps_n^2): -1/(2V) for discrete sources, -1 for Gaussian."""
    if isinstance(problem, GaussianProblem):
        return -1.0
    v = problem_dispersion(problem, options=options)
    if v < 1e-10:
        raise DegenerateDispersion("dispersion vanishes; the moderate-deviation exponent is undefined", dispersion=v)
    return -1.0 / (2.0 * v)


@dataclass
class LimitRatio:
    deltas: list[float]
    ratios: list[float]
    intercept: float
    slope: float
    running_upper: list[float]
    running_lower: list[float]
    dispersion: float

    def to_record(self) -> dict[str, Any]:
        return {
            "deltas": self.deltas,
            "ratios": self.ratios,
            "intercept": self.intercept,
            "slope": self.slope,
            "running_upper": self.running_upper,
            "running_lower": self.running_lower,
            "dispersion": self.dispersion,
        }


def extrapolate_to_zero(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Neville evaluation at 0 of the interpolating polynomial (Richardson for
    errors expanding in powers of x)."""
    xs = [float(x) for x in xs]
    table = [float(y) for y in ys]
    m = len(xs)
    for level in range(1, m):
        for i in range(m - level):
            x_lo, x_hi = xs[i], xs[i + level]
            table[i] = (x_lo * table[i + 1] - x_hi * table[i]) / (x_lo - x_hi)
    return table[0]


def quadratic_limit_ratio(
    problem: Problem, deltas: Sequence[float], *, options: SolverOptions = DEFAULT_OPTIONS
) -> LimitRatio:
    """F(P, R(P,D) + delta, D) * 2V / delta^2 for each delta; tends to 1 as delta -> 0."""
    deltas = [float(x) for x in deltas]
    if not deltas or any(x <= 0 for x in deltas):
        raise DomainError("deltas must be positive")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise DomainError("deltas must be strictly decreasing")
    if isinstance(problem, GaussianProblem):
        v = dispersion_gaussian()
        base = rate_distortion_gaussian(problem)
        values = [gaussian_excess_exponent(problem, base + x) for x in deltas]
    else:
        v = problem_dispersion(problem, options=options)
        if v < 1e-10:
            raise DegenerateDispersion("dispersion vanishes", dispersion=v)
        p, d, D = problem.source, problem.distortion, problem.level
        base = rate_distortion_dms(p, d, D, options=options).rate
        values = []
        for x in deltas:
            res = marton_exponent_dms(p, d, D, base + x, options=options)
            if not res.feasible:
                raise InfeasibleRate("rate above the largest achievable R(Q, D)", rate=base + x)
            values.append(res.value)
    ratios = [f * 2.0 * v / (x * x) for f, x in zip(values, deltas)]
    slope = float(np.polyfit(deltas, np.array(ratios) - 1.0, 1)[0]) if len(deltas) > 1 else math.nan
    upper = [max(ratios[i:]) for i in range(len(ratios))]
    lower = [min(ratios[i:]) for i in range(len(ratios))]
    return LimitRatio(deltas, ratios, extrapolate_to_zero(deltas, ratios), slope, upper, lower, v)
