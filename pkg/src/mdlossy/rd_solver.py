"""Rate-distortion functions.

The discrete solver follows the slope parametrization of Blahut and Arimoto:
for a slope ``lam`` the optimal test channel is ``W(xh|x) ~ q(xh) exp(-lam d)``
and the output marginal ``q`` is the fixed point of ``q <- q * c(q)`` with

    c(xh) = sum_x p(x) exp(-lam d(x, xh)) / Z(x),   Z(x) = sum_xh q(xh) exp(-lam d(x, xh)).

The slope is then tuned so that the channel meets the distortion target.
Plain Blahut-Arimoto converges linearly (sublinearly when an output letter is
dying), so after a coarse warm-up the KKT system

    c(xh) = 1 on the support of q,     E[d] = D

is polished with Newton's method in the unknowns (q restricted to its support,
lam). The undamped Blahut-Arimoto loop with a bracketing root-finder on the
slope is kept as the fallback path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.optimize import brentq

from .core_math import Pmf, PmfLike, as_pmf, binary_entropy
from .errors import DimensionMismatch, DomainError, NonConvergence


@dataclass(frozen=True, eq=False)
class DistortionSpec:
    """Nonnegative |X| x |Xh| distortion table with a zero in every row."""

    table: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.table, dtype=float, copy=True)
        if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
            raise DomainError(f"distortion table must be a nonempty matrix, got shape {t.shape}")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise DomainError("distortion entries must be finite and nonnegative")
        rows = np.flatnonzero(~np.any(t == 0, axis=1))
        if rows.size:
            raise DomainError(f"rows {rows.tolist()} have no zero-distortion reproduction")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def hamming(cls, k: int, k_hat: Optional[int] = None) -> "DistortionSpec":
        k_hat = k if k_hat is None else k_hat
        if k_hat < k:
            raise DomainError("Hamming distortion needs |Xh| >= |X| to keep a zero in every row")
        t = np.ones((k, k_hat))
        t[np.arange(k), np.arange(k)] = 0.0
        return cls(t)

    @property
    def d_max(self) -> float:
        return float(self.table.max())

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape  # type: ignore[return-value]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistortionSpec):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self.table == other.table))

    def __hash__(self) -> int:
        return hash((self.shape, self.table.tobytes()))


@dataclass(frozen=True)
class GaussianProblem:
    """Memoryless zero-mean Gaussian source under squared error."""

    variance: float
    distortion: float

    def __post_init__(self) -> None:
        for name in ("variance", "distortion"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class DmsProblem:
    """A discrete source, a distortion measure and a distortion level."""

    source: Pmf
    distortion: DistortionSpec
    level: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", as_pmf(self.source))
        if self.source.size != self.distortion.shape[0]:
            raise DimensionMismatch(
                f"source has {self.source.size} symbols, distortion table has {self.distortion.shape[0]} rows"
            )
        if not (math.isfinite(self.level) and self.level > 0):
            raise DomainError(f"distortion level must be positive, got {self.level}")


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances for the rate-distortion solver."""

    gap_tol: float = 1e-10  # certified Blahut-Arimoto suboptimality, nats
    max_iter: int = 10_000
    kkt_tol: float = 1e-12
    newton_max_iter: int = 60
    prune_below: float = 1e-300
    slope_bracket: float = 50.0  # initial upper slope is slope_bracket / D


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class RdSolution:
    rate: float
    output_marginal: np.ndarray
    slope: float
    achieved_distortion: float
    target_distortion: float
    iterations: int
    converged: bool
    zero_rate: bool
    pruned: tuple[int, ...] = ()
    method: str = "newton"
    residual: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_record(self) -> dict[str, Any]:
        return {
            "rate": self.rate,
            "slope": self.slope,
            "distortion": self.achieved_distortion,
            "iterations": self.iterations,
            "converged": self.converged,
            "zero_rate": self.zero_rate,
        }


def _arrays(p: PmfLike, d: DistortionSpec) -> tuple[np.ndarray, np.ndarray]:
    pw = np.asarray(as_pmf(p).weights)
    if pw.size != d.shape[0]:
        raise DimensionMismatch(f"source has {pw.size} symbols, distortion table has {d.shape[0]} rows")
    return pw, d.table


def max_useful_distortion(p: PmfLike, d: DistortionSpec) -> float:
    """D_max(p, d) = min over reproductions of E_p d(X, xh); the rate is 0 from here on."""
    pw, t = _arrays(p, d)
    return float((pw @ t).min())


def _lse_rows(m: np.ndarray) -> np.ndarray:
    top = m.max(axis=1)
    top = np.where(np.isfinite(top), top, 0.0)
    return top + np.log(np.exp(m - top[:, None]).sum(axis=1))


class _Problem:
    """Source restricted to its support, with cached logs."""

    __slots__ = ("p", "d", "logp", "target")

    def __init__(self, pw: np.ndarray, table: np.ndarray, target: float) -> None:
        keep = pw > 0
        self.p = pw[keep]
        self.d = table[keep]
        self.logp = np.log(self.p)
        self.target = target

    # one Blahut-Arimoto sweep count is returned alongside the new log-marginal
    def blahut_arimoto(self, lam: float, logq: np.ndarray, tol: float, max_iter: int, prune: float):
        log_a = -lam * self.d
        floor = math.log(prune)
        gap = math.inf
        it = 0
        for it in range(1, max_iter + 1):
            log_z = _lse_rows(log_a + logq)
            terms = log_a - log_z[:, None] + self.logp[:, None]
            top = terms.max(axis=0)
            logc = top + np.log(np.exp(terms - top).sum(axis=0))
            alive = np.isfinite(logq)
            gap = float(logc[alive].max())  # ln max c bounds the suboptimality
            logq = logq + logc
            logq[logq < floor] = -np.inf
            qmax = logq.max()
            logq = logq - (qmax + math.log(np.exp(logq - qmax).sum()))
            if gap < tol:
                break
        return logq, it, gap

    def channel(self, lam: float, logq: np.ndarray):
        joint = -lam * self.d + logq
        log_z = _lse_rows(joint)
        w = np.exp(joint - log_z[:, None])
        dist = float(self.p @ (w * self.d).sum(axis=1))
        return log_z, dist

    def dual_rate(self, lam: float, log_z: np.ndarray) -> float:
        return -lam * self.target - float(self.p @ log_z)

    def newton(self, lam: float, q: np.ndarray, tol: float, max_iter: int):
        """Polish (q, lam) on the KKT system; returns None on failure."""
        q = q.copy()
        q[q < 1e-14 * q.max()] = 0.0
        q /= q.sum()
        readded = 0
        it_total = 0
        while True:
            out = self._newton_on_support(lam, q, tol, max_iter)
            if out is None:
                return None
            lam, q, res, its = out
            it_total += its
            # KKT for letters outside the support: c(xh) <= 1
            outside = q == 0
            if not outside.any():
                break
            with np.errstate(divide="ignore"):
                log_z, _ = self.channel(lam, np.log(q))
            terms = -lam * self.d[:, outside] - log_z[:, None] + self.logp[:, None]
            top = terms.max(axis=0)
            logc = top + np.log(np.exp(terms - top).sum(axis=0))
            bad = np.flatnonzero(outside)[logc > 1e-9]
            if bad.size == 0 or readded > q.size:
                break
            readded += 1
            q[bad] = 1e-6
            q /= q.sum()
        return lam, q, res, it_total

    def _newton_on_support(self, lam: float, q: np.ndarray, tol: float, max_iter: int):
        p, target = self.p, self.target

        def residual(lam_: float, qs: np.ndarray, ds: np.ndarray):
            joint = -lam_ * ds + np.log(qs)
            log_z = _lse_rows(joint)
            b = np.exp(-lam_ * ds - log_z[:, None])
            w = b * qs
            dbar = (w * ds).sum(axis=1)
            c = p @ b
            res = np.empty(qs.size + 1)
            res[:-1] = c - 1.0
            res[-1] = float(p @ dbar) - target
            return res, b, w, dbar

        prev = math.inf
        for it in range(1, max_iter + 1):
            sup = q > 0
            qs = q[sup]
            ds = self.d[:, sup]
            res, b, w, dbar = residual(lam, qs, ds)
            norm = float(np.abs(res).max())
            if norm < tol or (norm < 1e3 * tol and norm >= prev):
                return lam, q, norm, it
            prev = norm
            k = qs.size
            pb = p[:, None] * b
            diff = ds - dbar[:, None]
            jac = np.empty((k + 1, k + 1))
            jac[:k, :k] = -(pb.T @ b)
            cross = (pb * diff).sum(axis=0)
            jac[:k, k] = -cross
            jac[k, :k] = cross
            jac[k, k] = -float(p @ (w * diff * diff).sum(axis=1))
            try:
                step = np.linalg.solve(jac, -res)
            except np.linalg.LinAlgError:
                return None
            if not np.all(np.isfinite(step)):
                return None
            dq, dlam = step[:k], float(step[k])
            # letters the full step would kill and that are already negligible leave the support
            dying = (qs + dq <= 0) & (qs < 1e-5)
            if dying.any() and k > 1:
                idx = np.flatnonzero(sup)[dying]
                q = q.copy()
                q[idx] = 0.0
                q /= q.sum()
                prev = math.inf
                continue
            t = 1.0
            accepted = False
            for _ in range(40):
                q_new = qs + t * dq
                lam_new = lam + t * dlam
                if np.all(q_new > 0) and lam_new > 0:
                    res_new = residual(lam_new, q_new, ds)[0]
                    if float(np.abs(res_new).max()) < norm * (1 - 1e-4 * t) or norm < 1e2 * tol:
                        accepted = True
                        break
                t *= 0.5
            if not accepted:
                return None
            q = q.copy()
            q[sup] = q_new
            lam = lam_new
        return None


def _zero_rate_solution(pw: np.ndarray, table: np.ndarray, D: float) -> RdSolution:
    expected = pw @ table
    best = int(np.argmin(expected))
    q = np.zeros(table.shape[1])
    q[best] = 1.0
    return RdSolution(
        rate=0.0,
        output_marginal=q,
        slope=0.0,
        achieved_distortion=float(expected[best]),
        target_distortion=D,
        iterations=0,
        converged=True,
        zero_rate=True,
        pruned=tuple(i for i in range(table.shape[1]) if i != best),
        method="closed-form",
    )


def _finish(prob: _Problem, lam: float, q: np.ndarray, iterations: int, method: str, residual: float, notes) -> RdSolution:
    q = q / q.sum()
    with np.errstate(divide="ignore"):
        logq = np.log(q)
    log_z, dist = prob.channel(lam, logq)
    rate = max(0.0, prob.dual_rate(lam, log_z))
    return RdSolution(
        rate=rate,
        output_marginal=q,
        slope=float(lam),
        achieved_distortion=dist,
        target_distortion=prob.target,
        iterations=iterations,
        converged=True,
        zero_rate=False,
        pruned=tuple(int(i) for i in np.flatnonzero(q == 0)),
        method=method,
        residual=residual,
        notes=list(notes),
    )


def _cold_start(prob: _Problem, n_hat: int, opts: SolverOptions):
    """Coarse geometric bisection on the slope with truncated Blahut-Arimoto sweeps."""
    D = prob.target
    logq = np.full(n_hat, -math.log(n_hat))
    iterations = 0

    def too_distorting(lam: float) -> bool:
        nonlocal logq, iterations
        logq, its, _ = prob.blahut_arimoto(lam, logq, 1e-7, 200, opts.prune_below)
        iterations += its
        return prob.channel(lam, logq)[1] > D

    hi = opts.slope_bracket / D
    while too_distorting(hi):
        hi *= 4.0
        if hi > 1e12:
            break
    lo = hi / 8.0
    while not too_distorting(lo):
        hi, lo = lo, lo / 8.0
        if lo < 1e-12:
            break
    for _ in range(40):
        if hi / lo < 1.02:
            break
        mid = math.sqrt(lo * hi)
        if too_distorting(mid):
            lo = mid
        else:
            hi = mid
    lam = math.sqrt(lo * hi)
    logq, its, _ = prob.blahut_arimoto(lam, logq, 1e-8, 500, opts.prune_below)
    return lam, logq, iterations + its, (lo / 8.0, hi * 8.0)


def _blahut_arimoto_path(prob: _Problem, n_hat: int, opts: SolverOptions, logq: np.ndarray, bracket) -> RdSolution:
    """Undamped Blahut-Arimoto at fixed slope, slope root-found by Brent's bisection hybrid."""
    D = prob.target
    state = {"logq": logq, "its": 0, "gap": math.inf, "last": None}

    def excess(lam: float) -> float:
        lq, its, gap = prob.blahut_arimoto(lam, state["logq"], opts.gap_tol, opts.max_iter, opts.prune_below)
        state["logq"], state["gap"] = lq, gap
        state["its"] += its
        if gap >= opts.gap_tol:
            raise NonConvergence(
                "Blahut-Arimoto hit its iteration cap",
                slope=lam,
                certified_gap=gap,
                iterations=its,
                target_distortion=D,
            )
        dist = prob.channel(lam, lq)[1]
        state["last"] = (lam, lq)
        return dist - D

    lo, hi = bracket
    lo = max(lo, 1e-12)
    while excess(hi) > 0:
        hi *= 4.0
        if hi > 1e14:
            raise NonConvergence("could not bracket the slope from above", slope=hi, target_distortion=D)
    while excess(lo) < 0:
        lo /= 4.0
        if lo < 1e-14:
            raise NonConvergence("could not bracket the slope from below", slope=lo, target_distortion=D)
    brentq(excess, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=200)
    lam, lq = state["last"]
    q = np.exp(lq)
    return _finish(prob, lam, q, state["its"], "blahut-arimoto", state["gap"], [])


def rate_distortion_dms(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    *,
    options: SolverOptions = DEFAULT_OPTIONS,
    warm: Optional[RdSolution] = None,
) -> RdSolution:
    """R(p, D) = min over test channels with E d <= D of I(p, W), in nats.

    ``warm`` may carry a nearby solution (same distortion table); its slope
    and output marginal seed the Newton polish directly.
    """
    pw, table = _arrays(p, d)
    if not (math.isfinite(D) and D > 0):
        raise DomainError(f"distortion level must be positive and finite, got {D}")
    if D >= float((pw @ table).min()):
        return _zero_rate_solution(pw, table, D)
    prob = _Problem(pw, table, D)
    n_hat = table.shape[1]

    if warm is not None and not warm.zero_rate and warm.slope > 0 and warm.output_marginal.size == n_hat:
        out = prob.newton(warm.slope, np.asarray(warm.output_marginal, dtype=float), options.kkt_tol, options.newton_max_iter)
        if out is not None:
            lam, q, res, its = out
            return _finish(prob, lam, q, its, "newton", res, ["warm start"])

    lam, logq, iterations, bracket = _cold_start(prob, n_hat, options)
    out = prob.newton(lam, np.exp(logq), options.kkt_tol, options.newton_max_iter)
    if out is not None:
        lam, q, res, its = out
        return _finish(prob, lam, q, iterations + its, "newton", res, [])
    sol = _blahut_arimoto_path(prob, n_hat, options, logq, bracket)
    sol.iterations += iterations
    sol.notes.append("newton polish failed; plain Blahut-Arimoto used")
    return sol


def rate_distortion_binary_hamming(alpha: float, D: float) -> float:
    """h(min(alpha, 1-alpha)) - h(D) below the zero-rate threshold, else 0."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not D >= 0:
        raise DomainError(f"D must be nonnegative, got {D}")
    m = min(alpha, 1.0 - alpha)
    if D >= m:
        return 0.0
    return binary_entropy(m) - binary_entropy(D)


def rate_distortion_gaussian(g: GaussianProblem) -> float:
    return 0.5 * math.log(max(1.0, g.variance / g.distortion))


def tilted_information(
    p: PmfLike,
    d: DistortionSpec,
    D: float,
    *,
    solution: Optional[RdSolution] = None,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> tuple[np.ndarray, float]:
    """Per-symbol d-tilted information j(x) and the slope.

    j(x) = -ln sum_xh q*(xh) exp(lam (D - d(x, xh))); its p-mean is R(p, D).
    """
    pw, table = _arrays(p, d)
    d_cap = float((pw @ table).min())
    if not 0 < D < d_cap:
        raise DomainError(f"tilted information needs 0 < D < D_max = {d_cap}, got {D}")
    sol = solution if solution is not None else rate_distortion_dms(p, d, D, options=options)
    lam = sol.slope
    with np.errstate(divide="ignore"):
        logq = np.log(sol.output_marginal)
    log_z = _lse_rows(-lam * table + logq)
    return -lam * D - log_z, lam
