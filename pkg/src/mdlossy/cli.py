"""Command-line front end.

Every subcommand writes one artifact (JSON record, CSV curve or cover
listing) to ``--out`` or standard output. Exit status is 0 on success, 2 on
invalid input and 3 when a computation could not be certified.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from .core_math import NType, Pmf
from .dispersion import dispersion_dms, dispersion_gaussian
from .errors import ComputationError, ValidationError
from .exponents import (
    correct_exponent_dms,
    gaussian_correct_exponent,
    gaussian_excess_exponent,
    marton_exponent_dms,
    md_exponent_prediction,
    quadratic_limit_ratio,
)
from .md_empirics import (
    DEFAULT_BUDGET,
    achievability_bound_dms,
    effective_gap_dms,
    effective_gap_gaussian,
    exact_code_error_prob_dms,
    gaussian_achievability_bound,
    gaussian_tail_curve,
    gaussian_tail_logprob,
    greedy_type_cover,
    log_grid,
    make_epsilon,
    md_curve_dms,
)
from .md_empirics.bounds import default_J
from .rd_solver import DistortionSpec, DmsProblem, GaussianProblem, rate_distortion_dms, rate_distortion_gaussian

COMMANDS = ("rd", "dispersion", "exponent", "limit-ratio", "md-curve", "cover", "bound")
DEFAULT_FORMAT = {"md-curve": "csv", "cover": "listing"}
GRID_POINTS = 12


class UsageError(ValidationError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    source: Optional[str] = None
    distortion: str = "hamming"
    level: Optional[float] = None
    rate: Optional[float] = None
    eps: Optional[str] = None
    ns: Optional[str] = None
    regime: Optional[str] = None
    side: str = "excess"
    tails: str = "two-sided"
    counts: Optional[str] = None
    deltas: Optional[str] = None
    J: Optional[float] = None
    format: Optional[str] = None
    out: Optional[str] = None
    threads: Optional[int] = None
    budget: int = DEFAULT_BUDGET

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    @property
    def output_format(self) -> str:
        return self.format or DEFAULT_FORMAT.get(self.command, "json")

    @property
    def gaussian(self) -> bool:
        return bool(self.source) and self.source.startswith("gauss:")


# --- parsing ------------------------------------------------------------------


def read_table(path: str) -> np.ndarray:
    """Whitespace-separated decimals, one row per line, '#' starts a comment."""
    rows = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    rows.append([float(tok) for tok in line.split()])
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"bad number in {path}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise UsageError(f"{path} must hold a nonempty rectangular table")
    return np.array(rows, dtype=float)


def parse_source(spec: str):
    kind, _, arg = spec.partition(":")
    try:
        if kind == "bern":
            return Pmf.bernoulli(float(arg))
        if kind == "pmf":
            return Pmf(read_table(arg).reshape(-1))
        if kind == "gauss":
            return float(arg)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise UsageError(f"bad source {spec!r}") from None
    raise UsageError(f"source must be bern:ALPHA, pmf:FILE or gauss:VARIANCE, got {spec!r}")


def parse_distortion(spec: str, k: int) -> DistortionSpec:
    if spec == "hamming":
        return DistortionSpec.hamming(k)
    if spec.startswith("matrix:"):
        return DistortionSpec(read_table(spec[len("matrix:") :]))
    raise UsageError(f"distortion must be hamming or matrix:FILE, got {spec!r}")


def parse_float_list(text: str, name: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"{name} must be comma-separated numbers, got {text!r}") from None


def parse_eps(text: str):
    vals = parse_float_list(text, "--eps")
    if len(vals) != 2:
        raise UsageError(f"--eps takes c,t, got {text!r}")
    return vals[0], vals[1]


def parse_ns(text: str) -> list[int]:
    """'start:stop:log' -> 12 log-spaced integers; otherwise a comma list."""
    parts = text.split(":")
    try:
        if len(parts) == 3 and parts[2] == "log":
            return log_grid(int(round(float(parts[0]))), int(round(float(parts[1]))), GRID_POINTS)
        if len(parts) == 1:
            ns = sorted({int(round(float(tok))) for tok in text.split(",") if tok.strip()})
            if ns and ns[0] >= 1:
                return ns
    except ValueError:
        pass
    raise UsageError(f"--ns must be START:STOP:log or a comma list of positive integers, got {text!r}")


def _regime(cfg: RunConfig) -> str:
    implied = "gaussian" if cfg.gaussian else "dms"
    if cfg.regime is not None and cfg.regime != implied:
        raise UsageError(f"--regime {cfg.regime} conflicts with --source {cfg.source}")
    return implied


def validate(cfg: RunConfig) -> None:
    """Reject inconsistent flag combinations before any computation."""
    if cfg.command not in COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    if cfg.command != "cover" and cfg.source is None:
        raise UsageError(f"{cfg.command} needs --source")
    if cfg.command == "cover":
        if cfg.counts is None or cfg.level is None:
            raise UsageError("cover needs --counts and --level")
        if cfg.source is not None and cfg.gaussian:
            raise UsageError("cover works on discrete type classes only")
    elif cfg.level is None:
        raise UsageError(f"{cfg.command} needs --level")
    if cfg.command == "exponent" and cfg.rate is None:
        raise UsageError("exponent needs --rate")
    if cfg.command in ("md-curve", "bound") and (cfg.eps is None or cfg.ns is None):
        raise UsageError(f"{cfg.command} needs --eps and --ns")
    if cfg.side not in ("excess", "correct"):
        raise UsageError(f"--side must be excess or correct, got {cfg.side!r}")
    if cfg.tails not in ("two-sided", "upper"):
        raise UsageError(f"--tails must be two-sided or upper, got {cfg.tails!r}")
    fmt = cfg.output_format
    allowed = {"cover": ("listing", "json"), "md-curve": ("csv", "json"), "bound": ("csv", "json")}.get(cfg.command, ("json",))
    if fmt not in allowed:
        raise UsageError(f"{cfg.command} supports --format {' or '.join(allowed)}, got {fmt!r}")
    if cfg.threads is not None and cfg.threads < 1:
        raise UsageError("--threads must be at least 1")
    if cfg.budget < 1:
        raise UsageError("--budget must be positive")
    if cfg.command == "bound" and cfg.side != "excess":
        raise UsageError("bound covers the excess side only")
    if cfg.command != "cover":
        _regime(cfg)
        if cfg.gaussian and cfg.distortion != "hamming":
            raise UsageError("Gaussian sources use squared-error distortion; drop --distortion")
    if cfg.eps is not None:
        c, t = parse_eps(cfg.eps)
        make_epsilon(c, t, "gaussian" if cfg.gaussian else "dms")
    if cfg.ns is not None:
        parse_ns(cfg.ns)
    if cfg.deltas is not None:
        parse_float_list(cfg.deltas, "--deltas")


# --- output -------------------------------------------------------------------


def tagged(value: float, unit: str) -> dict[str, Any]:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return {"value": int(value), "unit": unit}
    value = float(value)
    out: dict[str, Any] = {"value": value if math.isfinite(value) else None, "unit": unit}
    if not math.isfinite(value):
        out["nonfinite"] = repr(value)
    return out


def _dms_problem(cfg: RunConfig):
    p = parse_source(cfg.source)
    d = parse_distortion(cfg.distortion, p.size)
    return DmsProblem(p, d, float(cfg.level))


def _gauss_problem(cfg: RunConfig) -> GaussianProblem:
    return GaussianProblem(parse_source(cfg.source), float(cfg.level))


def cmd_rd(cfg: RunConfig, pool) -> dict:
    if cfg.gaussian:
        g = _gauss_problem(cfg)
        return {"regime": "gaussian", "rate": tagged(rate_distortion_gaussian(g), "nats"), "distortion": tagged(g.distortion, "distortion")}
    prob = _dms_problem(cfg)
    sol = rate_distortion_dms(prob.source, prob.distortion, prob.level)
    return {
        "regime": "dms",
        "rate": tagged(sol.rate, "nats"),
        "slope": tagged(sol.slope, "nats/distortion"),
        "distortion": tagged(sol.achieved_distortion, "distortion"),
        "iterations": tagged(sol.iterations, "count"),
        "converged": sol.converged,
        "zero_rate": sol.zero_rate,
        "output_marginal": [tagged(v, "probability") for v in sol.output_marginal],
    }


def cmd_dispersion(cfg: RunConfig, pool) -> dict:
    if cfg.gaussian:
        _gauss_problem(cfg)
        return {"regime": "gaussian", "dispersion": tagged(dispersion_gaussian(), "nats2")}
    prob = _dms_problem(cfg)
    res = dispersion_dms(prob.source, prob.distortion, prob.level, executor=pool)
    return {
        "regime": "dms",
        "dispersion": tagged(res.value, "nats2"),
        "tilted_dispersion": tagged(res.tilted_value, "nats2"),
        "degenerate": res.degenerate,
    }


def cmd_exponent(cfg: RunConfig, pool) -> dict:
    if cfg.gaussian:
        g = _gauss_problem(cfg)
        fn = gaussian_excess_exponent if cfg.side == "excess" else gaussian_correct_exponent
        return {"regime": "gaussian", "side": cfg.side, "rate": tagged(cfg.rate, "nats"), "exponent": tagged(fn(g, cfg.rate), "nats"), "feasible": True}
    prob = _dms_problem(cfg)
    fn = marton_exponent_dms if cfg.side == "excess" else correct_exponent_dms
    res = fn(prob.source, prob.distortion, prob.level, float(cfg.rate))
    out = {
        "regime": "dms",
        "side": cfg.side,
        "rate": tagged(cfg.rate, "nats"),
        "feasible": res.feasible,
        "active": res.active,
        "converged": res.converged,
        "multimodal": res.multimodal,
    }
    if res.feasible:
        out["exponent"] = tagged(res.value, "nats")
        out["multiplier"] = tagged(res.multiplier, "dimensionless")
        out["rate_at_minimizer"] = tagged(res.rate_at_minimizer, "nats")
        out["minimizer"] = [tagged(v, "probability") for v in res.minimizer]
    return out


def cmd_limit_ratio(cfg: RunConfig, pool) -> dict:
    deltas = parse_float_list(cfg.deltas, "--deltas") if cfg.deltas else [0.05, 0.025, 0.0125]
    prob = _gauss_problem(cfg) if cfg.gaussian else _dms_problem(cfg)
    res = quadratic_limit_ratio(prob, deltas)
    return {
        "regime": "gaussian" if cfg.gaussian else "dms",
        "dispersion": tagged(res.dispersion, "nats2"),
        "prediction": tagged(md_exponent_prediction(prob), "dimensionless"),
        "rows": [
            {"delta": tagged(dl, "nats"), "ratio": tagged(r, "dimensionless"), "running_upper": tagged(u, "dimensionless"), "running_lower": tagged(lo, "dimensionless")}
            for dl, r, u, lo in zip(res.deltas, res.ratios, res.running_upper, res.running_lower)
        ],
        "intercept": tagged(res.intercept, "dimensionless"),
        "slope": tagged(res.slope, "1/nats"),
    }


def _curve_record(curve) -> dict:
    return {
        "regime": curve.regime,
        "side": curve.side,
        "target": tagged(curve.target, "dimensionless"),
        "trend_slope": tagged(curve.trend_slope, "dimensionless"),
        "rows": [
            {"n": tagged(r.n, "count"), "eps": tagged(r.eps, "nats"), "logp": tagged(r.logp, "logprob"), "z": tagged(r.z, "dimensionless")}
            for r in curve.rows
        ],
    }


def cmd_md_curve(cfg: RunConfig, pool):
    c, t = parse_eps(cfg.eps)
    ns = parse_ns(cfg.ns)
    if cfg.gaussian:
        curve = gaussian_tail_curve(_gauss_problem(cfg), make_epsilon(c, t, "gaussian"), ns, side=cfg.side, tails=cfg.tails, executor=pool)
    else:
        prob = _dms_problem(cfg)
        curve = md_curve_dms(
            prob.source, prob.distortion, prob.level, make_epsilon(c, t, "dms"), ns, side=cfg.side, budget=cfg.budget, executor=pool
        )
    return curve.to_csv() if cfg.output_format == "csv" else _curve_record(curve)


def cmd_cover(cfg: RunConfig, pool):
    counts = [int(round(v)) for v in parse_float_list(cfg.counts, "--counts")]
    q = NType(tuple(counts))
    d = parse_distortion(cfg.distortion, len(counts))
    res = greedy_type_cover(q, d, float(cfg.level), cap=min(cfg.budget, 1_000_000))
    if cfg.output_format == "listing":
        return res.to_listing()
    return {
        "size": tagged(res.size, "count"),
        "covered": res.covered,
        "rate": tagged(res.rate, "nats"),
        "excess_over_rd": tagged(res.excess_over_rd, "nats"),
        "codebook": [" ".join(str(s) for s in w) for w in res.codebook],
    }


BOUND_HEADER = "n,eps,eps_prime,bound,exact,valid"


def cmd_bound(cfg: RunConfig, pool):
    c, t = parse_eps(cfg.eps)
    ns = parse_ns(cfg.ns)
    rows = []
    if cfg.gaussian:
        g = _gauss_problem(cfg)
        seq = make_epsilon(c, t, "gaussian")
        for n in ns:
            e = seq(n)
            gap = effective_gap_gaussian(n, e)
            try:
                bound, _ = gaussian_achievability_bound(g, n, e)
            except ComputationError:
                bound = math.nan
            exact = gaussian_tail_logprob(n, gap) if gap > 0 else 0.0
            rows.append((n, e, gap, bound, exact))
    else:
        prob = _dms_problem(cfg)
        seq = make_epsilon(c, t, "dms")
        J = default_J(prob.distortion) if cfg.J is None else cfg.J
        for n in ns:
            e = seq(n)
            gap = effective_gap_dms(n, e, prob.source.size, J)
            try:
                bound = achievability_bound_dms(prob.source, prob.distortion, prob.level, n, e, J)
            except ComputationError:
                bound = math.nan
            exact = exact_code_error_prob_dms(prob.source, prob.distortion, prob.level, n, e, J, budget=cfg.budget)
            rows.append((n, e, gap, bound, exact))
    if cfg.output_format == "csv":
        lines = [BOUND_HEADER]
        for n, e, gap, bound, exact in rows:
            valid = "vacuous" if math.isnan(bound) else str(bound >= exact).lower()
            lines.append(f"{n},{e:.17g},{gap:.17g},{bound:.17g},{exact:.17g},{valid}")
        return "\n".join(lines) + "\n"
    return {
        "regime": "gaussian" if cfg.gaussian else "dms",
        "rows": [
            {
                "n": tagged(n, "count"),
                "eps": tagged(e, "nats"),
                "eps_prime": tagged(gap, "nats"),
                "bound": tagged(bound, "logprob"),
                "exact": tagged(exact, "logprob"),
                "vacuous": math.isnan(bound),
                "valid": bool(math.isnan(bound) or bound >= exact),
            }
            for n, e, gap, bound, exact in rows
        ],
    }


HANDLERS = {
    "rd": cmd_rd,
    "dispersion": cmd_dispersion,
    "exponent": cmd_exponent,
    "limit-ratio": cmd_limit_ratio,
    "md-curve": cmd_md_curve,
    "cover": cmd_cover,
    "bound": cmd_bound,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # one-line diagnostic, exit 2
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdlossy", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--source", help="bern:ALPHA | pmf:FILE | gauss:VARIANCE")
    parser.add_argument("--distortion", default="hamming", help="hamming | matrix:FILE")
    parser.add_argument("--level", type=float, help="distortion level D")
    parser.add_argument("--rate", type=float, help="rate R in nats")
    parser.add_argument("--eps", help="c,t for eps_n = c n^-t")
    parser.add_argument("--ns", help="START:STOP:log or comma list")
    parser.add_argument("--regime", choices=("dms", "gaussian"))
    parser.add_argument("--side", default="excess", choices=("excess", "correct"))
    parser.add_argument("--tails", default="two-sided", choices=("two-sided", "upper"))
    parser.add_argument("--counts", help="type counts for cover, e.g. 2,2")
    parser.add_argument("--deltas", help="rate gaps for limit-ratio, decreasing")
    parser.add_argument("--J", type=float, help="covering constant (default |X||X_hat|+2)")
    parser.add_argument("--format", choices=("json", "csv", "listing"))
    parser.add_argument("--out")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--budget", type=lambda s: int(float(s)), default=DEFAULT_BUDGET)
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    return RunConfig(**vars(ns))


def render(artifact) -> str:
    if isinstance(artifact, str):
        return artifact
    return json.dumps(artifact, indent=2, sort_keys=True, allow_nan=False) + "\n"


def execute(cfg: RunConfig) -> str:
    validate(cfg)
    threads = cfg.threads or os.cpu_count() or 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return render(HANDLERS[cfg.command](cfg, pool))
    return render(HANDLERS[cfg.command](cfg, None))


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        text = execute(cfg)
        if cfg.out:
            try:
                with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
            except OSError as exc:
                raise UsageError(f"cannot write {cfg.out}: {exc.strerror}") from None
        else:
            stdout.write(text)
        return 0
    except ValidationError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    except ComputationError as exc:
        stderr.write(json.dumps(exc.report(), sort_keys=True) + "\n")
        return 3


def main() -> None:
    sys.exit(run())
