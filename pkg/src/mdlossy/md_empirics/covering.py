"""D-covers of a single type class by greedy maximum coverage, with an exact
minimum-cover oracle for small instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from ..core_math import NType, entropy
from ..errors import BudgetExceeded, DomainError
from ..rd_solver import DistortionSpec, rate_distortion_dms

ENUM_CAP = 1_000_000
PAIR_CAP = 50_000_000
DIST_TOL = 1e-12


@dataclass
class CoverResult:
    codebook: list[tuple[int, ...]]
    covered: bool
    rate: float
    excess_over_rd: float
    type_class_size: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.codebook)

    def to_listing(self) -> str:
        lines = [f"# rate={self.rate:.17g} excess={self.excess_over_rd:.17g}"]
        lines.extend(" ".join(str(s) for s in word) for word in self.codebook)
        return "\n".join(lines) + "\n"

    def to_record(self) -> dict[str, Any]:
        return {
            "size": self.size,
            "covered": self.covered,
            "rate": self.rate,
            "excess_over_rd": self.excess_over_rd,
            "codebook": [list(w) for w in self.codebook],
        }


def type_class_words(q: NType, cap: int = ENUM_CAP) -> np.ndarray:
    """Every word with the counts of ``q``, in lexicographic order."""
    size = math.exp(q.log_class_size())
    if size > cap * (1 + 1e-9):
        raise BudgetExceeded(f"type class of size {size:.6g} exceeds the enumeration cap", size=size, cap=cap)
    counts = list(q.counts)
    out: list[list[int]] = []
    word: list[int] = []

    def extend(remaining: int) -> None:
        if remaining == 0:
            out.append(list(word))
            return
        for sym, c in enumerate(counts):
            if c:
                counts[sym] -= 1
                word.append(sym)
                extend(remaining - 1)
                word.pop()
                counts[sym] += 1

    extend(q.n)
    return np.array(out, dtype=np.int64)


def candidate_words(n: int, k_hat: int, cap: int = ENUM_CAP) -> np.ndarray:
    total = k_hat**n
    if total > cap:
        raise BudgetExceeded(f"{total} reconstruction words exceed the enumeration cap", candidates=total, cap=cap)
    return np.array(list(itertools.product(range(k_hat), repeat=n)), dtype=np.int64).reshape(total, n)


def coverage_matrix(words: np.ndarray, candidates: np.ndarray, d: DistortionSpec, D: float) -> np.ndarray:
    """Boolean [word, candidate]: average distortion at most D."""
    if words.shape[0] * candidates.shape[0] > PAIR_CAP:
        raise BudgetExceeded(
            "word-candidate table too large", pairs=words.shape[0] * candidates.shape[0], cap=PAIR_CAP
        )
    n = words.shape[1]
    total = np.zeros((words.shape[0], candidates.shape[0]))
    for i in range(n):
        total += d.table[words[:, i][:, None], candidates[:, i][None, :]]
    return total / n <= D + DIST_TOL


def _setup(q: NType, d: DistortionSpec, D: float, cap: int):
    if len(q.counts) != d.shape[0]:
        raise DomainError(f"type alphabet {len(q.counts)} does not match distortion rows {d.shape[0]}")
    if not (math.isfinite(D) and D >= 0):
        raise DomainError(f"distortion level must be nonnegative, got {D}")
    words = type_class_words(q, cap)
    cands = candidate_words(q.n, d.shape[1], cap)
    return words, cands, coverage_matrix(words, cands, d, D)


def _type_rate(q: NType, d: DistortionSpec, D: float) -> float:
    if D > 0:
        return rate_distortion_dms(q.as_pmf(), d, D).rate
    # zero distortion: exact reproduction through the zero-distortion letters
    zeros = d.table == 0
    if np.all(zeros.sum(axis=1) == 1):
        image = np.zeros(d.shape[1])
        for sym, c in enumerate(q.counts):
            image[int(np.flatnonzero(zeros[sym])[0])] += c
        return entropy(image)
    return math.nan


def _result(q: NType, d: DistortionSpec, D: float, words, cands, cover, chosen: list[int]) -> CoverResult:
    covered = bool(cover[:, chosen].any(axis=1).all()) if chosen else words.shape[0] == 0
    rate = math.log(len(chosen)) / q.n if chosen else math.nan
    code = [tuple(int(s) for s in cands[c]) for c in chosen]
    return CoverResult(code, covered, rate, rate - _type_rate(q, d, D), words.shape[0])


def greedy_type_cover(q: NType, d: DistortionSpec, D: float, *, cap: int = ENUM_CAP) -> CoverResult:
    """Repeatedly add the reconstruction word covering the most uncovered words
    of the type class; ties go to the lexicographically smallest word."""
    words, cands, cover = _setup(q, d, D, cap)
    uncovered = np.ones(words.shape[0], dtype=bool)
    chosen: list[int] = []
    while uncovered.any():
        gains = cover[uncovered].sum(axis=0)
        best = int(np.argmax(gains))
        if gains[best] == 0:
            break
        chosen.append(best)
        uncovered &= ~cover[:, best]
    return _result(q, d, D, words, cands, cover, chosen)


def minimum_type_cover(q: NType, d: DistortionSpec, D: float, *, cap: int = ENUM_CAP) -> CoverResult:
    """Smallest complete D-cover of the type class, by integer programming."""
    words, cands, cover = _setup(q, d, D, cap)
    useful = np.flatnonzero(cover.any(axis=0))
    if not cover.any(axis=1).all():
        return _result(q, d, D, words, cands, cover, [])
    a = cover[:, useful].astype(float)
    res = milp(
        c=np.ones(useful.size),
        constraints=LinearConstraint(a, lb=np.ones(words.shape[0]), ub=np.inf),
        integrality=np.ones(useful.size),
        bounds=Bounds(0, 1),
    )
    if not res.success:
        raise BudgetExceeded(f"exact cover search failed: {res.message}")
    chosen = sorted(int(useful[i]) for i in np.flatnonzero(res.x > 0.5))
    return _result(q, d, D, words, cands, cover, chosen)


def greedy_guarantee(q: NType) -> float:
    """1 + ln |T_Q|, the classical greedy set-cover approximation factor."""
    return 1.0 + q.log_class_size()
