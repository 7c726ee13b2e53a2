"""Dispersion, MD prediction and quadratic-limit ratios across Bernoulli sources."""

import argparse

import numpy as np

from mdlossy.core_math import Pmf
from mdlossy.dispersion import dispersion_binary_hamming, dispersion_dms, max_dispersion_bernoulli
from mdlossy.errors import InfeasibleRate
from mdlossy.exponents import quadratic_limit_ratio
from mdlossy.rd_solver import DistortionSpec, DmsProblem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--level", type=float, default=0.02)
    ap.add_argument("--deltas", default="0.05,0.025,0.0125")
    args = ap.parse_args()

    d = DistortionSpec.hamming(2)
    deltas = [float(x) for x in args.deltas.split(",")]
    print("alpha      V_fd        V_closed    -1/(2V)    ratios -> intercept")
    for alpha in np.round(np.arange(0.04, 0.5, 0.04), 2):
        if alpha <= args.level:
            continue
        res = dispersion_dms([1 - alpha, alpha], d, args.level)
        try:
            lr = quadratic_limit_ratio(DmsProblem(Pmf.bernoulli(alpha), d, args.level), deltas)
            ratios = " ".join(f"{r:.4f}" for r in lr.ratios) + f" -> {lr.intercept:.4f}"
        except InfeasibleRate:
            ratios = "R + delta beyond the largest achievable rate"
        print(
            f"{alpha:5.2f}  {res.value:10.6f}  {dispersion_binary_hamming(alpha):10.6f}  "
            f"{-1 / (2 * res.value):9.4f}    {ratios}"
        )
    a_star, v_star = max_dispersion_bernoulli()
    print(f"largest dispersion at alpha* = {a_star:.6f} with V = {v_star:.6f}")


if __name__ == "__main__":
    main()
