import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from mdlossy.core_math import Pmf, binary_entropy, kl_divergence
from mdlossy.dispersion import dispersion_binary_hamming
from mdlossy.errors import DegenerateDispersion, DomainError
from mdlossy.exponents import (
    correct_exponent_dms,
    extrapolate_to_zero,
    gaussian_correct_exponent,
    gaussian_excess_exponent,
    gaussian_exponent_profile,
    marton_exponent_dms,
    md_exponent_prediction,
    quadratic_limit_ratio,
    zero_rate_projection,
)
from mdlossy.rd_solver import DistortionSpec, DmsProblem, GaussianProblem, rate_distortion_dms

HAM2 = DistortionSpec.hamming(2)


def kl_bern(q, a):
    return kl_divergence([1 - q, q], [1 - a, a])


def oracle_excess(a, D, R):
    """Binary oracle: R(Bern(q), D) = h(q) - h(D) grows toward q = 1/2, so the
    projection sits at h(q*) = h(D) + R between alpha and 1/2."""
    lo = min(a, 1 - a)
    q = brentq(lambda q: binary_entropy(q) - binary_entropy(D) - R, lo, 0.5, xtol=1e-15)
    return kl_bern(q, lo), q


def oracle_correct(a, D, R):
    lo = min(a, 1 - a)
    q = brentq(lambda q: binary_entropy(q) - binary_entropy(D) - R, D, lo, xtol=1e-15)
    return kl_bern(q, lo), q


def test_marton_example():
    a, D = 0.11, 0.05
    base = binary_entropy(a) - binary_entropy(D)
    res = marton_exponent_dms(Pmf.bernoulli(a), HAM2, D, base + 0.05)
    ref, q = oracle_excess(a, D, base + 0.05)
    assert res.value == pytest.approx(ref, abs=1e-9)
    assert res.value == pytest.approx(3.09e-3, abs=1e-5)
    assert res.minimizer[1] == pytest.approx(q, abs=1e-7)
    assert q == pytest.approx(0.13539, abs=1e-5)
    assert res.active and res.converged
    assert abs(res.rate_at_minimizer - (base + 0.05)) <= 1e-6
    assert res.value / 0.05**2 == pytest.approx(1.237, abs=1e-3)


def test_marton_inactive():
    base = binary_entropy(0.11) - binary_entropy(0.05)
    res = marton_exponent_dms([0.89, 0.11], HAM2, 0.05, base)
    assert res.value == 0.0 and not res.active
    assert np.allclose(res.minimizer, [0.89, 0.11])


def test_marton_random_against_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(30):
        a = rng.uniform(0.03, 0.45)
        D = rng.uniform(0.05, 0.9) * a
        top = math.log(2) - binary_entropy(D)
        base = binary_entropy(a) - binary_entropy(D)
        R = base + rng.uniform(0.05, 0.9) * (top - base)
        res = marton_exponent_dms([1 - a, a], HAM2, D, R)
        worst = max(worst, abs(res.value - oracle_excess(a, D, R)[0]))
    assert worst <= 1e-5


def test_marton_infeasible_rate():
    res = marton_exponent_dms([0.89, 0.11], HAM2, 0.05, math.log(2))
    assert not res.feasible and res.value == math.inf
    assert res.to_record()["value"] is None


def test_marton_monotone_in_rate():
    base = binary_entropy(0.2) - binary_entropy(0.1)
    rates = np.linspace(0.0, base + 0.15, 12)
    vals = [marton_exponent_dms([0.8, 0.2], HAM2, 0.1, r).value for r in rates]
    assert all(v == 0.0 for v, r in zip(vals, rates) if r <= base)
    assert np.all(np.diff(vals) >= -1e-12)


def test_marton_three_letters_against_grid():
    p = np.array([0.6, 0.3, 0.1])
    d = DistortionSpec.hamming(3)
    D = 0.1
    R = rate_distortion_dms(p, d, D).rate + 0.08
    res = marton_exponent_dms(p, d, D, R)
    best = math.inf
    for i in range(1, 80):
        warm = None
        for j in range(1, 80 - i):
            q = np.array([i, j, 80 - i - j]) / 80.0
            sol = rate_distortion_dms(q, d, D, warm=warm)
            warm = None if sol.zero_rate else sol
            if sol.rate >= R:
                best = min(best, kl_divergence(q, p))
    assert res.value <= best + 1e-12
    assert res.value >= 0.8 * best


def test_correct_example():
    a, D = 0.11, 0.05
    base = binary_entropy(a) - binary_entropy(D)
    res = correct_exponent_dms([1 - a, a], HAM2, D, base - 0.05)
    ref, q = oracle_correct(a, D, base - 0.05)
    assert res.value == pytest.approx(ref, abs=1e-9)
    assert res.minimizer[1] == pytest.approx(q, abs=1e-6)
    assert not res.multimodal
    assert res.rate_at_minimizer <= base - 0.05 + 1e-6


def test_correct_zero_rate():
    res = correct_exponent_dms([0.89, 0.11], HAM2, 0.05, 0.0)
    assert res.value == pytest.approx(kl_bern(0.05, 0.11), abs=1e-12)
    assert res.value == pytest.approx(0.0225556, abs=1e-7)
    # grid search over the zero-rate region
    grid = np.linspace(0.0, 1.0, 20001)
    zero = [kl_bern(q, 0.11) for q in grid if min(q, 1 - q) <= 0.05]
    assert res.value <= min(zero) + 1e-12


def test_zero_rate_projection_three_letters():
    p = np.array([0.5, 0.3, 0.2])
    d = DistortionSpec.hamming(3)
    value, q = zero_rate_projection(p, d, 0.2)
    assert rate_distortion_dms(q, d, 0.2).rate == 0.0
    assert value == pytest.approx(kl_divergence(q, p))


@pytest.mark.parametrize("side", ["excess", "correct"])
def test_inactive_returns_source(side):
    base = binary_entropy(0.3) - binary_entropy(0.1)
    fn = marton_exponent_dms if side == "excess" else correct_exponent_dms
    res = fn([0.7, 0.3], HAM2, 0.1, base - 0.01 if side == "excess" else base + 0.01)
    assert res.value == 0.0 and not res.active


def test_correct_monotone_in_rate():
    base = binary_entropy(0.2) - binary_entropy(0.1)
    rates = np.linspace(0.0, base + 0.05, 10)
    vals = [correct_exponent_dms([0.8, 0.2], HAM2, 0.1, r).value for r in rates]
    assert np.all(np.diff(vals) <= 1e-12)
    assert vals[-1] == 0.0


def test_gaussian_examples():
    g = GaussianProblem(1.0, 0.25)
    base = 0.5 * math.log(4)
    assert gaussian_excess_exponent(g, base) == 0.0
    assert gaussian_excess_exponent(g, base + 0.1) == pytest.approx(0.5 * (math.exp(0.2) - 1.2), rel=1e-12)
    assert gaussian_excess_exponent(g, base + 0.1) == pytest.approx(0.010701, abs=1e-6)
    assert gaussian_correct_exponent(g, base - 0.1) == pytest.approx(0.5 * (math.exp(-0.2) - 0.8), rel=1e-12)
    assert gaussian_correct_exponent(g, base - 0.1) == pytest.approx(0.009365, abs=1e-6)
    assert gaussian_correct_exponent(g, base) == 0.0
    assert gaussian_excess_exponent(g, base + 0.01) / 1e-4 == pytest.approx(1.0067, abs=1e-4)
    assert gaussian_correct_exponent(g, base - 0.01) / 1e-4 == pytest.approx(1.0, abs=0.01)
    with pytest.raises(DomainError):
        gaussian_excess_exponent(g, -0.1)


@given(st.floats(0.1, 10), st.floats(0.01, 0.99), st.floats(0.0, 3.0), st.floats(0.01, 100))
@settings(max_examples=100)
def test_gaussian_scale_invariance(var, frac, R, c):
    g = GaussianProblem(var, frac * var)
    h = GaussianProblem(c * var, c * frac * var)
    for fn in (gaussian_excess_exponent, gaussian_correct_exponent):
        assert fn(g, R) == pytest.approx(fn(h, R), rel=1e-9, abs=1e-15)


def test_gaussian_profile_matches_both_sides():
    g = GaussianProblem(2.0, 0.3)
    base = 0.5 * math.log(2.0 / 0.3)
    for dl in (0.3, 0.05, -0.05, -0.3):
        one_sided = gaussian_excess_exponent(g, base + dl) + gaussian_correct_exponent(g, base + dl)
        assert gaussian_exponent_profile(g, base + dl) == pytest.approx(one_sided, rel=1e-12)


def test_quadratic_ratio_binary():
    lr = quadratic_limit_ratio(DmsProblem(Pmf.bernoulli(0.11), HAM2, 0.05), [0.05, 0.025, 0.0125])
    assert lr.dispersion == pytest.approx(dispersion_binary_hamming(0.11), rel=1e-6)
    assert lr.ratios[0] > lr.ratios[1] > lr.ratios[2] > 1.0
    assert abs(lr.ratios[-1] - 1) <= 0.05
    assert abs(lr.intercept - 1) <= 0.02
    assert lr.slope > 0
    assert lr.running_upper[0] >= lr.running_upper[-1]


def test_quadratic_ratio_gaussian_identity():
    deltas = [0.2, 0.1, 0.05, 0.01]
    lr = quadratic_limit_ratio(GaussianProblem(1.0, 0.25), deltas)
    for dl, r in zip(deltas, lr.ratios):
        assert r == pytest.approx(math.expm1(2 * dl) / (2 * dl * dl) - 1 / dl, rel=1e-12)
    assert lr.ratios[-1] == pytest.approx(1.00668, abs=5e-5)


def test_quadratic_ratio_validation():
    with pytest.raises(DomainError):
        quadratic_limit_ratio(GaussianProblem(1.0, 0.25), [0.01, 0.02])
    with pytest.raises(DegenerateDispersion):
        quadratic_limit_ratio(DmsProblem(Pmf.bernoulli(0.5), HAM2, 0.1), [0.05])


def test_extrapolation_exact_for_polynomials():
    xs = [0.4, 0.2, 0.1]
    assert extrapolate_to_zero(xs, [1 + 2 * x - x * x for x in xs]) == pytest.approx(1.0, abs=1e-14)


def test_prediction():
    assert md_exponent_prediction(GaussianProblem(1.0, 0.25)) == -1.0
    pred = md_exponent_prediction(DmsProblem(Pmf.bernoulli(0.11), HAM2, 0.05))
    assert pred == pytest.approx(-1 / (2 * dispersion_binary_hamming(0.11)), rel=1e-6)
    assert pred == pytest.approx(-1.16839, abs=1e-4)
    with pytest.raises(DegenerateDispersion):
        md_exponent_prediction(DmsProblem(Pmf.bernoulli(0.5), HAM2, 0.1))


def test_prediction_least_negative_at_dispersion_peak():
    grid = [0.05, 0.0832, 0.12, 0.2, 0.3]
    preds = [md_exponent_prediction(DmsProblem(Pmf.bernoulli(a), HAM2, 0.02)) for a in grid]
    assert int(np.argmin(np.abs(preds))) == 1
