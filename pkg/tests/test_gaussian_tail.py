import math

import mpmath
import numpy as np
import pytest

from mdlossy.errors import DomainError
from mdlossy.exponents import gaussian_correct_exponent, gaussian_excess_exponent
from mdlossy.md_empirics import gaussian_tail_curve, gaussian_tail_logprob, make_epsilon
from mdlossy.rd_solver import GaussianProblem

G = GaussianProblem(1.0, 0.25)


def mp_two_sided(n, eps):
    with mpmath.workdps(50):
        up = mpmath.gammainc(n / 2, a=n * mpmath.e ** (2 * eps) / 2, regularized=True)
        lo = mpmath.gammainc(n / 2, a=0, b=n * mpmath.e ** (-2 * eps) / 2, regularized=True)
        return float(mpmath.log(up + lo)), float(mpmath.log(lo))


def test_two_dof_upper_tail():
    assert gaussian_tail_logprob(2, 0.1, tails="upper") == pytest.approx(-math.exp(0.2), rel=1e-14)
    assert gaussian_tail_logprob(2, 0.1, tails="upper") == pytest.approx(-1.221403, abs=1e-6)


@pytest.mark.parametrize("n,eps", [(2, 0.1), (10, 0.3), (100, 0.2), (1000, 0.1), (3000, 0.05)])
def test_against_mpmath(n, eps):
    both, lower = mp_two_sided(n, eps)
    assert gaussian_tail_logprob(n, eps) == pytest.approx(both, rel=1e-10)
    assert gaussian_tail_logprob(n, eps, side="correct") == pytest.approx(lower, rel=1e-10)


def test_curve_moderate_deviation():
    curve = gaussian_tail_curve(G, make_epsilon(1, 1 / 3, "gaussian"), [10**3, 10**4, 10**5, 10**6])
    assert curve.target == -1.0
    gaps = curve.gaps()
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 0.1
    assert np.all(np.isfinite(curve.z))


def test_curve_correct_side():
    curve = gaussian_tail_curve(G, make_epsilon(1, 1 / 3, "gaussian"), [10**3, 10**4, 10**5, 10**6], side="correct")
    assert np.all(np.diff(curve.gaps()) < 0)
    assert abs(curve.rows[-1].z + 1) < 0.1


def test_large_deviation_upper_tail_matches_excess_exponent():
    base = 0.5 * math.log(4)
    curve = gaussian_tail_curve(G, 0.1, [10**5], tails="upper")
    rate = curve.rows[0].logp / 10**5
    assert rate == pytest.approx(-gaussian_excess_exponent(G, base + 0.1), rel=0.02)


def test_large_deviation_two_sided_is_set_by_lower_tail():
    base = 0.5 * math.log(4)
    curve = gaussian_tail_curve(G, 0.1, [10**5])
    rate = curve.rows[0].logp / 10**5
    assert rate == pytest.approx(-gaussian_correct_exponent(G, base - 0.1), rel=0.02)


def test_no_underflow_deep_in_tail():
    val = gaussian_tail_logprob(10**7, 0.2)
    assert math.isfinite(val) and val < -1e5


def test_validation():
    with pytest.raises(DomainError):
        gaussian_tail_logprob(10, 0.1, side="both")
    with pytest.raises(DomainError):
        gaussian_tail_logprob(10, 0.1, tails="lower")
    with pytest.raises(DomainError):
        gaussian_tail_logprob(0, 0.1)
