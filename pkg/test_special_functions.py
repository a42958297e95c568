#!/usr/bin/env python3
"""Special functions against mpmath, scipy.special and exact rational sums."""

import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import scipy.special

from app.errors import PoleError
from app.models import HypergeometricParams
from app.services.oracle_service import oracle_service
from app.services.special_functions import special_functions


@pytest.mark.parametrize("z", [0.5, 3.7, 12.25, 1 + 2j, -2.5 + 0.3j, 0.1 - 4j])
def test_log_gamma_matches_scipy(z):
    assert special_functions.log_gamma(z) == pytest.approx(complex(scipy.special.loggamma(complex(z))), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("z", [0, -1, -4])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        special_functions.log_gamma(z)


def test_log_gamma_recurrence():
    rng = np.random.default_rng(11)
    points = rng.uniform(-4, 8, 40) + 1j * rng.choice([-1, 1], 40) * rng.uniform(0.2, 3, 40)
    for z in points:
        assert cmath.exp(special_functions.log_gamma(z + 1)) == pytest.approx(z * cmath.exp(special_functions.log_gamma(z)), rel=1e-12)


def test_pochhammer():
    assert special_functions.pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)
    assert special_functions.pochhammer(2 + 1j, 0) == 1


@pytest.mark.parametrize("a, b, z", [
    (0.25 - 0.3j, 0.5, 0.2j),
    (0.75 + 1.1j, 1.5, -0.8 + 0.4j),
    (1.5 - 2.0j, 3.0, 2.5j),
    (2.0, 1.0, -6.0),
    (0.25, 0.5, 4.0 - 1.0j),
])
def test_kummer_matches_mpmath(a, b, z):
    expected = complex(mpmath.hyp1f1(a, b, z))
    assert special_functions.kummer_m(a, b, z) == pytest.approx(expected, rel=1e-12)


def test_kummer_contiguous_relation():
    rng = np.random.default_rng(5)
    for _ in range(30):
        a = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        b = complex(rng.uniform(0.5, 3), rng.uniform(-0.5, 0.5))
        z = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        upper = special_functions.kummer_m(a + 1, b, z)
        shifted = z / b * special_functions.kummer_m(a + 1, b + 1, z)
        scale = abs(upper) + abs(shifted) + 1
        assert abs(special_functions.kummer_m(a, b, z) - (upper - shifted)) <= 1e-10 * scale, (a, b, z)


def test_kummer_terminates_for_negative_integer_a():
    # M(-2, b, z) = 1 - 2z/b + z²/(b(b+1))
    b, z = 1.5, 0.7 + 0.1j
    expected = 1 - 2 * z / b + z * z / (b * (b + 1))
    assert special_functions.kummer_m(-2, b, z) == pytest.approx(expected, rel=1e-14)


def test_kummer_pole_in_b():
    with pytest.raises(PoleError):
        special_functions.kummer_series(0.5, -1, 0.3)


def test_kummer_term_cap_flags_non_convergence():
    series = special_functions.kummer_series(1.0, 1.0, 5.0, max_terms=3)
    assert not series.converged
    assert series.terms == 3


def _exact_terminating(n, a, c, z):
    total, term = Fraction(1), Fraction(1)
    for l in range(n):
        term *= Fraction(-n + l) * (a + l) / ((c + l) * (l + 1)) * z
        total += term
    return total


@pytest.mark.parametrize("a, c", [(Fraction(1, 4), Fraction(1, 2)), (Fraction(3, 4), Fraction(3, 2)), (Fraction(1, 3), Fraction(5, 2))])
def test_terminating_sequence_matches_exact_sum(a, c):
    values = special_functions.gauss_2f1_terminating_sequence(25, float(a), float(c), 2.0)
    for n in (0, 1, 2, 7, 16, 25):
        assert values[n] == pytest.approx(float(_exact_terminating(n, a, c, Fraction(2))), rel=1e-10, abs=1e-12)


def test_terminating_sequence_matches_mpmath_for_complex_a():
    a, c = 0.25 - 0.8j, 0.5
    values = special_functions.gauss_2f1_terminating_sequence(30, a, c, 2.0)
    for n in (3, 11, 30):
        expected = complex(mpmath.hyp2f1(-n, a, c, 2))
        assert values[n] == pytest.approx(expected, rel=1e-10)


def test_finite_sum_and_sequence_agree_for_small_orders():
    a, c = 0.75 + 0.2j, 1.5
    values = special_functions.gauss_2f1_terminating_sequence(6, a, c, 2.0)
    for n in range(7):
        assert special_functions.gauss_2f1_terminating(n, a, c, 2.0) == pytest.approx(values[n], rel=1e-12)


def test_evaluate_dispatches_on_terminating_order():
    terminating = HypergeometricParams(a=0.25, b=0.5, z=2.0, terminating_order=3)
    confluent = HypergeometricParams(a=0.25, b=0.5, z=0.3j)
    assert special_functions.evaluate(terminating) == pytest.approx(special_functions.gauss_2f1_terminating(3, 0.25, 0.5, 2.0))
    assert special_functions.evaluate(confluent) == pytest.approx(special_functions.kummer_m(0.25, 0.5, 0.3j))


@pytest.mark.parametrize("m", [0, 1, 4, 9])
def test_laguerre_matches_scipy(m):
    for x in (0.0, 0.3, 2.5, 7.0):
        expected = scipy.special.eval_genlaguerre(m, -0.5, x)
        assert special_functions.laguerre_assoc(m, -0.5, x).real == pytest.approx(expected, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("m", [0, 1, 5, 12, 20])
def test_laguerre_reproduces_raised_vacuum(m):
    x = np.linspace(-2.5, 2.5, 21)
    closed = np.array([
        math.pi ** -0.25 * math.exp(-xi * xi / 2) * (-2) ** m * math.factorial(m)
        * special_functions.laguerre_assoc(m, -0.5, xi * xi)
        for xi in x
    ])
    assert oracle_service.relative_deviation(closed, oracle_service.raised_vacuum_position(m, x)) < 1e-8


def test_laguerre_half_order_matches_scipy():
    for m in (0, 3, 8):
        for x in (0.0, 1.2, 4.0):
            expected = scipy.special.eval_genlaguerre(m, 0.5, x)
            assert special_functions.laguerre_assoc(m, 0.5, x).real == pytest.approx(expected, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("a, c", [(0.25, 0.5), (0.75 - 0.6j, 1.5), (1.5 + 0.2j, 3.0)])
def test_terminating_gamma_sum_matches_recurrence(a, c):
    values = special_functions.gauss_2f1_terminating_sequence(12, a, c, 2.0)
    for n in range(13):
        expected = values[n] / math.factorial(n)
        assert special_functions.terminating_gamma_sum(n, a, c) == pytest.approx(expected, rel=1e-10, abs=1e-14)
    weighted = special_functions.terminating_gamma_sum(6, a, c, log_weight=math.log(720.0))
    assert weighted == pytest.approx(values[6], rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("z", [0.3, 0.2 + 0.4j, -1.5 + 0.2j, 0.7j])
def test_complex_arctan_matches_cmath(z):
    assert special_functions.complex_arctan(z) == pytest.approx(cmath.atan(z), rel=1e-13)


def test_complex_arctan_poles():
    with pytest.raises(PoleError):
        special_functions.complex_arctan(1j)


def test_scaled_arctan_branch_and_limit():
    lam, scale, w = 0.7 + 0.1j, 0.09j, 0.8 - 0.3j
    plus = special_functions.scaled_arctan(lam, scale, w, root=1)
    minus = special_functions.scaled_arctan(lam, scale, w, root=-1)
    assert plus == pytest.approx(minus, rel=1e-13)
    assert special_functions.scaled_arctan(lam, 0, w) == lam * w
    assert special_functions.scaled_arctan(lam, 1e-14, w) == pytest.approx(lam * w, rel=1e-6)


def test_principal_power():
    assert special_functions.principal_power(-4, 0.5) == pytest.approx(2j)
    with pytest.raises(PoleError):
        special_functions.principal_power(0, -0.25)
    assert np.isfinite(special_functions.principal_power(1 + 0.3j, -0.75))
