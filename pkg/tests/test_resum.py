import math
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seplab.errors import ConfigError, SignError, SingularPadeSystem
from seplab.potential import Monomial
from seplab.resum import (ErfcApproximant, educated_match, erfcx, eval_erfc_approximant, eval_pade, pade,
                          quartic_approximant)
from seplab.separatrix import find_separatrix_backward, separatrix_series
from seplab.series import InversePower, TruncatedSeries, tail


def mp_erfcx(z):
    with mpmath.workdps(40):
        return float(mpmath.exp(mpmath.mpf(z) ** 2) * mpmath.erfc(mpmath.mpf(z)))


@settings(max_examples=300)
@given(st.floats(-20.0, 1e6))
def test_erfcx_matches_mpmath(z):
    ref = mp_erfcx(z)
    assert erfcx(z) == pytest.approx(ref, rel=2e-15)


@pytest.mark.parametrize("z", [0.0, 1e-8, 2.999999, 3.0, 3.000001, 10.0, 27.0, 1e3, 1e10])
def test_erfcx_switch_points(z):
    assert erfcx(z) == pytest.approx(mp_erfcx(z), rel=2e-15)


def test_erfcx_limits_and_vectorization():
    assert erfcx(math.inf) == 0.0
    assert erfcx(-30.0) == math.inf
    assert math.isnan(erfcx(math.nan))
    z = np.array([0.0, 1.0, 5.0])
    assert np.allclose(erfcx(z), [mp_erfcx(x) for x in z], rtol=2e-15)


def test_educated_match_quadratic_values():
    a = educated_match(F(1, 2), F(-5, 8))
    assert a.s == pytest.approx(0.4)
    assert a.c == pytest.approx(math.sqrt(math.pi / 10))
    assert a(0.0) == pytest.approx(math.sqrt(math.pi / 10))


def test_educated_match_reproduces_two_tail_coefficients():
    a = educated_match(F(1, 2), F(-5, 8))
    b0, b1, b2 = a.tail_coefficients(3)
    assert b0 == pytest.approx(0.5)
    assert b1 == pytest.approx(-0.625)
    # the third coefficient is a prediction; it lands within 2% of 37/16
    assert b2 == pytest.approx(37 / 16, rel=0.02)


def test_educated_match_sign_errors():
    with pytest.raises(SignError):
        educated_match(0.5, 0.625)
    with pytest.raises(SignError):
        educated_match(-0.5, 0.625)


def test_approximant_large_phi_tracks_series():
    a = educated_match(F(1, 2), F(-5, 8))
    s = separatrix_series(Monomial(1), 3)
    for x in (20.0, 50.0):
        assert a(x) == pytest.approx(s(x), rel=1e-7)


def test_quartic_approximant_is_fixed():
    q = quartic_approximant()
    assert (q.polynomial_part, q.prefactor, q.s) == ((1, 0, 1), (0, 1), 0.25)
    assert q.c == pytest.approx(math.sqrt(math.pi / 2))
    assert q(0.0) == 1.0


def test_quartic_approximant_at_ten_is_close():
    sep = find_separatrix_backward(Monomial(2, phi0=0.0), phi_far=20.0)
    assert abs(quartic_approximant()(10.0) / float(sep.trajectory.h_at(10.0)) - 1) < 0.004


def test_erfc_approximant_validation():
    with pytest.raises(ConfigError):
        ErfcApproximant((0, 1), (1,), 1.0, 0.0)
    with pytest.raises(ConfigError):
        ErfcApproximant((0, 1), (1, 2, 3), 1.0, 1.0)
    a = ErfcApproximant((0, 1), (1,), 1.0, 1.0)
    assert eval_erfc_approximant(a, 0.0) == pytest.approx(1.0)


# -- Pade ----------------------------------------------------------------

def quadratic_tail(order=4):
    return tail(separatrix_series(Monomial(1), order), 1)


def test_pade_one_one_exact():
    p = pade(quadratic_tail(), 1, 1)
    assert p.denominator == (1, F(37, 10))
    assert p.numerator == (F(1, 2), F(1, 2) * F(37, 10) - F(5, 8))
    assert p.numerator[1] == F(49, 40)
    assert list(p.poles()) == [0.0]


def test_pade_two_two_near_origin():
    s = separatrix_series(Monomial(1), 6)
    p = pade(tail(s, 1), 2, 2)
    sep = find_separatrix_backward(Monomial(1, phi0=0.0), phi_far=20.0)
    value = 2.0 + eval_pade(p, 2.0)
    assert abs(value - float(sep.trajectory.h_at(2.0))) < 1e-3


@settings(max_examples=40)
@given(st.lists(st.fractions(-5, 5, max_denominator=5), min_size=5, max_size=5).filter(lambda c: c[0] != 0),
       st.integers(0, 2), st.integers(0, 2))
def test_pade_matches_series_coefficients(coeffs, m, n):
    s = TruncatedSeries.from_terms(InversePower(), {1 + 2 * k: c for k, c in enumerate(coeffs)}, prec=11, step=2)
    try:
        p = pade(s, m, n)
    except SingularPadeSystem:
        return
    # D(y) * series - N(y) vanishes through y^(m+n)
    c = s.coeffs
    for k in range(m + n + 1):
        conv = sum(p.denominator[j] * c[k - j] for j in range(0, min(k, n) + 1))
        target = p.numerator[k] if k <= m else 0
        assert conv == target


def test_pade_order_validation():
    with pytest.raises(ConfigError):
        pade(quadratic_tail(2), 2, 2)
    with pytest.raises(ConfigError):
        pade(quadratic_tail(), -1, 1)


def test_pade_singular_system():
    s = TruncatedSeries.from_terms(InversePower(), {0: 1}, prec=6)
    with pytest.raises(SingularPadeSystem):
        pade(s, 1, 2)


def test_pade_phi_polynomials():
    p = pade(quadratic_tail(), 1, 1)
    num, den = p.phi_polynomials()
    for x in (0.7, 3.0):
        assert num(x) / den(x) == pytest.approx(p(x), rel=1e-14)
