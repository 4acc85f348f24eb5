import math

import numpy as np
import pytest

from seplab.errors import ConfigError, NoBracket, NotInClass, SeedTooCoarse
from seplab.flow import PhasePoint, Verdict, classify
from seplab.potential import Custom, EModel, Exponential, Higgs, ModulatedExp, Monomial, SteepWell
from seplab.separatrix import (backwards_inflation, exact_separatrix, find_separatrix_backward,
                               find_separatrix_shooting, leading_order, separatrix_series, sign_intervals,
                               tail_seed)


@pytest.mark.parametrize("p, ref", [(1, 0.56917264), (2, 0.954931)])
def test_monomial_separatrix_at_origin(p, ref):
    pot = Monomial(p, phi0=0.0)
    back = find_separatrix_backward(pot)
    shot = find_separatrix_shooting(pot)
    assert back.r == pytest.approx(ref, abs=1e-6)
    assert abs(back.r - shot.r) < 1e-8
    assert back.method == "Backward" and shot.method == "Shooting"


def test_shooting_certificates_bracket_the_value():
    res = find_separatrix_shooting(Monomial(1, phi0=0.0), tol=1e-9)
    (lo, va), (hi, vb) = res.certificates
    assert va is Verdict.TYPE_A and vb is Verdict.TYPE_B
    assert lo < res.r < hi
    assert hi - lo <= 1e-9
    assert res.bracket_width == pytest.approx(hi - lo)


def test_exponential_separatrix_is_the_exact_solution():
    pot = Exponential(0.5)
    res = find_separatrix_shooting(pot, phi0=0.0)
    assert res.r == pytest.approx(1.0, abs=1e-9)
    back = find_separatrix_backward(pot, phi0=0.0, phi_far=10.0)
    x = np.linspace(0, 10, 21)
    assert np.max(np.abs(back.trajectory.h_at(x) / np.exp(0.5 * x) - 1)) < 1e-10


def test_higgs_unit_separatrix():
    pot = Higgs(1.0)
    res = find_separatrix_backward(pot, phi0=1.5)
    assert res.r == pytest.approx(1.5 ** 2 + 1, rel=1e-12)


def test_steep_exponential_has_no_separatrix():
    with pytest.raises(NoBracket):
        find_separatrix_shooting(Custom("exp(2*phi)", phi0=0.0), phi0=0.0, horizon=200.0, ceiling=1e3)


def test_seed_too_coarse_is_detected():
    with pytest.raises(SeedTooCoarse):
        find_separatrix_backward(Monomial(1, phi0=0.0), phi_far=1.5, seed_order=1, tol=1e-12)


def test_backward_rejects_bad_range():
    with pytest.raises(ConfigError):
        find_separatrix_backward(Monomial(1, phi0=0.0), phi_far=0.0)


def test_starobinsky_tail_seed_matches_series():
    pot = EModel(1, 1.0)
    res = find_separatrix_backward(pot, phi0=0.0)
    s = separatrix_series(pot, 2)
    gap = float(res.trajectory.h_at(5.0)) - s(5.0)
    # the first omitted term is (-1/2) e^{-3 phi}
    assert gap == pytest.approx(-0.5 * math.exp(-15.0), rel=0.05)


def test_tail_seed_deviation_is_not_cancelled():
    pot = EModel(1, 1.0)
    h, d, last = tail_seed(pot, 40.0, 8)
    assert d == pytest.approx(0.5 * math.exp(-40.0), rel=1e-6)
    assert last > 0


def test_exact_separatrices():
    assert exact_separatrix(Monomial(1)) is None
    f = exact_separatrix(ModulatedExp())
    assert f(2.0) == pytest.approx(math.exp(2.0) / 2.0)


def test_leading_order_envelope():
    pot = SteepWell(0.5)
    env = leading_order(pot)
    assert env(3.0) == pytest.approx(float(pot.u(3.0)) / math.sqrt(0.75))
    with pytest.raises(NotInClass):
        leading_order(ModulatedExp())


def test_modulated_exponential_neighbours_separate():
    pot = ModulatedExp()
    h0 = float(pot.exact_solution(pot.phi0))
    up = classify(pot, PhasePoint(pot.phi0, h0 + 1e-3), horizon=pot.phi0 + 200.0)
    down = classify(pot, PhasePoint(pot.phi0, h0 - 1e-3), horizon=pot.phi0 + 200.0)
    assert up.verdict is Verdict.TYPE_B
    assert down.verdict is Verdict.TYPE_A


def test_sign_intervals():
    x = np.linspace(0, 10, 101)
    f = np.sin(x)
    got = sign_intervals(x, f, lambda t: math.sin(t))
    assert len(got) == 2
    assert got[0] == pytest.approx((math.pi, 2 * math.pi), abs=1e-10)
    assert got[1][0] == pytest.approx(3 * math.pi, abs=1e-10)
    assert got[1][1] == pytest.approx(10.0)
    assert sign_intervals(x, np.ones_like(x)) == []


@pytest.mark.parametrize("alpha, flag", [(0.4, True), (0.5, True), (0.6, False), (0.7, False)])
def test_backwards_inflation_threshold(alpha, flag):
    pot = Exponential(alpha)
    rep = backwards_inflation(pot, find_separatrix_backward(pot, phi_far=20.0))
    assert rep.asymptotic is flag
    # the exact separatrix has h^2 / v constant, so the interval is all or nothing
    assert bool(rep.intervals) is flag


def test_quadratic_separatrix_inflation_region():
    pot = Monomial(1, phi0=0.0)
    rep = backwards_inflation(pot, find_separatrix_backward(pot))
    assert rep.asymptotic
    # h_s is about phi for large phi, so h^2 < 1.5 phi^2 holds beyond a finite point
    assert rep.intervals and rep.intervals[-1][1] == pytest.approx(20.0)
