import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from seplab.errors import BelowBoundary, ConfigError, DomainError, SteepnessError
from seplab.flow import (Chart, FlowConfig, PhasePoint, Verdict, classify, integrate, integrate_backward,
                         isocline, kinetic_barrier, map_plane, super_solution_bound, to_velocity)
from seplab.potential import Custom, Exponential, Higgs, Monomial


def rk4_exit(potential, phi, h, step=1e-4, phi_max=50.0):
    """Fixed-step RK4 on h' = sqrt(max(h^2 - v, 0)); returns (phi, h) where h^2 - v first hits zero."""
    def f(x, y):
        return math.sqrt(max(y * y - float(potential.v(x)), 0.0))

    while phi < phi_max:
        k1 = f(phi, h)
        k2 = f(phi + step / 2, h + step * k1 / 2)
        k3 = f(phi + step / 2, h + step * k2 / 2)
        k4 = f(phi + step, h + step * k3)
        h_new = h + step * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        if h_new * h_new - float(potential.v(phi + step)) <= 0:
            return phi, h
        phi, h = phi + step, h_new
    return None


def rk4_profile(potential, phi, h, phi_end, step=1e-3):
    def f(x, y):
        return math.sqrt(max(y * y - float(potential.v(x)), 0.0))

    xs, hs = [phi], [h]
    n = int(round((phi_end - phi) / step))
    for _ in range(n):
        k1 = f(phi, h)
        k2 = f(phi + step / 2, h + step * k1 / 2)
        k3 = f(phi + step / 2, h + step * k2 / 2)
        k4 = f(phi + step, h + step * k3)
        h += step * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        phi += step
        xs.append(phi)
        hs.append(h)
    return np.array(xs), np.array(hs)


# -- integrate ---------------------------------------------------------------

def test_higgs_exact_solution_in_chart_h():
    traj = integrate(Higgs(1.0), PhasePoint(2.0, 5.0), 6.0)
    assert np.max(np.abs(traj.h - (traj.phi ** 2 + 1))) < 1e-9
    assert traj.exit is None


def test_exponential_constant_in_frak_chart():
    pot = Exponential(0.5)
    traj = integrate(pot, PhasePoint(0.0, 1.0), 10.0, chart=Chart.FRAK_H)
    frak = traj.frak_h(pot)
    assert np.max(np.abs(frak - 1 / math.sqrt(0.75))) < 1e-8


def test_type_a_exit_matches_rk4_oracle():
    pot = Monomial(1)
    traj = integrate(pot, PhasePoint(2.0, 2.1), 50.0)
    oracle = rk4_exit(pot, 2.0, 2.1)
    assert traj.exit is not None and oracle is not None
    assert traj.exit.phi_exit == pytest.approx(oracle[0], abs=5e-4)
    assert traj.exit.h_exit == pytest.approx(math.sqrt(float(pot.v(traj.exit.phi_exit))), rel=1e-6)
    assert traj.h_prime[-1] == 0.0


def test_interior_matches_rk4_profile():
    pot = Monomial(1)
    x, h = rk4_profile(pot, 1.0, 3.0, 4.0)
    traj = integrate(pot, PhasePoint(1.0, 3.0), 4.0)
    assert np.max(np.abs(traj.h_at(x) - h) / h) < 1e-9


def test_start_on_boundary_exits_immediately():
    traj = integrate(Monomial(1), PhasePoint(2.0, 2.0), 10.0)
    assert traj.exit is not None
    assert traj.exit.phi_exit == pytest.approx(2.0)


def test_start_below_boundary_is_rejected():
    with pytest.raises(DomainError):
        integrate(Monomial(1), PhasePoint(2.0, 1.5), 5.0)
    with pytest.raises(ConfigError):
        integrate(Monomial(1), PhasePoint(2.0, 3.0), 1.0)


@pytest.mark.parametrize("chart", [Chart.FRAK_H, Chart.MASTER_Y])
def test_chart_consistency(chart):
    pot = Monomial(1)
    start = PhasePoint(1.0, 3.0)
    ref = integrate(pot, start, 6.0, chart=Chart.H)
    other = integrate(pot, start, 6.0, chart=chart)
    x = np.linspace(1.0, 6.0, 51)
    assert np.max(np.abs(other.h_at(x) / ref.h_at(x) - 1)) < 1e-8


def test_residual_on_interior_samples():
    pot = Higgs(0.5)
    traj = integrate(pot, PhasePoint(1.0, 4.0), 8.0)
    x, h, hp = traj.phi, traj.h, traj.h_prime
    assert np.all(np.abs(hp ** 2 - (h ** 2 - pot.v(x))) <= 1e-10 * (1 + h ** 2))


def test_integral_identity_in_frak_chart():
    pot = Monomial(2)
    start = PhasePoint(1.5, 6.0)
    traj = integrate(pot, start, 5.0, chart=Chart.FRAK_H)
    frak = lambda x: float(traj.h_at(x)) / float(pot.u(x))  # noqa: E731
    lhs, _ = quad(lambda x: math.sqrt(1 - 1 / frak(x) ** 2), start.phi, 5.0, limit=200)
    rhs = math.log(float(traj.h_at(5.0))) - math.log(start.h)
    assert lhs == pytest.approx(rhs, abs=1e-6)


h_pairs = st.tuples(st.floats(1.05, 3.0), st.floats(1.01, 2.0))


@settings(max_examples=25)
@given(h_pairs)
def test_monotone_ordering_of_ratios(pair):
    pot = Monomial(1)
    phi0 = 1.0
    h1 = pair[0] * float(pot.u(phi0))
    h2 = h1 * pair[1]
    t1 = integrate(pot, PhasePoint(phi0, h1), 6.0)
    t2 = integrate(pot, PhasePoint(phi0, h2), 6.0)
    end = min(t1.phi[-1], t2.phi[-1])
    if t1.exit is not None:
        end = min(end, t1.exit.phi_event)
    x = np.linspace(phi0, end, 40)[:-1]
    ratio = t2.h_at(x) / t1.h_at(x)
    assert np.all(np.diff(ratio) > 0)


@settings(max_examples=20)
@given(st.floats(0.5, 4.0), st.floats(1.01, 5.0))
def test_super_solution_bound_holds(phi0, scale):
    pot = Monomial(1)
    h0 = scale * max(float(pot.u(phi0)), 0.1)
    traj = integrate(pot, PhasePoint(phi0, h0), phi0 + 10.0)
    x = traj.phi[1:]
    assert np.all(traj.h[1:] < h0 * np.exp(x - phi0) * (1 + 1e-12))


def test_super_solution_bound_formula():
    assert super_solution_bound(1, 0, 0) == 1
    assert super_solution_bound(2, 1, 3) == pytest.approx(2 * math.e ** 2)
    with pytest.raises(ConfigError):
        super_solution_bound(1, 2, 1)


def test_backward_integration_is_stable():
    pot = Monomial(1)
    a = integrate_backward(pot, 20.0, 20.025, 0.0)
    b = integrate_backward(pot, 20.0, 20.03, 0.0)
    # the separatrix attracts in the backward direction
    assert abs(a.h[0] - b.h[0]) < 1e-6


# -- classify ----------------------------------------------------------------

def test_classify_examples():
    pot = Monomial(1)
    assert classify(pot, PhasePoint(2.0, 2.0)).verdict is Verdict.TYPE_A
    res = classify(pot, PhasePoint(2.0, 3.0))
    assert res.verdict is Verdict.TYPE_B
    assert res.growth_rate == pytest.approx(1.0, rel=0.05)
    lower = classify(pot, PhasePoint(2.0, 2.1))
    assert lower.verdict is Verdict.TYPE_A
    assert lower.phi_exit == pytest.approx(rk4_exit(pot, 2.0, 2.1)[0], abs=5e-4)


@pytest.mark.parametrize("scale", [1.1, 2.0, 10.0])
def test_steep_exponential_is_always_type_a(scale):
    pot = Custom("exp(2*phi)", phi0=0.0)
    res = classify(pot, PhasePoint(0.0, scale), horizon=200.0)
    assert res.verdict is Verdict.TYPE_A


def test_type_b_growth_rate_by_fifteen():
    for p in (1, 2):
        pot = Monomial(p)
        res = classify(pot, PhasePoint(1.0, 4.0), horizon=16.0, tail_span=15.0)
        assert res.verdict is Verdict.TYPE_B
        assert res.growth_rate == pytest.approx(1.0, rel=0.05)
        assert res.A_estimate is not None and math.isfinite(res.A_estimate)


def test_fallback_mode_reports_undetermined():
    pot = Custom("exp(2*phi)", phi0=0.0)
    res = classify(pot, PhasePoint(0.0, 30.0), horizon=20.0)
    assert res.verdict is Verdict.UNDETERMINED


def test_class_mode_requires_class():
    with pytest.raises(ConfigError):
        classify(Custom("exp(2*phi)", phi0=0.0), PhasePoint(0.0, 3.0), mode="class")


def test_classification_serializes():
    d = classify(Monomial(1), PhasePoint(2.0, 3.0)).to_dict()
    assert d["verdict"] == "TypeB"


def test_kinetic_barrier_values():
    # v = e^{phi}: 2 int e^{-s} ds = 2
    assert kinetic_barrier(Custom("exp(phi)", phi0=0.0), 1.0) == pytest.approx(2.0, rel=1e-8)
    assert kinetic_barrier(Custom("exp(2*phi)", phi0=0.0), 1.0) == math.inf
    assert kinetic_barrier(Monomial(1), 2.0) == pytest.approx(1 + 1 / 2 + 1 / 8, rel=1e-8)


# -- geometry ----------------------------------------------------------------

def test_isocline():
    assert isocline(Exponential(0.6), 3.0) == pytest.approx(1.25)
    assert isocline(Monomial(1), 2.0) == pytest.approx(1 / math.sqrt(0.75))
    assert isocline(Monomial(1), 1e6) == pytest.approx(1.0)
    with pytest.raises(SteepnessError):
        isocline(Monomial(1), 0.5)


def test_phase_plane_maps():
    pot = Monomial(1)
    p = map_plane(pot, (2.0, -1.0))
    assert p.h == pytest.approx(math.sqrt(5))
    assert to_velocity(pot, PhasePoint(2.0, math.sqrt(5))) == pytest.approx(-1.0)
    assert to_velocity(pot, PhasePoint(2.0, math.sqrt(5)), branch="D+") == pytest.approx(1.0)
    with pytest.raises(BelowBoundary):
        to_velocity(pot, PhasePoint(2.0, 1.0))


def test_higgs_separatrix_velocity():
    pot = Higgs(1.0)
    for x in (1.5, 3.0):
        assert to_velocity(pot, PhasePoint(x, x * x + 1)) == pytest.approx(-2 * x)


def test_stricter_tolerance_is_honoured():
    pot = Monomial(1)
    loose = integrate(pot, PhasePoint(1.0, 3.0), 4.0, config=FlowConfig(rtol=1e-6, atol=1e-8))
    tight = integrate(pot, PhasePoint(1.0, 3.0), 4.0)
    assert abs(loose.h[-1] - tight.h[-1]) < 1e-4 * tight.h[-1]
