"""Cosmic time along a trajectory: t(phi) = -int dphi / h'(phi), blow-up and inflation intervals."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .errors import ConfigError, InsufficientTail, NonmonotonicInput
from .flow import ClassificationResult, PhasePoint, Trajectory, Verdict, classify
from .potential import EModel, Higgs, Monomial, PotentialSpec, classify_class_alpha
from .separatrix import sign_intervals

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass
class InflatonSolution:
    t: np.ndarray
    phi: np.ndarray
    h: np.ndarray
    phidot: np.ndarray

    def __post_init__(self):
        # cubic Hermite interpolation with the exact slopes dphi/dt and dh/dt = h' phidot
        keep = np.concatenate([[True], np.diff(self.t) > 0])
        t = self.t[keep]
        self._phi = CubicHermiteSpline(t, self.phi[keep], self.phidot[keep])
        self._h = CubicHermiteSpline(t, self.h[keep], np.abs(self.phidot[keep]) * self.phidot[keep])

    def phi_at(self, t):
        return self._phi(t)

    def h_at(self, t):
        return self._h(t)


class BlowUpCriterion(str, enum.Enum):
    QUADRATURE_CONVERGED = "QuadratureConverged"
    ASYMPTOTIC_INTEGRABLE = "AsymptoticIntegrable"
    ASYMPTOTIC_NONINTEGRABLE = "AsymptoticNonintegrable"
    BOUNDARY_EXIT = "BoundaryExit"


@dataclass(frozen=True)
class BlowUpReport:
    blows_up: bool
    t_star: float | None
    criterion: BlowUpCriterion
    t_exit: float | None = None

    def to_dict(self) -> dict:
        out = {"blows_up": self.blows_up, "criterion": self.criterion.value,
               "t_star": self.t_star}
        if self.t_exit is not None:
            out["t_exit"] = self.t_exit
        return out


def _inverse_slope(traj: Trajectory):
    return lambda x: 1.0 / traj.h_prime_at(x)


def _gauss(f, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def _exit_gap_time(potential: PotentialSpec, traj: Trajectory, a: float) -> float:
    """int_a^{phi_exit} dphi/h' with phi = phi_exit - sigma^2 (bounded integrand)."""
    pe = traj.exit.phi_exit
    span = pe - a
    if span <= 0:
        return 0.0
    # The dense output ends at the event point; beyond it the local model
    # h'^2 ~ v'(phi_exit) (phi_exit - phi) carries the last stretch.
    pev = traj.exit.phi_event
    total = 0.0
    if pev > a:
        smax = math.sqrt(pe - a)
        smin = math.sqrt(pe - pev)

        def g(sig):
            return 2.0 * sig / traj.h_prime_at(pe - sig * sig)
        total += _gauss(g, smin, smax)
    rest = pe - max(a, pev)
    total += 2.0 * math.sqrt(rest) / math.sqrt(float(potential.dv(pe)))
    return total


def _interval_times(potential: PotentialSpec, traj: Trajectory) -> np.ndarray:
    """int over each consecutive sample interval of dphi/h'."""
    phi = traj.phi
    n = len(phi)
    out = np.empty(n - 1)
    last = n - 2 if traj.exit is not None else n - 1
    if traj.exit is not None:
        # In sigma = sqrt(phi_exit - phi) the square-root zero of h' is removed,
        # which keeps the intervals crowding the exit as accurate as the rest.
        pe = traj.exit.phi_exit

        def g(sig):
            return 2.0 * sig / traj.h_prime_at(pe - sig * sig)
    for i in range(n - 1):
        a, b = float(phi[i]), float(phi[i + 1])
        if traj.exit is not None and i >= last:
            out[i] = _exit_gap_time(potential, traj, a)
        elif traj.exit is not None:
            out[i] = _gauss(g, math.sqrt(pe - b), math.sqrt(pe - a))
        else:
            out[i] = _gauss(_inverse_slope(traj), a, b)
    return out


def _refine(traj: Trajectory, max_gap: float) -> Trajectory:
    """The same trajectory sampled at least every `max_gap` in phi."""
    phi = traj.phi
    pieces = [phi[:1]]
    for a, b in zip(phi[:-1], phi[1:]):
        k = max(1, int(math.ceil((b - a) / max_gap)))
        pieces.append(np.linspace(a, b, k + 1)[1:])
    grid = np.concatenate(pieces)
    if len(grid) == len(phi):
        return traj
    if traj.interpolant is None:
        raise ConfigError("refinement needs a dense trajectory")
    end = traj.exit.phi_event if traj.exit is not None else grid[-1]
    inner = grid[grid <= end]
    h = traj.h_at(inner)
    hp = traj.h_prime_at(inner)
    rows = np.column_stack([inner, h, hp])
    if traj.exit is not None:
        rows = np.vstack([rows, [traj.exit.phi_exit, traj.exit.h_exit, 0.0]])
    return Trajectory(rows, traj.chart, traj.exit, traj.interpolant, traj.slope_interpolant)


def reconstruct_time(potential: PotentialSpec, traj: Trajectory, phi_at_t0: float | None = None,
                     branch: str = "D-", max_gap: float = 0.25) -> InflatonSolution:
    """t(phi) with t = 0 at `phi_at_t0` (default: the left end of the trajectory).

    On the D- branch phidot = -h' and time runs opposite to phi; the D+ branch
    is the mirror image, obtained by flipping the sign of t and phidot.
    """
    if branch not in ("D-", "D+"):
        raise ConfigError(f"branch must be 'D-' or 'D+', got {branch!r}")
    phi = traj.phi
    if len(phi) < 2 or np.any(np.diff(phi) <= 0):
        raise NonmonotonicInput("trajectory samples must have strictly increasing phi")
    interior = traj.h_prime[:-1] if traj.exit is not None else traj.h_prime
    if np.any(interior[1:] <= 0):
        raise NonmonotonicInput("h' must stay positive on the interior of the trajectory")
    phi_at_t0 = float(phi[0]) if phi_at_t0 is None else float(phi_at_t0)
    if not phi[0] <= phi_at_t0 <= phi[-1]:
        raise ConfigError(f"phi_at_t0={phi_at_t0} lies outside the trajectory range")
    traj = _refine(traj, max_gap)
    phi = traj.phi
    dt = _interval_times(potential, traj)
    s = np.concatenate([[0.0], np.cumsum(dt)])  # s(phi) = int_{phi[0]}^{phi} dphi/h'
    k = int(np.searchsorted(phi, phi_at_t0, side="right") - 1)
    k = min(max(k, 0), len(phi) - 2)
    if phi_at_t0 == phi[k]:
        s0 = s[k]
    else:
        s0 = s[k] + _gauss(_inverse_slope(traj), float(phi[k]), phi_at_t0)
    t = -(s - s0)
    hp = traj.h_prime
    sign = 1.0
    if branch == "D+":
        t, sign = -t, -1.0
    order = np.argsort(t)
    return InflatonSolution(t[order], phi[order], traj.h[order], (-sign * hp)[order])


# -- blow-up ------------------------------------------------------------

def _kappa(potential: PotentialSpec, phi: float, h: float, hp: float) -> float:
    """h''/h' = (2 h h' - v')/(2 h'^2); the local exponential rate of h'."""
    return (2.0 * h * hp - float(potential.dv(phi))) / (2.0 * hp * hp)


def _slow_roll_integrable(potential: PotentialSpec) -> bool:
    """Whether 1/(sqrt v)' is integrable at infinity."""
    if isinstance(potential, Monomial):
        return potential.p >= 3
    if isinstance(potential, (Higgs, EModel)):
        return False
    # numerical fallback: integrals over doubling windows shrink geometrically
    # exactly when the tail converges faster than 1/phi
    x0 = max(potential.phi0, 1.0) + 10.0
    pieces = []
    for k in range(8):
        a, b = x0 * 2 ** k, x0 * 2 ** (k + 1)
        val, _ = quad(lambda x: 1.0 / float(potential.du(x)), a, b, limit=200)
        pieces.append(val)
    ratios = [pieces[i + 1] / pieces[i] for i in range(len(pieces) - 1) if pieces[i] > 0]
    if len(ratios) < 2:
        return True
    return ratios[-1] < 0.9 and ratios[-2] < 0.9


def _span_time(potential: PotentialSpec, traj: Trajectory) -> float:
    return float(np.sum(_interval_times(potential, _refine(traj, 0.25))))


def blow_up(potential: PotentialSpec, traj: Trajectory, separatrix: bool = False,
            classification: ClassificationResult | None = None, rate_tol: float = 0.05) -> BlowUpReport:
    """Does phi(t) reach infinity at a finite (negative) time t*, with t = 0 at the left end?

    Separatrices are decided asymptotically: alpha > 0 gives an exponential h'
    and a convergent tail; for alpha = 0 convergence is that of
    int 1/(sqrt v)'.  Other trajectories are classified first: type-B ones
    enter kinetic dominance (h' ~ h ~ e^phi) and the quadrature converges.
    """
    if traj.exit is not None:
        sol = reconstruct_time(potential, traj)
        return BlowUpReport(False, None, BlowUpCriterion.BOUNDARY_EXIT, t_exit=float(sol.t[0]))
    phi_e, h_e, hp_e = (float(x) for x in traj.samples[-1])
    if separatrix:
        verdict = classify_class_alpha(potential)
        if not verdict.in_class:
            raise ConfigError("the asymptotic blow-up test needs a potential in C_alpha")
        alpha = verdict.alpha
        if alpha > 0:
            k = _kappa(potential, phi_e, h_e, hp_e)
            if abs(k - alpha) > rate_tol * alpha:
                raise InsufficientTail(f"h' has not reached its exponential tail (rate {k:.4g} vs {alpha:.4g})")
            t_star = -(_span_time(potential, traj) + 1.0 / (k * hp_e))
            return BlowUpReport(True, t_star, BlowUpCriterion.ASYMPTOTIC_INTEGRABLE)
        if not _slow_roll_integrable(potential):
            return BlowUpReport(False, None, BlowUpCriterion.ASYMPTOTIC_NONINTEGRABLE)
        tail, _ = quad(lambda x: 1.0 / float(potential.du(x)), phi_e, math.inf, limit=200)
        t_star = -(_span_time(potential, traj) + tail)
        return BlowUpReport(True, t_star, BlowUpCriterion.ASYMPTOTIC_INTEGRABLE)
    if classification is None:
        classification = classify(potential, PhasePoint(float(traj.phi[0]), float(traj.h[0])),
                                  horizon=max(phi_e, float(traj.phi[0]) + 40.0), keep_trajectory=False)
    if classification.verdict is Verdict.TYPE_A:
        return BlowUpReport(False, None, BlowUpCriterion.BOUNDARY_EXIT)
    if classification.verdict is Verdict.UNDETERMINED:
        raise InsufficientTail("the trajectory is neither type A nor type B within its horizon")
    k = _kappa(potential, phi_e, h_e, hp_e)
    if abs(k - 1.0) > rate_tol:
        raise InsufficientTail(f"the trajectory has not reached kinetic dominance (rate {k:.4g})")
    t_star = -(_span_time(potential, traj) + 1.0 / (k * hp_e))
    return BlowUpReport(True, t_star, BlowUpCriterion.QUADRATURE_CONVERGED)


# -- inflation ------------------------------------------------------------

def inflation_intervals(solution: InflatonSolution, potential: PotentialSpec) -> list[tuple[float, float]]:
    """Maximal t-intervals on which h < sqrt(3v/2)."""
    t, phi, h = solution.t, solution.phi, solution.h
    g = h * h - 1.5 * potential.v(phi)

    def f(x):
        return float(np.interp(x, t, h)) ** 2 - 1.5 * float(potential.v(np.interp(x, t, phi)))

    return sign_intervals(t, g, f)
