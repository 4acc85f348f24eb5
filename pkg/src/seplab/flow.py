"""Hamilton-Jacobi flow ``h' = sqrt(h^2 - v)`` on the region h > sqrt(v).

Charts
------
``H``        the Hubble function h itself.
``FRAK_H``   frak_h = h/sqrt(v), with frak_h' = sqrt(frak_h^2 - 1) - frak_v frak_h.
``MASTER_Y`` y = log frak_h, with y' = sqrt(1 - exp(-2y)) - frak_v.
``DEVIATION`` d = h - sqrt(v), with d' = sqrt(d (2u + d)) - u'.  Not part of the
             public chart menu in the CLI; it keeps full relative precision
             when h hugs the slow-roll envelope, which is what the backward
             separatrix solve needs.

Trajectories always report samples as (phi, h, h') regardless of chart.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import (BelowBoundary, ConfigError, DomainError, InconclusiveLimit, SteepnessError,
                     StepUnderflow)
from .potential import PotentialSpec, classify_class_alpha


class Chart(str, enum.Enum):
    H = "H"
    FRAK_H = "FrakH"
    MASTER_Y = "MasterY"
    DEVIATION = "Deviation"


@dataclass(frozen=True)
class PhasePoint:
    phi: float
    h: float


@dataclass(frozen=True)
class FlowConfig:
    rtol: float = 1e-12
    atol: float = 1e-14
    method: str = "DOP853"
    boundary_eps: float = 1e-12
    max_step: float = math.inf
    dense: bool = True


DEFAULT_CONFIG = FlowConfig()


@dataclass(frozen=True)
class BoundaryExit:
    phi_exit: float
    h_exit: float
    phi_event: float
    slope: float


@dataclass
class Trajectory:
    samples: np.ndarray  # rows (phi, h, h')
    chart: Chart
    exit: BoundaryExit | None = None
    interpolant: object = field(default=None, repr=False)
    slope_interpolant: object = field(default=None, repr=False)

    @property
    def phi(self):
        return self.samples[:, 0]

    @property
    def h(self):
        return self.samples[:, 1]

    @property
    def h_prime(self):
        return self.samples[:, 2]

    @property
    def phi_range(self):
        return float(self.samples[0, 0]), float(self.samples[-1, 0])

    def h_at(self, phi):
        """Dense-output value of h (NaN outside the integrated span)."""
        if self.interpolant is None:
            return np.interp(phi, self.phi, self.h, left=np.nan, right=np.nan)
        return self.interpolant(phi)

    def h_prime_at(self, phi):
        """Dense-output value of h' (NaN outside the integrated span)."""
        if self.slope_interpolant is None:
            return np.interp(phi, self.phi, self.h_prime, left=np.nan, right=np.nan)
        return self.slope_interpolant(phi)

    def frak_h(self, potential: PotentialSpec):
        return self.h / potential.u(self.phi)


# -- chart right-hand sides -------------------------------------------------

def _rhs(potential: PotentialSpec, chart: Chart):
    u, du, fv = potential.u, potential.du, potential.frak_v
    if chart is Chart.H:
        def f(phi, y):
            uu = u(phi)
            g = (y[0] - uu) * (y[0] + uu)
            return [math.sqrt(g) if g > 0 else 0.0]
    elif chart is Chart.FRAK_H:
        def f(phi, y):
            g = y[0] * y[0] - 1.0
            return [(math.sqrt(g) if g > 0 else 0.0) - fv(phi) * y[0]]
    elif chart is Chart.MASTER_Y:
        def f(phi, y):
            g = -math.expm1(-2.0 * y[0])
            return [(math.sqrt(g) if g > 0 else 0.0) - fv(phi)]
    else:
        def f(phi, y):
            uu = u(phi)
            g = y[0] * (2.0 * uu + y[0])
            return [(math.sqrt(g) if g > 0 else 0.0) - du(phi)]
    return f


def _jac(potential: PotentialSpec, chart: Chart):
    if chart is not Chart.DEVIATION:
        return None
    u = potential.u

    def jac(phi, y):
        uu = u(phi)
        g = y[0] * (2.0 * uu + y[0])
        return [[(uu + y[0]) / math.sqrt(g) if g > 0 else 1e300]]
    return jac


def _to_chart(potential, chart, phi, h):
    if chart is Chart.H:
        return h
    if chart is Chart.FRAK_H:
        return h / potential.u(phi)
    if chart is Chart.MASTER_Y:
        return math.log(h / potential.u(phi))
    return h - potential.u(phi)


def _from_chart(potential, chart, phi, y):
    if chart is Chart.H:
        return y
    if chart is Chart.FRAK_H:
        return y * potential.u(phi)
    if chart is Chart.MASTER_Y:
        return np.exp(y) * potential.u(phi)
    return y + potential.u(phi)


def _gap(potential, chart, phi, y):
    """Boundary function: positive inside R, zero on the lower boundary."""
    if chart is Chart.H:
        uu = potential.u(phi)
        return (y - uu) * (y + uu)
    if chart is Chart.FRAK_H:
        return y * y - 1.0
    if chart is Chart.MASTER_Y:
        return -math.expm1(-2.0 * y)
    return y * (2.0 * potential.u(phi) + y)


def _gap_threshold(potential, chart, phi, eps):
    if chart is Chart.H or chart is Chart.DEVIATION:
        return eps * (1.0 + potential.v(phi))
    return eps


def _h_prime(potential, phi, h):
    u = potential.u(phi)
    g = (h - u) * (h + u)
    return np.sqrt(np.maximum(g, 0.0))


def _boundary_event(potential, chart, eps):
    def ev(phi, y):
        return _gap(potential, chart, phi, y[0]) - _gap_threshold(potential, chart, phi, eps)
    ev.terminal = True
    ev.direction = -1
    return ev


def _gap_slope(potential, chart, phi, y_phys_h):
    """d/dphi of (h^2 - v) at the event, used for the linear exit extrapolation."""
    h = y_phys_h
    return 2.0 * h * float(_h_prime(potential, phi, h)) - float(potential.dv(phi))


def _exit_record(potential, chart, phi_ev, h_ev, eps) -> BoundaryExit:
    # Near the boundary h - sqrt(v) shrinks linearly (h' ~ 0 while sqrt(v)
    # keeps rising), so one linear step in h^2 - v locates the touch point.
    g = float((h_ev - potential.u(phi_ev)) * (h_ev + potential.u(phi_ev)))
    slope = _gap_slope(potential, chart, phi_ev, h_ev)
    phi_exit = phi_ev + (max(g, 0.0) / -slope if slope < 0 else 0.0)
    h_exit = float(potential.u(phi_exit))
    s = 0.0 if chart is not Chart.FRAK_H else -float(potential.frak_v(phi_exit))
    return BoundaryExit(phi_exit, h_exit, phi_ev, s)


def _on_boundary(potential, phi, h, eps) -> bool:
    v = float(potential.v(phi))
    return h * h - v <= eps * (1.0 + v)


def _check_start(potential, start: PhasePoint, eps):
    v = float(potential.v(start.phi))
    if start.h * start.h - v < -max(eps, 1e-10) * (1.0 + v):
        raise DomainError(f"start h={start.h} lies below the boundary sqrt(v)={math.sqrt(v)}")


def _solve(potential, chart, phi_a, phi_b, y0, config, events=(), jac=None):
    sol = solve_ivp(
        _rhs(potential, chart), (phi_a, phi_b), [y0], method=config.method,
        rtol=config.rtol, atol=config.atol, events=list(events) or None,
        dense_output=config.dense, max_step=config.max_step,
        **({"jac": jac} if jac is not None and config.method in ("Radau", "BDF", "LSODA") else {}))
    if sol.status == -1:
        last = (float(sol.t[-1]), float(sol.y[0, -1])) if sol.t.size else None
        raise StepUnderflow(f"integration failed: {sol.message}", last_state=last)
    return sol


def _slope_from_chart(potential, chart, phi, y):
    """h' from the chart variable; the deviation chart avoids the h^2 - v cancellation."""
    if chart is Chart.DEVIATION:
        return np.sqrt(np.maximum(y * (2.0 * potential.u(phi) + y), 0.0))
    return _h_prime(potential, phi, _from_chart(potential, chart, phi, y))


def _assemble(potential, chart, pieces, exit_rec=None) -> Trajectory:
    phis, ys, interps = [], [], []
    for sol in pieces:
        phis.append(sol.t)
        ys.append(sol.y[0])
        if sol.sol is not None:
            interps.append((float(min(sol.t[0], sol.t[-1])), float(max(sol.t[0], sol.t[-1])), sol.sol))
    phi = np.concatenate(phis)
    y = np.concatenate(ys)
    order = np.argsort(phi, kind="stable")
    phi, y = phi[order], y[order]
    keep = np.concatenate([[True], np.diff(phi) > 0])
    phi, y = phi[keep], y[keep]
    h = _from_chart(potential, chart, phi, y)
    hp = _slope_from_chart(potential, chart, phi, y)
    if exit_rec is not None and exit_rec.phi_exit > phi[-1]:
        phi = np.append(phi, exit_rec.phi_exit)
        h = np.append(h, exit_rec.h_exit)
        hp = np.append(hp, 0.0)
    elif exit_rec is not None:
        hp[-1] = 0.0
    samples = np.column_stack([phi, h, hp])

    def make(fn):
        def interp(x):
            xa = np.asarray(x, dtype=float)
            out = np.full(xa.shape, np.nan)
            for lo, hi, f in interps:
                m = (xa >= lo) & (xa <= hi)
                if m.any():
                    out[m] = fn(potential, chart, xa[m], f(xa[m])[0])
            return out if out.ndim else float(out)
        return interp

    if not interps:
        return Trajectory(samples, chart, exit_rec)
    return Trajectory(samples, chart, exit_rec, make(_from_chart), make(_slope_from_chart))


def integrate(potential: PotentialSpec, start: PhasePoint, phi_end: float,
              chart: Chart | str = Chart.H, config: FlowConfig = DEFAULT_CONFIG) -> Trajectory:
    """Integrate forward in phi from `start`, stopping early at the lower boundary."""
    chart = Chart(chart)
    if not phi_end > start.phi:
        raise ConfigError("phi_end must exceed the starting phi")
    eps = config.boundary_eps
    _check_start(potential, start, eps)
    if _on_boundary(potential, start.phi, start.h, eps):
        rec = BoundaryExit(start.phi, float(potential.u(start.phi)), start.phi,
                           0.0 if chart is not Chart.FRAK_H else -float(potential.frak_v(start.phi)))
        return Trajectory(np.array([[start.phi, rec.h_exit, 0.0]]), chart, rec)
    y0 = _to_chart(potential, chart, start.phi, start.h)
    sol = _solve(potential, chart, start.phi, phi_end, y0, config,
                 [_boundary_event(potential, chart, eps)], _jac(potential, chart))
    rec = None
    if sol.status == 1 and sol.t_events[0].size:
        phi_ev = float(sol.t_events[0][0])
        h_ev = float(_from_chart(potential, chart, phi_ev, sol.y_events[0][0][0]))
        rec = _exit_record(potential, chart, phi_ev, h_ev, eps)
    return _assemble(potential, chart, [sol], rec)


def _stiff_switch(potential, phi_lo, phi_hi, ratio=100.0, samples=2001):
    """Smallest sampled phi beyond which the envelope attraction rate u/u' exceeds `ratio`."""
    grid = np.linspace(phi_lo, phi_hi, samples)
    with np.errstate(all="ignore"):
        rate = np.asarray(potential.u(grid), dtype=float) / np.asarray(potential.du(grid), dtype=float)
    stiff = ~(rate <= ratio)
    if not stiff[-1]:
        return phi_hi
    calm = np.nonzero(~stiff)[0]
    return float(grid[calm[-1] + 1]) if calm.size else phi_lo


def integrate_backward(potential: PotentialSpec, phi_start: float, h_start: float, phi_end: float,
                       config: FlowConfig | None = None, chart: Chart | str = Chart.DEVIATION,
                       d_start: float | None = None) -> Trajectory:
    """Integrate towards smaller phi, where the separatrix attracts neighbours.

    Without an explicit `config` the span is split where the attraction rate
    u/u' drops below 100: implicit Radau above (stiff), DOP853 below.
    `d_start` supplies h - sqrt(v) at the seed directly, for seeds so close
    to sqrt(v) that the float difference would lose it.
    """
    chart = Chart(chart)
    if not phi_end < phi_start:
        raise ConfigError("backward integration needs phi_end < phi_start")
    _check_start(potential, PhasePoint(phi_start, h_start), 1e-12)
    if chart is Chart.DEVIATION and d_start is not None:
        y0 = d_start
    else:
        y0 = _to_chart(potential, chart, phi_start, h_start)
    jac = _jac(potential, chart)
    if config is not None:
        return _assemble(potential, chart, [_solve(potential, chart, phi_start, phi_end, y0, config, (), jac)])
    split = _stiff_switch(potential, phi_end, phi_start) if chart is Chart.DEVIATION else phi_end
    pieces = []
    if split > phi_end:
        sol = _solve(potential, chart, phi_start, split, y0,
                     FlowConfig(method="Radau", atol=1e-300), (), jac)
        pieces.append(sol)
        phi_start, y0 = float(sol.t[-1]), float(sol.y[0, -1])
    if phi_start > phi_end:
        pieces.append(_solve(potential, chart, phi_start, phi_end, y0,
                             FlowConfig(method="DOP853", atol=1e-300), (), jac))
    return _assemble(potential, chart, pieces)


# -- classification ---------------------------------------------------------

class Verdict(str, enum.Enum):
    TYPE_A = "TypeA"
    TYPE_B = "TypeB"
    UNDETERMINED = "Undetermined"


@dataclass
class ClassificationResult:
    verdict: Verdict
    phi_exit: float | None = None
    growth_rate: float | None = None
    A_estimate: float | None = None
    horizon: float | None = None
    certificate: str | None = None
    trajectory: Trajectory | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict.value}
        for k in ("phi_exit", "growth_rate", "A_estimate", "horizon", "certificate"):
            val = getattr(self, k)
            if val is not None:
                out[k] = val
        return out


def isocline(potential: PotentialSpec, phi: float) -> float:
    """Zero-slope curve of the frak_h equation, 1/sqrt(1 - frak_v^2)."""
    fv = float(potential.frak_v(phi))
    if fv >= 1.0:
        raise SteepnessError(f"frak_v({phi}) = {fv} >= 1: no isocline")
    return 1.0 / math.sqrt(1.0 - fv * fv)


def super_solution_bound(h0: float, phi0: float, phi: float) -> float:
    if phi < phi0:
        raise ConfigError("phi must not lie left of phi0")
    return h0 * math.exp(phi - phi0)


def safe_phi(potential: PotentialSpec, alpha0: float, phi_lo: float, phi_hi: float, samples: int = 4001) -> float:
    """Left edge of the sampled stretch of [phi_lo, phi_hi] on which frak_v < alpha0."""
    grid = np.linspace(phi_lo, phi_hi, samples)
    with np.errstate(all="ignore"):
        fv = np.asarray(potential.frak_v(grid), dtype=float) + 0.0 * grid
    bad = ~(fv < alpha0)
    if not bad.any():
        return phi_lo
    i = int(np.nonzero(bad)[0][-1])
    return float(grid[min(i + 1, samples - 1)]) if i + 1 < samples else math.inf


def kinetic_barrier(potential: PotentialSpec, phi: float) -> float:
    """kappa(phi) = 2 int_0^inf v(phi+s)/v(phi) exp(-2s) ds (inf when it diverges).

    For increasing v, frak_h(phi)^2 > kappa(phi) rules out a later exit: the
    inequality (h^2)' >= 2 h^2 - 2 v integrates to h^2 > v for all larger phi.
    The integral is declared divergent unless s*f(s) keeps shrinking far out.
    """
    lv0 = float(potential.log_v(phi))

    def integrand(s):
        with np.errstate(all="ignore"):
            return math.exp(min(float(potential.log_v(phi + s)) - lv0 - 2.0 * s, 700.0))

    s1 = 1e3 * (1.0 + abs(phi))
    f1, f2 = s1 * integrand(s1), 10 * s1 * integrand(10 * s1)
    if not (f1 < 1e-300 or f2 < 0.5 * f1):
        return math.inf
    val, _ = quad(integrand, 0.0, math.inf, limit=200, epsabs=0.0, epsrel=1e-10)
    return 2.0 * val


def _fit_tail(traj: Trajectory, span: float = 5.0):
    phi, h = traj.phi, traj.h
    m = phi >= phi[-1] - span
    if m.sum() < 3:
        m = slice(max(len(phi) - 3, 0), None)
    x, ly = phi[m], np.log(h[m])
    rate = float(np.polyfit(x, ly, 1)[0]) if len(x) >= 2 else float("nan")
    return rate, float(phi[-1] - math.log(h[-1]))


def _resolve_alpha(potential: PotentialSpec, mode: str):
    if mode == "fallback":
        return None
    a = potential.alpha_limit
    if a is None:
        try:
            verdict = classify_class_alpha(potential)
        except InconclusiveLimit:
            if mode == "class":
                raise
            return None
        a = verdict.alpha if verdict.in_class else None
    elif a >= 1.0:
        a = None
    if a is None and mode == "class":
        raise ConfigError(f"{potential.kind} is not in a class C_alpha; use the fallback mode")
    return a


def classify(potential: PotentialSpec, start: PhasePoint, horizon: float | None = None,
             alpha0: float | None = None, mode: str = "auto", tail_span: float = 10.0,
             config: FlowConfig = DEFAULT_CONFIG, keep_trajectory: bool = True) -> ClassificationResult:
    """Type-A / type-B verdict for the trajectory through `start`.

    Class mode (potential in C_alpha): past the point where frak_v stays below
    alpha0 = (1+alpha)/2, crossing frak_h = 1/sqrt(1-alpha0^2) certifies type B.
    Fallback mode: type B is certified when frak_h^2 exceeds the kinetic
    barrier; otherwise the horizon is reported as undetermined.
    """
    horizon = start.phi + 40.0 if horizon is None else float(horizon)
    if not horizon > start.phi:
        raise ConfigError("horizon must exceed the starting phi")
    eps = config.boundary_eps
    _check_start(potential, start, eps)
    if _on_boundary(potential, start.phi, start.h, eps):
        return ClassificationResult(Verdict.TYPE_A, phi_exit=start.phi, horizon=horizon, certificate="boundary")
    alpha = _resolve_alpha(potential, mode)
    chart = Chart.H
    bev = _boundary_event(potential, chart, eps)
    pieces = []

    def finish_a(sol):
        phi_ev = float(sol.t_events[0][0])
        h_ev = float(sol.y_events[0][0][0])
        rec = _exit_record(potential, chart, phi_ev, h_ev, eps)
        traj = _assemble(potential, chart, pieces, rec) if keep_trajectory else None
        return ClassificationResult(Verdict.TYPE_A, phi_exit=rec.phi_exit, horizon=horizon,
                                    certificate="boundary", trajectory=traj)

    def finish_b(phi_c, h_c, reason):
        sol = _solve(potential, chart, phi_c, phi_c + tail_span, h_c, config, [bev])
        pieces.append(sol)
        traj = _assemble(potential, chart, pieces)
        rate, A = _fit_tail(traj)
        return ClassificationResult(Verdict.TYPE_B, growth_rate=rate, A_estimate=A, horizon=horizon,
                                    certificate=reason, trajectory=traj if keep_trajectory else None)

    phi, h = start.phi, start.h
    if alpha is not None:
        a0 = (1.0 + alpha) / 2.0 if alpha0 is None else float(alpha0)
        if not alpha <= a0 < 1.0:
            raise ConfigError(f"alpha0 must lie in [alpha, 1), got {a0}")
        threshold = 1.0 / math.sqrt(1.0 - a0 * a0)
        phi_safe = safe_phi(potential, a0, phi, horizon)
        if phi_safe > phi:
            sol = _solve(potential, chart, phi, min(phi_safe, horizon), h, config, [bev])
            pieces.append(sol)
            if sol.status == 1:
                return finish_a(sol)
            phi, h = float(sol.t[-1]), float(sol.y[0, -1])
        if phi < horizon:
            if h > threshold * float(potential.u(phi)):
                return finish_b(phi, h, "isocline_threshold")

            def tev(x, y):
                return y[0] - threshold * potential.u(x)
            tev.terminal, tev.direction = True, 1
            sol = _solve(potential, chart, phi, horizon, h, config, [bev, tev])
            pieces.append(sol)
            if sol.status == 1 and sol.t_events[0].size:
                return finish_a(sol)
            if sol.status == 1 and sol.t_events[1].size:
                return finish_b(float(sol.t_events[1][0]), float(sol.y_events[1][0][0]), "isocline_threshold")
    else:
        chunk = 1.0
        while phi < horizon:
            nxt = min(phi + chunk, horizon)
            sol = _solve(potential, chart, phi, nxt, h, config, [bev])
            pieces.append(sol)
            if sol.status == 1:
                return finish_a(sol)
            phi, h = float(sol.t[-1]), float(sol.y[0, -1])
            fh2 = h * h / float(potential.v(phi))
            if fh2 > kinetic_barrier(potential, phi):
                return finish_b(phi, h, "kinetic_barrier")
    traj = _assemble(potential, chart, pieces) if keep_trajectory and pieces else None
    return ClassificationResult(Verdict.UNDETERMINED, horizon=horizon, trajectory=traj)


# -- (phi, phidot) <-> (phi, h) ---------------------------------------------

def map_plane(potential: PotentialSpec, point) -> PhasePoint:
    """(phi, phidot) to (phi, h) with h = sqrt(phidot^2 + v)."""
    phi, phidot = point
    return PhasePoint(float(phi), math.sqrt(phidot * phidot + float(potential.v(phi))))


def to_velocity(potential: PotentialSpec, point: PhasePoint, branch: str = "D-") -> float:
    """Inverse of `map_plane`: phidot = -sqrt(h^2 - v) on D-, +sqrt on D+."""
    v = float(potential.v(point.phi))
    g = point.h * point.h - v
    if g < -1e-12 * (1.0 + v):
        raise BelowBoundary(f"h={point.h} lies below sqrt(v)={math.sqrt(v)}")
    s = math.sqrt(max(g, 0.0))
    if branch == "D-":
        return -s
    if branch == "D+":
        return s
    raise ConfigError(f"branch must be 'D-' or 'D+', got {branch!r}")
