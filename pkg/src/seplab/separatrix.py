"""Locating the separatrix: bisection shooting and backward integration from the tail."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, InconclusiveLimit, NoBracket, NotInClass, SeedTooCoarse
from .flow import (FlowConfig, PhasePoint, Trajectory, Verdict, classify, integrate,
                   integrate_backward)
from .potential import (Custom, EModel, Exponential, Higgs, ModulatedExp, Monomial,
                        PotentialSpec, SteepWell, classify_class_alpha)
from .series import (Exponential as ExpBasis, TruncatedSeries, evaluate_series, exact,
                     separatrix_series_emodel, separatrix_series_generic,
                     separatrix_series_monomial, separatrix_series_steepwell)


@dataclass
class SeparatrixResult:
    r: float
    trajectory: Trajectory
    method: str
    phi0: float
    bracket_width: float
    seed_order: int | None = None
    phi_far: float | None = None
    sensitivity: float | None = None
    certificates: tuple = field(default=())

    def to_dict(self) -> dict:
        out = {"r": self.r, "method": self.method, "phi0": self.phi0, "bracket_width": self.bracket_width}
        if self.seed_order is not None:
            out.update(seed_order=self.seed_order, phi_far=self.phi_far, sensitivity=self.sensitivity)
        if self.certificates:
            out["certificates"] = [{"h0": h0, "verdict": v.value} for h0, v in self.certificates]
        return out


# -- asymptotic seeds --------------------------------------------------------

def separatrix_series(potential: PotentialSpec, order: int) -> TruncatedSeries:
    """The model's asymptotic expansion of the separatrix."""
    if isinstance(potential, Monomial):
        return separatrix_series_monomial(potential.p, order)
    if isinstance(potential, Higgs):
        return separatrix_series_generic(potential.u_series(), order)
    if isinstance(potential, EModel):
        return separatrix_series_emodel(potential.p, potential.beta, order)
    if isinstance(potential, SteepWell):
        return separatrix_series_steepwell(potential.beta, order)
    if isinstance(potential, Exponential):
        return TruncatedSeries.from_terms(ExpBasis(exact(potential.alpha)), {-1: 1})
    if isinstance(potential, Custom):
        return separatrix_series_generic(potential.u_series(), order)
    raise ConfigError(f"no separatrix series is known for {potential.kind}")


def exact_separatrix(potential: PotentialSpec) -> Callable | None:
    """Closed-form separatrix when the model has one."""
    if isinstance(potential, Exponential):
        a = potential.alpha
        return lambda phi: np.exp(a * np.asarray(phi, dtype=float))
    if isinstance(potential, Higgs) and potential.a in (1, -1):
        return lambda phi: np.asarray(phi, dtype=float) ** 2 + 1.0
    if isinstance(potential, ModulatedExp):
        return potential.exact_solution
    return None


def class_alpha(potential: PotentialSpec) -> float:
    verdict = classify_class_alpha(potential)
    if not verdict.in_class:
        raise NotInClass(f"{potential.kind} is not in a class C_alpha (limit {verdict.limit:.6g})")
    return verdict.alpha


def leading_order(potential: PotentialSpec) -> Callable:
    """Envelope sqrt(v)/sqrt(1 - alpha^2)."""
    a = class_alpha(potential)
    scale = 1.0 / math.sqrt(1.0 - a * a)
    return lambda phi: scale * potential.u(phi)


_DEFAULT_SEED_ORDER = {"monomial": 4, "higgs": 4, "emodel": 8, "steepwell": 6}


def _default_phi_far(potential: PotentialSpec, phi0: float) -> float:
    if isinstance(potential, EModel):
        return phi0 + 8.0 / min(potential.beta, 1.0)
    return phi0 + 20.0


def tail_seed(potential: PotentialSpec, phi_far: float, seed_order: int) -> tuple[float, float, float]:
    """(h, h - sqrt(v), size of the last term used) at phi_far from the asymptotic series.

    The deviation from sqrt(v) is summed as its own series: forming it as a
    difference of floats would cancel away every digit once h hugs sqrt(v).
    """
    exact_h = exact_separatrix(potential)
    if exact_h is not None:
        h = float(exact_h(phi_far))
        return h, h - float(potential.u(phi_far)), 0.0
    try:
        s = separatrix_series(potential, seed_order)
    except ConfigError:
        h = float(leading_order(potential)(phi_far))
        return h, h - float(potential.u(phi_far)), abs(float(potential.du(phi_far)))
    last = evaluate_series(s, phi_far, mode="fixed", order=seed_order).last_term_magnitude
    try:
        us = potential.u_series()
        if hasattr(us, "truncate") and s.prec is not None:
            us = us.truncate(s.prec)
        d = evaluate_series(s - us, phi_far, mode="fixed").value
    except ConfigError:
        d = evaluate_series(s, phi_far, mode="fixed", order=seed_order).value - float(potential.u(phi_far))
    return float(potential.u(phi_far)) + d, d, last


def find_separatrix_backward(potential: PotentialSpec, phi_far: float | None = None,
                             phi0: float | None = None, seed_order: int | None = None,
                             tol: float = 1e-9, config: FlowConfig | None = None,
                             check_seed: bool = True) -> SeparatrixResult:
    """Integrate from a series seed at phi_far down to phi0 (stable direction)."""
    phi0 = potential.phi0 if phi0 is None else float(phi0)
    phi_far = _default_phi_far(potential, phi0) if phi_far is None else float(phi_far)
    seed_order = _DEFAULT_SEED_ORDER.get(potential.kind, 4) if seed_order is None else int(seed_order)
    if not phi_far > phi0:
        raise ConfigError("phi_far must exceed phi0")
    h_far, d_far, last = tail_seed(potential, phi_far, seed_order)
    traj = integrate_backward(potential, phi_far, h_far, phi0, config=config, d_start=d_far)
    r = float(traj.h[0])
    sensitivity = 0.0
    if check_seed and last > 0:
        alt = integrate_backward(potential, phi_far, h_far + last, phi0, config=config, d_start=d_far + last)
        sensitivity = abs(float(alt.h[0]) - r)
        if sensitivity > 10 * tol:
            raise SeedTooCoarse(
                f"seeds {last:.3g} apart at phi_far={phi_far} end {sensitivity:.3g} apart at phi0={phi0}")
    return SeparatrixResult(r, traj, "Backward", phi0, sensitivity, seed_order, phi_far, sensitivity)


def find_separatrix_shooting(potential: PotentialSpec, phi0: float | None = None,
                             horizon: float | None = None, tol: float = 1e-10,
                             ceiling: float = 1e6, mode: str = "auto",
                             config: FlowConfig | None = None) -> SeparatrixResult:
    """Bisect h(phi0) in log h between a type-A and a type-B initial value."""
    phi0 = potential.phi0 if phi0 is None else float(phi0)
    horizon = phi0 + 40.0 if horizon is None else float(horizon)
    kw = {} if config is None else {"config": config}

    def verdict(h0):
        res = classify(potential, PhasePoint(phi0, h0), horizon, mode=mode, keep_trajectory=False, **kw)
        return res.verdict

    u0 = float(potential.u(phi0))
    floor = u0 * (1 + 1e-9) if u0 > 0 else 1e-12
    top = ceiling * max(1.0, u0)
    hi = max(2.0 * u0, 1.0)
    while verdict(hi) is not Verdict.TYPE_B:
        hi *= 2.0
        if hi > top:
            raise NoBracket(f"no type-B initial value up to {top:.3g} at phi0={phi0}; "
                            "the model may have no separatrix")
    lo = hi / 2.0
    while True:
        lo = max(lo, floor)
        v = verdict(lo)
        if v is Verdict.TYPE_A:
            break
        if v is Verdict.TYPE_B:
            hi = lo
        if lo <= floor:
            raise NoBracket(f"no type-A initial value above sqrt(v(phi0))={u0:.6g}")
        lo /= 2.0
    while hi - lo > tol:
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        v = verdict(mid)
        if v is Verdict.TYPE_A:
            lo = mid
        elif v is Verdict.TYPE_B:
            hi = mid
        else:
            raise InconclusiveLimit(f"h0={mid!r} is undetermined at horizon {horizon}; widen it")
    r = 0.5 * (lo + hi)
    traj = integrate(potential, PhasePoint(phi0, r), horizon, **kw)
    return SeparatrixResult(r, traj, "Shooting", phi0, hi - lo,
                            certificates=((lo, Verdict.TYPE_A), (hi, Verdict.TYPE_B)))


# -- inflation --------------------------------------------------------------

@dataclass(frozen=True)
class InflationReport:
    asymptotic: bool
    intervals: list


def sign_intervals(x: np.ndarray, f: np.ndarray, refine: Callable | None = None) -> list[tuple[float, float]]:
    """Maximal sub-intervals of the sampled range where f < 0, endpoints optionally refined."""
    neg = f < 0
    out = []
    i, n = 0, len(x)
    while i < n:
        if not neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and neg[j + 1]:
            j += 1
        a, b = float(x[i]), float(x[j])
        if refine is not None:
            if i > 0:
                a = brentq(refine, float(x[i - 1]), float(x[i]), xtol=1e-12)
            if j + 1 < n:
                b = brentq(refine, float(x[j]), float(x[j + 1]), xtol=1e-12)
        out.append((a, b))
        i = j + 1
    return out


def backwards_inflation(potential: PotentialSpec, separatrix: SeparatrixResult) -> InflationReport:
    """Asymptotic flag alpha < 1/sqrt(3) and the phi-intervals with h < sqrt(3v/2)."""
    a = class_alpha(potential)
    traj = separatrix.trajectory
    phi = traj.phi
    g = traj.h ** 2 - 1.5 * potential.v(phi)

    def refine(x):
        return float(traj.h_at(x)) ** 2 - 1.5 * float(potential.v(x))

    return InflationReport(a < 1.0 / math.sqrt(3.0), sign_intervals(phi, g, refine))
