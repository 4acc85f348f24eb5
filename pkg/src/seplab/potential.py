"""Potential catalog, pointwise evaluation, class-alpha membership and unit conversion.

Every potential is a frozen dataclass carrying its parameters and the left
edge ``phi0`` of the working region.  Closed-form ``v``, ``v'``,
``frak_v = v'/(2v)`` and ``log v`` are hand-coded for the catalog kinds; the
higher derivatives of ``u = sqrt(v)`` come from sympy so they are exact for
every kind, including `Custom`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, ClassVar

import numpy as np
import sympy as sp

from .errors import ConfigError, DomainError, InconclusiveLimit, NonPositivePotential
from .series import Exponential as ExpBasis, InversePower, TruncatedSeries, exact

PHI = sp.Symbol("phi", real=True)

_VALIDATION_SPAN = 20.0
_VALIDATION_SAMPLES = 241


@dataclass(frozen=True)
class PotentialSpec:
    """Base class; subclasses fill in the closed forms."""

    kind: ClassVar[str] = "abstract"

    def __post_init__(self):
        self._check_params()
        if self.phi0 is None:
            object.__setattr__(self, "phi0", self.default_phi0())
        object.__setattr__(self, "phi0", float(self.phi0))
        self._validate_region()

    # subclass hooks ------------------------------------------------------

    def _check_params(self):
        pass

    def default_phi0(self) -> float:
        return 0.0

    def expression(self) -> sp.Expr:
        raise NotImplementedError

    def v(self, phi):
        raise NotImplementedError

    def dv(self, phi):
        raise NotImplementedError

    def log_v(self, phi):
        return np.log(self.v(phi))

    def frak_v(self, phi):
        return self.dv(phi) / (2.0 * self.v(phi))

    @property
    def alpha_limit(self) -> float | None:
        """Analytic limit of frak_v at infinity, None when unknown."""
        return None

    def u_series(self) -> TruncatedSeries:
        raise ConfigError(f"no asymptotic expansion of sqrt(v) is available for {self.kind}")

    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "phi0"}

    # shared --------------------------------------------------------------

    def u(self, phi):
        return np.sqrt(self.v(phi))

    def du(self, phi):
        return self.dv(phi) / (2.0 * np.sqrt(self.v(phi)))

    def u_derivatives(self, phi, order: int) -> tuple:
        """(u, u', ..., u^(order)) at phi."""
        funcs = _u_derivative_funcs(self, order)
        return tuple(float(f(phi)) for f in funcs)

    def _validate_region(self):
        grid = self.phi0 + np.linspace(0.0, _VALIDATION_SPAN, _VALIDATION_SAMPLES)[1:]
        with np.errstate(all="ignore"):
            lv = np.asarray(self.log_v(grid), dtype=float)
            fv = np.asarray(self.frak_v(grid), dtype=float)
        bad = ~np.isfinite(lv)
        if bad.any():
            raise NonPositivePotential(
                f"{self.kind}: v is not positive at phi={grid[bad][0]:.6g} (phi0={self.phi0})")
        bad = ~(fv > 0)
        if bad.any():
            raise DomainError(
                f"{self.kind}: v' is not positive at phi={grid[bad][0]:.6g} (phi0={self.phi0})")

    def describe(self) -> dict:
        return {"kind": self.kind, "params": {k: _jsonable(v) for k, v in self.params().items()},
                "phi0": self.phi0}


def _jsonable(x):
    if isinstance(x, (int, float, str)):
        return x
    return float(x)


@lru_cache(maxsize=256)
def _u_derivative_funcs(potential: PotentialSpec, order: int) -> tuple:
    # a symbol without the real assumption keeps sqrt(f**2) from collapsing to |f|
    x = sp.Symbol("x")
    d = sp.sqrt(potential.expression().subs(PHI, x))
    out = []
    for _ in range(order + 1):
        out.append(sp.lambdify(x, d, modules=["numpy"]))
        d = sp.diff(d, x)
    return tuple(out)


def _positive_int(name, p):
    if isinstance(p, bool) or int(p) != p or p < 1:
        raise ConfigError(f"{name} must be a positive integer, got {p!r}")


@dataclass(frozen=True)
class Monomial(PotentialSpec):
    p: int = 1
    phi0: float | None = None
    kind: ClassVar[str] = "monomial"

    def _check_params(self):
        _positive_int("p", self.p)
        object.__setattr__(self, "p", int(self.p))

    def expression(self):
        return PHI ** (2 * self.p)

    def v(self, phi):
        return phi ** (2 * self.p)

    def dv(self, phi):
        return 2 * self.p * phi ** (2 * self.p - 1)

    def log_v(self, phi):
        return 2 * self.p * np.log(phi)

    def frak_v(self, phi):
        return self.p / phi

    def u(self, phi):
        return phi ** self.p

    def du(self, phi):
        return self.p * phi ** (self.p - 1)

    @property
    def alpha_limit(self):
        return 0.0

    def u_series(self):
        return TruncatedSeries.from_terms(InversePower(), {-self.p: 1})


@dataclass(frozen=True)
class Higgs(PotentialSpec):
    a: float = 1.0
    phi0: float | None = None
    kind: ClassVar[str] = "higgs"

    def _check_params(self):
        if not math.isfinite(self.a):
            raise ConfigError("a must be finite")

    def default_phi0(self):
        return max(1.0, abs(self.a)) + 0.1

    def expression(self):
        return (PHI ** 2 - sp.nsimplify(self.a) ** 2) ** 2

    def v(self, phi):
        return (phi * phi - self.a ** 2) ** 2

    def dv(self, phi):
        return 4 * phi * (phi * phi - self.a ** 2)

    def log_v(self, phi):
        return 2 * np.log(np.abs(phi * phi - self.a ** 2))

    def frak_v(self, phi):
        return 2 * phi / (phi * phi - self.a ** 2)

    def u(self, phi):
        return phi * phi - self.a ** 2

    def du(self, phi):
        return 2 * phi

    @property
    def alpha_limit(self):
        return 0.0

    def u_series(self):
        a = exact(self.a)
        return TruncatedSeries.from_terms(InversePower(), {-2: 1, 0: -a * a})


@dataclass(frozen=True)
class Exponential(PotentialSpec):
    """v = (1 - alpha^2) exp(2 alpha phi); its separatrix is exp(alpha phi)."""

    alpha: float = 0.5
    phi0: float | None = None
    kind: ClassVar[str] = "exponential"

    def _check_params(self):
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")

    def expression(self):
        a = sp.nsimplify(self.alpha)
        return (1 - a ** 2) * sp.exp(2 * a * PHI)

    def v(self, phi):
        return (1 - self.alpha ** 2) * np.exp(2 * self.alpha * phi)

    def dv(self, phi):
        return 2 * self.alpha * self.v(phi)

    def log_v(self, phi):
        return math.log1p(-self.alpha ** 2) + 2 * self.alpha * np.asarray(phi, dtype=float)

    def frak_v(self, phi):
        return self.alpha + 0.0 * np.asarray(phi, dtype=float)

    def u(self, phi):
        return math.sqrt(1 - self.alpha ** 2) * np.exp(self.alpha * phi)

    def du(self, phi):
        return self.alpha * self.u(phi)

    @property
    def alpha_limit(self):
        return self.alpha


@dataclass(frozen=True)
class EModel(PotentialSpec):
    """v = (1 - exp(-beta phi))^(2p); p = 1 is the Starobinsky model."""

    p: int = 1
    beta: float = 1.0
    phi0: float | None = None
    kind: ClassVar[str] = "emodel"

    def _check_params(self):
        _positive_int("p", self.p)
        object.__setattr__(self, "p", int(self.p))
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")

    def expression(self):
        b = sp.nsimplify(self.beta)
        return (1 - sp.exp(-b * PHI)) ** (2 * self.p)

    def v(self, phi):
        return (-np.expm1(-self.beta * phi)) ** (2 * self.p)

    def dv(self, phi):
        x = np.exp(-self.beta * phi)
        return 2 * self.p * self.beta * x * (-np.expm1(-self.beta * phi)) ** (2 * self.p - 1)

    def log_v(self, phi):
        return 2 * self.p * np.log(-np.expm1(-self.beta * phi))

    def frak_v(self, phi):
        with np.errstate(over="ignore"):
            return self.p * self.beta / np.expm1(self.beta * phi)

    def u(self, phi):
        return (-np.expm1(-self.beta * phi)) ** self.p

    def du(self, phi):
        return self.p * self.beta * np.exp(-self.beta * phi) * (-np.expm1(-self.beta * phi)) ** (self.p - 1)

    def u_series(self):
        basis = ExpBasis(exact(self.beta))
        return TruncatedSeries.from_terms(basis, [(k, (-1) ** k * math.comb(self.p, k)) for k in range(self.p + 1)])

    @property
    def alpha_limit(self):
        return 0.0


@dataclass(frozen=True)
class SteepWell(PotentialSpec):
    """v = exp(2 beta phi) + exp(-2 beta phi)."""

    beta: float = 0.5
    phi0: float | None = None
    kind: ClassVar[str] = "steepwell"

    def _check_params(self):
        if not 0 < self.beta < 1:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")

    def expression(self):
        b = sp.nsimplify(self.beta)
        return sp.exp(2 * b * PHI) + sp.exp(-2 * b * PHI)

    def v(self, phi):
        return 2 * np.cosh(2 * self.beta * phi)

    def dv(self, phi):
        return 4 * self.beta * np.sinh(2 * self.beta * phi)

    def log_v(self, phi):
        z = 2 * self.beta * np.abs(phi)
        return z + np.log1p(np.exp(-2 * z))

    def frak_v(self, phi):
        return self.beta * np.tanh(2 * self.beta * phi)

    def u_series(self, prec=40):
        """exp(beta phi) sqrt(1 + x^4) with x = exp(-beta phi), truncated at x**prec."""
        basis = ExpBasis(exact(self.beta))
        root = TruncatedSeries.from_terms(basis, {0: 1, 4: 1}).sqrt(prec=prec + 1)
        return TruncatedSeries.from_terms(basis, {-1: 1}) * root

    @property
    def alpha_limit(self):
        return self.beta


@dataclass(frozen=True)
class ModulatedExp(PotentialSpec):
    """v = (2 phi - 1) exp(2 phi) / phi^4, with the exact solution h = exp(phi)/phi.

    v' vanishes at phi = 1, so the working region starts to the right of it.
    """

    phi0: float | None = None
    kind: ClassVar[str] = "modulated_exp"

    def default_phi0(self):
        return 1.5

    def expression(self):
        return (2 * PHI - 1) * sp.exp(2 * PHI) / PHI ** 4

    def v(self, phi):
        return (2 * phi - 1) * np.exp(2 * phi) / phi ** 4

    def dv(self, phi):
        return 2 * self.v(phi) * self.frak_v(phi)

    def log_v(self, phi):
        return np.log(2 * phi - 1) + 2 * phi - 4 * np.log(phi)

    def frak_v(self, phi):
        return 1 / (2 * phi - 1) + 1 - 2 / phi

    @property
    def alpha_limit(self):
        return 1.0

    def exact_solution(self, phi):
        return np.exp(phi) / phi

    def exact_solution_prime(self, phi):
        return np.exp(phi) * (phi - 1) / phi ** 2


@dataclass(frozen=True)
class Custom(PotentialSpec):
    """A potential given as a sympy-parsable expression in ``phi``."""

    expr: str = "exp(2*phi)"
    phi0: float | None = None
    kind: ClassVar[str] = "custom"
    _compiled: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def _check_params(self):
        try:
            e = sp.sympify(self.expr, locals={"phi": PHI})
        except (sp.SympifyError, SyntaxError, TypeError) as exc:
            raise ConfigError(f"cannot parse potential expression {self.expr!r}: {exc}") from None
        if e.free_symbols - {PHI}:
            raise ConfigError(f"expression may only depend on phi, found {e.free_symbols - {PHI}}")
        dv = sp.diff(e, PHI)
        logv = sp.expand_log(sp.log(e), force=True)
        frak = sp.simplify(dv / (2 * e))
        mk = lambda x: sp.lambdify(PHI, x, modules=["numpy"])  # noqa: E731
        object.__setattr__(self, "_compiled", {
            "expr": e, "v": mk(e), "dv": mk(dv), "log_v": mk(logv), "frak_v": mk(frak)})

    def expression(self):
        return self._compiled["expr"]

    def _call(self, name, phi):
        out = self._compiled[name](phi)
        if np.ndim(phi):
            return np.broadcast_to(out, np.shape(phi)).astype(float)
        return float(out)

    def v(self, phi):
        return self._call("v", phi)

    def dv(self, phi):
        return self._call("dv", phi)

    def log_v(self, phi):
        return self._call("log_v", phi)

    def frak_v(self, phi):
        return self._call("frak_v", phi)

    def params(self):
        return {"v": self.expr}


CATALOG: dict[str, type[PotentialSpec]] = {
    cls.kind: cls for cls in (Monomial, Higgs, Exponential, EModel, SteepWell, ModulatedExp, Custom)
}
_ALIASES = {"v": "expr"}


def make_potential(kind: str, params: dict | None = None, phi0: float | None = None) -> PotentialSpec:
    kind = kind.strip().lower().replace("-", "_")
    kind = {"starobinsky": "emodel", "quadratic": "monomial", "exp": "exponential"}.get(kind, kind)
    if kind not in CATALOG:
        raise ConfigError(f"unknown potential kind {kind!r}; known: {sorted(CATALOG)}")
    kw = {_ALIASES.get(k, k): v for k, v in (params or {}).items()}
    try:
        return CATALOG[kind](**kw, phi0=phi0)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind}: {exc}") from None


def _parse_value(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        return text


def parse_potential(text: str, phi0: float | None = None) -> PotentialSpec:
    """Inline ``kind:key=val,...`` (``custom:v=<expr>``) or a path to a JSON definition file."""
    path = Path(text)
    if text.endswith(".json") or (path.exists() and path.is_file()):
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read potential file {text}: {exc}") from None
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ConfigError("potential file must be an object with a 'kind' field")
        return make_potential(doc["kind"], doc.get("params", {}), doc.get("phi0", phi0) if phi0 is None else phi0)
    kind, _, rest = text.partition(":")
    params = {}
    if kind.strip().lower() == "custom":
        key, eq, val = rest.partition("=")
        if not eq or key.strip() not in ("v", "expr"):
            raise ConfigError("custom potentials are written custom:v=<expression>")
        params["expr"] = val.strip()
    elif rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ConfigError(f"expected key=value in {item!r}")
            params[key.strip()] = _parse_value(val)
    return make_potential(kind, params, phi0)


# -- evaluation ------------------------------------------------------------

@dataclass(frozen=True)
class PotentialValues:
    phi: float
    v: float
    v_prime: float
    frak_v: float
    u: float
    u_derivatives: tuple


def evaluate(potential: PotentialSpec, phi: float, order: int = 2) -> PotentialValues:
    """v, v', frak_v and u with its derivatives up to `order` at one point."""
    phi = float(phi)
    if phi < potential.phi0:
        raise DomainError(f"phi={phi} lies left of phi0={potential.phi0}")
    v = float(potential.v(phi))
    if not v > 0:
        raise NonPositivePotential(f"v({phi}) = {v} is not positive")
    ud = potential.u_derivatives(phi, order)
    return PotentialValues(phi, v, float(potential.dv(phi)), float(potential.frak_v(phi)),
                           math.sqrt(v), ud)


# -- class C_alpha membership --------------------------------------------

@dataclass(frozen=True)
class ClassAlphaVerdict:
    in_class: bool
    alpha: float | None
    lambda_inf: float | None
    limit: float
    evidence: dict = field(default_factory=dict)


_LIMIT_TOL = 1e-6


def _verdict(limit: float, evidence: dict) -> ClassAlphaVerdict:
    inside = -_LIMIT_TOL <= limit < 1 - _LIMIT_TOL
    a = max(limit, 0.0) if inside else None
    return ClassAlphaVerdict(inside, a, math.sqrt(6) * a if inside else None, limit, evidence)


def estimate_limit(f: Callable, phi_lo: float, phi_hi: float, samples: int = 400,
                   rates: np.ndarray | None = None) -> tuple[float, float, float]:
    """Fit f on [phi_lo, phi_hi] to ``L + C exp(-k phi) + C'/phi``.

    The rate k is chosen from a grid by least residual.  Returns
    (L, rms residual, k).
    """
    x = np.linspace(phi_lo, phi_hi, samples)
    y = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(y)):
        raise InconclusiveLimit("sampled frak_v is not finite on the fit window")
    rates = np.geomspace(1e-2, 10.0, 60) if rates is None else rates
    best = None
    for k in rates:
        shift = np.exp(-k * (x - phi_lo))
        design = np.column_stack([np.ones_like(x), shift, 1.0 / x])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        rms = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
        if best is None or rms < best[1]:
            best = (float(coef[0]), rms, float(k))
    return best


def classify_class_alpha(potential: PotentialSpec, phi_max: float | None = None,
                         residual_tol: float = 1e-3) -> ClassAlphaVerdict:
    """Decide whether frak_v tends to a limit in [0, 1) and report it."""
    if potential.alpha_limit is not None:
        return _verdict(potential.alpha_limit, {"method": "analytic"})
    phi_max = potential.phi0 + 100.0 if phi_max is None else phi_max
    lo = max(potential.phi0, phi_max / 2)
    limit, rms, k = estimate_limit(potential.frak_v, lo, phi_max)
    grid = np.linspace(lo, phi_max, 9)
    evidence = {"method": "fit", "window": [lo, phi_max], "rms": rms, "rate": k,
                "phi": grid.tolist(), "frak_v": np.asarray(potential.frak_v(grid), dtype=float).tolist()}
    if rms > residual_tol:
        raise InconclusiveLimit(f"frak_v has not settled on [{lo}, {phi_max}] (rms residual {rms:.3g})")
    return _verdict(limit, evidence)


# -- physical units ------------------------------------------------------

@dataclass(frozen=True)
class PhysicalParams:
    M_Pl: float
    Phi: float
    V: float | Callable
    H: float

    def __post_init__(self):
        if not self.M_Pl > 0:
            raise ConfigError("M_Pl must be positive")


@dataclass(frozen=True)
class ScaledParams:
    phi: float
    v: float | Callable
    h: float


def rescale(physical: PhysicalParams) -> ScaledParams:
    m = physical.M_Pl
    phi = physical.Phi / (math.sqrt(2.0 / 3.0) * m)
    if callable(physical.V):
        V = physical.V
        v = lambda p: 3.0 * V(math.sqrt(2.0 / 3.0) * m * p) / (m * m)  # noqa: E731
    else:
        v = 3.0 * physical.V / (m * m)
    return ScaledParams(phi, v, 3.0 * physical.H)


def unscale(scaled: ScaledParams, M_Pl: float) -> PhysicalParams:
    if not M_Pl > 0:
        raise ConfigError("M_Pl must be positive")
    if callable(scaled.v):
        vf = scaled.v
        V = lambda P: (M_Pl * M_Pl / 3.0) * vf(P / (math.sqrt(2.0 / 3.0) * M_Pl))  # noqa: E731
    else:
        V = (M_Pl * M_Pl / 3.0) * scaled.v
    return PhysicalParams(M_Pl, math.sqrt(2.0 / 3.0) * M_Pl * scaled.phi, V, scaled.h / 3.0)
