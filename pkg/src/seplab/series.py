"""Truncated asymptotic series and the separatrix coefficient recurrences.

A `TruncatedSeries` is a finite sum ``sum_k c_k B(nu_k, phi)`` over a basis of
small functions:

* `InversePower`: ``B(nu, phi) = phi**(-nu)``
* `Exponential(rate)`: ``B(nu, phi) = exp(-nu * rate * phi)``

``nu`` is the valuation (larger = smaller as phi -> inf, may be negative for
growing leading terms and rational for fractional powers).  ``prec`` is the
absolute cutoff: every term with valuation below ``prec`` is known exactly,
nothing is known from ``prec`` on; ``prec=None`` means the sum is exact.

Coefficients are `fractions.Fraction` when every input is rational and
40-digit `mpmath` floats otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import BasisMismatch, NotDivergent, SteepnessError, ZeroLeadingCoefficient

MP = mpmath.MPContext()
MP.dps = 40


def exact(x):
    """Rational view of a parameter: ints and floats (by their decimal repr) become Fractions."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x)
    return to_mpf(x)


def to_mpf(c):
    if isinstance(c, Fraction):
        return MP.mpf(c.numerator) / c.denominator
    return MP.mpf(c)


def _coerce(c):
    if isinstance(c, (Fraction, int)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    return to_mpf(c)


def _is_zero(c) -> bool:
    return c == 0


def _sqrt(c):
    if isinstance(c, Fraction):
        if c < 0:
            raise ZeroLeadingCoefficient(f"square root of negative leading coefficient {c}")
        n, d = math.isqrt(c.numerator), math.isqrt(c.denominator)
        if n * n == c.numerator and d * d == c.denominator:
            return Fraction(n, d)
    return MP.sqrt(to_mpf(c))


def _fpow(c, alpha: Fraction):
    """c**alpha, exact whenever possible."""
    if alpha.denominator == 1:
        return c ** int(alpha) if not isinstance(c, Fraction) else c ** int(alpha)
    if alpha.denominator == 2:
        r = _sqrt(c)
        return r ** int(alpha.numerator) if alpha.numerator > 0 else 1 / r ** int(-alpha.numerator)
    return MP.power(to_mpf(c), to_mpf(alpha))


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    a, b = Fraction(a), Fraction(b)
    return Fraction(math.gcd(a.numerator * b.denominator, b.numerator * a.denominator),
                    a.denominator * b.denominator)


@dataclass(frozen=True)
class InversePower:
    def term(self, nu, phi):
        return phi ** (-float(nu))

    def derive(self, nu, c):
        return nu + 1, -nu * c

    def small(self, phi):
        return 1.0 / phi


@dataclass(frozen=True)
class Exponential:
    rate: object = Fraction(1)

    def term(self, nu, phi):
        return math.exp(-float(nu) * float(self.rate) * phi)

    def derive(self, nu, c):
        return nu, -nu * self.rate * c

    def small(self, phi):
        return math.exp(-float(self.rate) * phi)


Basis = InversePower | Exponential


@dataclass(frozen=True)
class TruncatedSeries:
    basis: Basis
    terms: tuple  # ((valuation, coeff), ...) sorted, nonzero coefficients only
    prec: Fraction | None = None
    step: Fraction | None = field(default=None, compare=False)

    @classmethod
    def from_terms(cls, basis, mapping, prec=None, step=None):
        if isinstance(mapping, dict):
            items = mapping.items()
        else:
            items = mapping
        acc: dict = {}
        for nu, c in items:
            nu = Fraction(nu)
            acc[nu] = acc.get(nu, 0) + _coerce(c)
        if prec is not None:
            prec = Fraction(prec)
        terms = tuple(sorted((nu, c) for nu, c in acc.items()
                             if not _is_zero(c) and (prec is None or nu < prec)))
        if any(not isinstance(c, Fraction) for _, c in terms):
            terms = tuple((nu, to_mpf(c)) for nu, c in terms)
        return cls(basis, terms, prec, None if step is None else Fraction(step))

    @classmethod
    def constant(cls, basis, c, prec=None):
        return cls.from_terms(basis, {0: c}, prec)

    # -- structure -------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def valuation(self):
        return self.terms[0][0] if self.terms else None

    @property
    def leading_coefficient(self):
        if not self.terms:
            raise ZeroLeadingCoefficient("zero series has no leading coefficient")
        return self.terms[0][1]

    @property
    def leading_exponent(self):
        """Exponent of phi in the leading term (InversePower basis)."""
        return -self.valuation

    @property
    def lattice_step(self) -> Fraction:
        if self.step is not None:
            return self.step
        g = Fraction(0)
        v0 = self.valuation
        for nu, _ in self.terms[1:]:
            g = _frac_gcd(g, nu - v0)
        return g if g else Fraction(1)

    def coeff(self, nu):
        nu = Fraction(nu)
        if self.prec is not None and nu >= self.prec:
            raise ValueError(f"valuation {nu} is beyond the truncation {self.prec}")
        for k, c in self.terms:
            if k == nu:
                return c
        return Fraction(0)

    @property
    def coeffs(self) -> list:
        """Coefficients on the lattice valuation + k*step, up to the truncation."""
        if not self.terms:
            return []
        v0, s = self.valuation, self.lattice_step
        last = self.terms[-1][0] if self.prec is None else self.prec - s
        n = int((last - v0) / s) + 1 if last >= v0 else 1
        d = dict(self.terms)
        return [d.get(v0 + k * s, Fraction(0)) for k in range(max(n, 1))]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for _, c in self.terms)

    # -- arithmetic ------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if self.basis != other.basis:
            raise BasisMismatch(f"{self.basis} vs {other.basis}")

    def truncate(self, prec) -> TruncatedSeries:
        if prec is None:
            return self
        prec = Fraction(prec)
        if self.prec is not None:
            prec = min(prec, self.prec)
        return TruncatedSeries.from_terms(self.basis, self.terms, prec, self.step)

    def _scale(self, k) -> TruncatedSeries:
        return TruncatedSeries.from_terms(self.basis, [(nu, k * c) for nu, c in self.terms], self.prec)

    def __neg__(self):
        return self._scale(-1)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.basis, other)
        self._check(other)
        prec = _min_prec(self.prec, other.prec)
        return TruncatedSeries.from_terms(self.basis, list(self.terms) + list(other.terms), prec)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.basis, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _eff_val(self):
        if self.terms:
            return self.terms[0][0]
        return self.prec

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self._scale(_coerce(other))
        self._check(other)
        if (self.is_zero and self.prec is None) or (other.is_zero and other.prec is None):
            return TruncatedSeries(self.basis, (), None)
        va, vb = self._eff_val(), other._eff_val()
        cands = []
        if self.prec is not None:
            cands.append(self.prec + vb)
        if other.prec is not None:
            cands.append(other.prec + va)
        prec = min(cands) if cands else None
        out: dict = {}
        for nu1, c1 in self.terms:
            for nu2, c2 in other.terms:
                nu = nu1 + nu2
                if prec is not None and nu >= prec:
                    continue
                out[nu] = out.get(nu, 0) + c1 * c2
        return TruncatedSeries.from_terms(self.basis, out, prec)

    __rmul__ = __mul__

    def power(self, alpha, prec=None) -> TruncatedSeries:
        """self**alpha by Miller's recurrence; `prec` caps the result's truncation."""
        alpha = Fraction(alpha)
        if not self.terms:
            raise ZeroLeadingCoefficient("cannot raise a zero series to a power")
        v0, a0 = self.terms[0]
        lead_v = alpha * v0
        cands = []
        if self.prec is not None:
            cands.append(lead_v + (self.prec - v0))
        if prec is not None:
            cands.append(Fraction(prec))
        target = min(cands) if cands else None
        if len(self.terms) == 1:
            return TruncatedSeries.from_terms(self.basis, {lead_v: _fpow(a0, alpha)}, target)
        if target is None:
            if alpha.denominator == 1 and alpha >= 0:
                out = TruncatedSeries.constant(self.basis, 1)
                for _ in range(int(alpha)):
                    out = out * self
                return out
            raise ValueError("an exact multi-term series needs an explicit prec for this power")
        s = self.lattice_step
        nmax = math.ceil((target - lead_v) / s)
        f = [Fraction(0)] * max(nmax, 1)
        for nu, c in self.terms:
            k = (nu - v0) / s
            if k.denominator != 1:
                raise ValueError("series terms are not on a common lattice")
            if int(k) < nmax:
                f[int(k)] = c / a0
        g = [Fraction(1)] + [Fraction(0)] * (nmax - 1)
        for k in range(1, nmax):
            acc = Fraction(0)
            for j in range(1, k + 1):
                if not _is_zero(f[j]):
                    acc += ((alpha + 1) * j - k) * f[j] * g[k - j]
            g[k] = acc / k
        lead = _fpow(a0, alpha)
        return TruncatedSeries.from_terms(
            self.basis, [(lead_v + k * s, lead * g[k]) for k in range(nmax)], target)

    def sqrt(self, prec=None):
        return self.power(Fraction(1, 2), prec)

    def inverse(self, prec=None):
        return self.power(-1, prec)

    def div(self, other, prec=None):
        self._check(other)
        vb = other._eff_val()
        if vb is None or other.is_zero:
            raise ZeroLeadingCoefficient("division by a zero series")
        cands = [Fraction(prec)] if prec is not None else []
        va = self._eff_val()
        if self.prec is not None:
            cands.append(self.prec - vb)
        if other.prec is not None and va is not None:
            cands.append(va - 2 * vb + other.prec)
        target = min(cands) if cands else None
        inv_prec = None if target is None else target - (va if va is not None else 0)
        return (self * other.inverse(inv_prec)).truncate(target)

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self._scale(1 / _coerce(other))
        return self.div(other)

    def derivative(self) -> TruncatedSeries:
        out = []
        for nu, c in self.terms:
            out.append(self.basis.derive(nu, c))
        prec = self.prec
        if prec is not None and isinstance(self.basis, InversePower):
            prec = prec + 1
        return TruncatedSeries.from_terms(self.basis, out, prec)

    # -- evaluation ------------------------------------------------------

    def term_values(self, phi) -> list[float]:
        return [float(c) * self.basis.term(nu, phi) for nu, c in self.terms]

    def __call__(self, phi) -> float:
        return float(sum(self.term_values(phi)))

    def to_dict(self) -> dict:
        if isinstance(self.basis, InversePower):
            basis, rate = "inverse_power", None
        else:
            basis, rate = "exponential", str(self.basis.rate)
        return {
            "basis": basis,
            "rate": rate,
            "prec": None if self.prec is None else str(self.prec),
            "coeffs": [{"valuation": str(nu), "value": _coeff_str(c), "float": float(c)}
                       for nu, c in self.terms],
        }


def _coeff_str(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return MP.nstr(c, 30)


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def series_arithmetic(a: TruncatedSeries, b: TruncatedSeries | None, op: str, prec=None) -> TruncatedSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a.div(b, prec)
    if op == "sqrt":
        return a.sqrt(prec)
    if op == "differentiate":
        return a.derivative()
    raise ValueError(f"unknown series operation {op!r}")


# -- recurrences -----------------------------------------------------------

def separatrix_series_generic(u: TruncatedSeries, order: int) -> TruncatedSeries:
    """Expansion ``u + sum_n h_n[u] / u**n`` for a divergent, slowly varying u.

    The differential polynomials ``h_n`` are never formed symbolically: each is
    an evaluated series over the concrete input `u`.  `order` counts steps of
    ``phi**-2`` below the leading term, so the result is truncated at
    valuation ``val(u) + 2*(order + 1)``.
    """
    if not isinstance(u.basis, InversePower):
        raise BasisMismatch("the generic expansion needs an inverse-power series for u")
    if u.is_zero or u.valuation >= 0:
        raise NotDivergent("u must grow: its leading exponent has to be positive")
    if u.leading_coefficient <= 0:
        raise NotDivergent("u must have a positive leading coefficient")
    vu = u.valuation
    target = vu + 2 * (order + 1)
    du = u.derivative()
    one = TruncatedSeries.constant(u.basis, 1)
    zero = TruncatedSeries(u.basis, (), None)
    hs = {-1: one, 0: zero}  # h_{-2} = 0 is never referenced below

    def g(m):
        return hs[m].derivative() - (m - 1) * (hs[m - 1] * du)

    gs = {0: g(0)}
    total = u
    n = 0
    # every term of h_n carries at least n+1 derivatives of u, so its
    # contribution h_n/u**n has valuation >= val(u) + n + 1
    while vu + (n + 1) + 1 < target + 1:
        acc = zero
        for j in range(0, n + 1):
            k = n - j
            acc = acc + gs[j] * gs[k] - hs[j] * hs[k]
        h_next = acc * Fraction(1, 2)
        hs[n + 1] = h_next
        gs[n + 1] = g(n + 1)
        if not h_next.is_zero:
            m = n + 1
            inv = u.power(-m, prec=target - h_next.valuation)
            total = total + h_next * inv
        n += 1
    out = total.truncate(target)
    # the natural lattice is val(u) + 2k unless u itself has finer spacing
    step = _frac_gcd(Fraction(2), u.lattice_step) if len(u.terms) > 1 else Fraction(2)
    if all(((nu - vu) / step).denominator == 1 for nu, _ in out.terms):
        out = TruncatedSeries(out.basis, out.terms, out.prec, step)
    return out


def monomial_coefficients(p: int, order: int) -> list[Fraction]:
    """b_0..b_order of ``phi**p + sum b_n phi**(p-2n)`` for v = phi**(2p)."""
    if p < 1:
        raise ValueError("p must be a positive integer")
    b = [Fraction(1), Fraction(p * p, 2)]
    for n in range(1, order):
        s1 = sum((b[j] * b[n + 1 - j] for j in range(1, n + 1)), Fraction(0))
        s2 = sum(((p - 2 * j) * (p - 2 * (n - j)) * b[j] * b[n - j] for j in range(1, n)), Fraction(0))
        b.append(p * (p - 2 * n) * b[n] - s1 / 2 + s2 / 2)
    return b[:order + 1]


def separatrix_series_monomial(p: int, order: int) -> TruncatedSeries:
    b = monomial_coefficients(p, order)
    return TruncatedSeries.from_terms(
        InversePower(), [(-p + 2 * n, c) for n, c in enumerate(b)], -p + 2 * (order + 1), step=2)


def emodel_coefficients(p: int, beta, order: int) -> list:
    """b_n of ``sum b_n exp(-n beta phi)`` for v = (1 - exp(-beta phi))**(2p)."""
    if p < 1:
        raise ValueError("p must be a positive integer")
    beta = exact(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    b2 = beta * beta
    b = [Fraction(1), Fraction(-p), Fraction(p * (2 * p - 1), 2) + (b2 - 1) * p * p / 2]
    for n in range(3, order + 1):
        s = sum(((b2 * j * (n - j) - 1) * b[j] * b[n - j] for j in range(2, n - 1)), Fraction(0))
        bn = -(b2 * (n - 1) - 1) * p * b[n - 1] + s / 2
        if n <= 2 * p:
            bn += Fraction((-1) ** n * math.comb(2 * p, n), 2)
        b.append(bn)
    return b[:order + 1]


def separatrix_series_emodel(p: int, beta, order: int) -> TruncatedSeries:
    beta = exact(beta)
    b = emodel_coefficients(p, beta, order)
    return TruncatedSeries.from_terms(Exponential(beta), list(enumerate(b)), order + 1, step=1)


def steepwell_coefficients(beta, order: int) -> list:
    """b_0 = 1/sqrt(1-beta^2) and the b_n multiplying exp(-beta(4n-1)phi)."""
    beta = exact(beta)
    if beta >= 1:
        raise SteepnessError("the steep well has no separatrix for beta >= 1")
    if beta <= 0:
        raise ValueError("beta must be positive")
    b2 = beta * beta
    r = _sqrt(1 - b2)
    b = [1 / r]
    if order >= 1:
        b.append(r / (2 * (3 * b2 + 1)))
    for n in range(2, order + 1):
        s = sum((((4 * j - 1) * (4 * (n - j) - 1) * b2 - 1) * b[j] * b[n - j] for j in range(1, n)), 0)
        b.append(r / (2 * ((4 * n - 1) * b2 + 1)) * s)
    return b


def separatrix_series_steepwell(beta, order: int) -> TruncatedSeries:
    beta = exact(beta)
    b = steepwell_coefficients(beta, order)
    return TruncatedSeries.from_terms(
        Exponential(beta), [(4 * n - 1, c) for n, c in enumerate(b)], 4 * order + 3, step=4)


# -- diagnostics and evaluation ------------------------------------------

@dataclass(frozen=True)
class SeriesDiagnostics:
    n: tuple
    ratios: tuple
    fitted_growth: float


def diagnostics(coeffs: Sequence, n_min: int = 1, n_max: int | None = None) -> SeriesDiagnostics:
    """Ratios b_n/b_{n-1} and the least-squares slope of the ratio against n."""
    n_max = len(coeffs) - 1 if n_max is None else n_max
    ns, rs = [], []
    for n in range(max(n_min, 1), n_max + 1):
        if coeffs[n - 1] == 0 or coeffs[n] == 0:
            raise ZeroLeadingCoefficient(f"coefficient {n - 1 if coeffs[n - 1] == 0 else n} vanishes")
        ns.append(n)
        rs.append(float(Fraction(coeffs[n]) / Fraction(coeffs[n - 1]))
                  if isinstance(coeffs[n], Fraction) and isinstance(coeffs[n - 1], Fraction)
                  else float(coeffs[n] / coeffs[n - 1]))
    slope = float(np.polyfit(ns, rs, 1)[0]) if len(ns) >= 2 else float("nan")
    return SeriesDiagnostics(tuple(ns), tuple(rs), slope)


@dataclass(frozen=True)
class SeriesValue:
    value: float
    terms_used: int
    last_term_magnitude: float


def evaluate_series(s: TruncatedSeries, phi: float, mode: str = "fixed", order: int | None = None) -> SeriesValue:
    """Partial sum at phi.

    ``mode="fixed"`` sums the leading term and `order` further lattice terms
    (all terms when `order` is None).  ``mode="optimal_truncation"`` always
    keeps the leading term and stops before the first term whose magnitude
    exceeds its predecessor's.
    """
    if isinstance(s.basis, InversePower) and phi <= 0:
        raise ValueError("inverse-power series need phi > 0")
    if mode == "fixed":
        nu0, step = s.valuation, s.lattice_step
        cutoff = None if order is None else nu0 + step * order
        vals = [(nu, v) for (nu, _), v in zip(s.terms, s.term_values(phi)) if cutoff is None or nu <= cutoff]
        used = len(vals)
        return SeriesValue(float(sum(v for _, v in vals)), used, abs(vals[-1][1]) if vals else 0.0)
    if mode == "optimal_truncation":
        vals = s.term_values(phi)
        total, used, last = vals[0], 1, abs(vals[0])
        for v in vals[1:]:
            if abs(v) > last:
                break
            total += v
            used += 1
            last = abs(v)
        return SeriesValue(float(total), used, last)
    raise ValueError(f"unknown evaluation mode {mode!r}")


def tail(s: TruncatedSeries, k: int = 1) -> TruncatedSeries:
    """Drop the first `k` nonzero terms."""
    return TruncatedSeries(s.basis, s.terms[k:], s.prec, s.step)


def equation_residual(h: TruncatedSeries, v: TruncatedSeries) -> TruncatedSeries:
    """``(h')**2 - h**2 + v``; vanishes to the truncation for a formal solution."""
    dh = h.derivative()
    return dh * dh - h * h + v


def lattice_series(basis, lead, step, coeffs, prec=None) -> TruncatedSeries:
    return TruncatedSeries.from_terms(
        basis, [(Fraction(lead) + k * Fraction(step), c) for k, c in enumerate(coeffs)], prec, step)


def as_callable(s: TruncatedSeries) -> Callable[[float], float]:
    return lambda phi: s(phi)
