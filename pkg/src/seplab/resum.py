"""Resummation of divergent separatrix tails: erfc-type approximants and Pade rationals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConfigError, SignError, SingularPadeSystem
from .series import InversePower, TruncatedSeries

_SQRT_PI = math.sqrt(math.pi)
_CF_SWITCH = 3.0


def _erfcx_cf(z: float) -> float:
    """Continued fraction e^{z^2} erfc(z) = (1/sqrt(pi)) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))).

    Evaluated with the modified Lentz algorithm; used for z >= 3 where it
    converges in a few dozen terms.
    """
    tiny = 1e-300
    f = z
    c, d = z, 0.0
    for k in range(1, 2000):
        a = 0.5 * k
        d = z + a * d
        d = 1.0 / (d if d != 0 else tiny)
        c = z + a / c
        if c == 0:
            c = tiny
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return 1.0 / (_SQRT_PI * f)


def _exp_square(z: float) -> float:
    """exp(z^2) without the rounding error of forming z*z (Veltkamp split of z)."""
    t = 134217729.0 * z  # 2^27 + 1
    hi = t - (t - z)
    lo = z - hi
    return math.exp(hi * hi) * math.exp(lo * (2.0 * hi + lo))


def erfcx_scalar(z: float) -> float:
    z = float(z)
    if math.isnan(z):
        return math.nan
    if z < 0:
        if z < -26.5:
            return math.inf
        return 2.0 * _exp_square(z) - erfcx_scalar(-z)
    if z < _CF_SWITCH:
        return math.exp(z * z) * math.erfc(z)
    if math.isinf(z):
        return 0.0
    return _erfcx_cf(z)


def erfcx(z):
    """Scaled complementary error function e^{z^2} erfc(z), overflow-free for z >= 0."""
    if np.ndim(z) == 0:
        return erfcx_scalar(z)
    arr = np.asarray(z, dtype=float)
    return np.vectorize(erfcx_scalar, otypes=[float])(arr)


def _horner(coeffs: Sequence, x):
    """sum coeffs[k] x^k."""
    acc = 0.0 * x
    for c in reversed(coeffs):
        acc = acc * x + float(c)
    return acc


@dataclass(frozen=True)
class ErfcApproximant:
    """P(phi) + Q(phi) c e^{s phi^2} erfc(sqrt(s) phi); P, Q ascending coefficients."""

    polynomial_part: tuple
    prefactor: tuple
    c: float
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise ConfigError("the Gaussian rate s must be positive")
        if len(self.prefactor) > 2:
            raise ConfigError("the prefactor has degree at most one")

    def __call__(self, phi):
        return eval_erfc_approximant(self, phi)

    def tail(self, phi):
        return _horner(self.prefactor, phi) * self.c * erfcx(math.sqrt(self.s) * np.asarray(phi, dtype=float))

    def tail_coefficients(self, n: int) -> list[float]:
        """Large-phi coefficients of c e^{s phi^2} erfc(sqrt(s) phi) on phi^-1, phi^-3, ...

        From erfc(z) ~ e^{-z^2}/(z sqrt(pi)) sum_k (-1)^k (2k-1)!! / (2 z^2)^k.
        """
        lead = self.c / math.sqrt(math.pi * self.s)
        out, dfact = [], 1.0
        for k in range(n):
            if k:
                dfact *= 2 * k - 1
            out.append(lead * (-1) ** k * dfact / (2 * self.s) ** k)
        return out


def eval_erfc_approximant(a: ErfcApproximant, phi):
    return _horner(a.polynomial_part, phi) + a.tail(phi)


def educated_match(b0, b1, polynomial_part: Sequence = (0, 1)) -> ErfcApproximant:
    """Match c e^{s phi^2} erfc(sqrt(s) phi) to the tail b0/phi + b1/phi^3 + ...

    Equating the first two large-phi coefficients gives s = -b0/(2 b1) and
    c = b0 sqrt(pi s).  `polynomial_part` carries the non-divergent leading
    terms (phi alone for the quadratic model).
    """
    b0, b1 = float(b0), float(b1)
    if b0 * b1 >= 0 or b0 <= 0:
        raise SignError(f"need b0 > 0 > b1 for an alternating tail, got ({b0}, {b1})")
    s = -b0 / (2.0 * b1)
    return ErfcApproximant(tuple(polynomial_part), (1,), b0 * math.sqrt(math.pi * s), s)


def quartic_approximant() -> ErfcApproximant:
    """1 + phi^2 + sqrt(pi/2) phi e^{phi^2/4} erfc(phi/2), shipped verbatim."""
    return ErfcApproximant((1, 0, 1), (0, 1), math.sqrt(math.pi / 2.0), 0.25)


# -- Pade ----------------------------------------------------------------

def _solve_exact(A: list[list], b: list) -> list:
    """Gaussian elimination with exact (Fraction) or float entries."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0 or (not isinstance(M[piv][col], Fraction) and abs(float(M[piv][col])) < 1e-300):
            raise SingularPadeSystem("Pade linear system is singular")
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


@dataclass(frozen=True)
class PadeApproximant:
    """t^{v0} N(y)/D(y) with y = t^{step}, t the small basis function."""

    m: int
    n: int
    numerator: tuple
    denominator: tuple  # denominator[0] == 1
    basis: object
    lead: Fraction
    step: Fraction

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        if isinstance(self.basis, InversePower):
            t = 1.0 / phi
        else:
            t = np.exp(-float(self.basis.rate) * phi)
        y = t ** float(self.step)
        out = t ** float(self.lead) * _horner(self.numerator, y) / _horner(self.denominator, y)
        return out if out.ndim else float(out)

    def phi_polynomials(self):
        """(numerator, denominator) as numpy polynomials in phi (InversePower, integer exponents).

        phi^{-v0} N(phi^{-s})/D(phi^{-s}) = [phi^K N(phi^{-s})] / [phi^{K+v0} D(phi^{-s})]
        with K = s * max(m, n).
        """
        if not isinstance(self.basis, InversePower):
            raise ConfigError("phi polynomials exist only for inverse-power series")
        s, v0 = self.step, self.lead
        if s.denominator != 1 or v0.denominator != 1:
            raise ConfigError("fractional exponents have no polynomial form")
        s, v0 = int(s), int(v0)
        K = s * max(self.m, self.n)
        shift = max(0, -v0)
        num = np.zeros(K + shift + 1)
        den = np.zeros(K + v0 + shift + 1)
        for k, c in enumerate(self.numerator):
            num[K + shift - s * k] += float(c)
        for k, c in enumerate(self.denominator):
            den[K + v0 + shift - s * k] += float(c)
        # ascending-index arrays -> numpy Polynomial
        return np.polynomial.Polynomial(num), np.polynomial.Polynomial(den)

    def poles(self) -> np.ndarray:
        """Real, non-negative phi where the denominator (as a phi polynomial) vanishes."""
        _, den = self.phi_polynomials()
        r = den.roots()
        real = r[np.abs(r.imag) < 1e-9 * (1 + np.abs(r.real))].real
        return np.sort(real[real >= -1e-12])


def pade(series: TruncatedSeries, m: int, n: int) -> PadeApproximant:
    """[m/n] Pade approximant in y = t^{step} after pulling out the leading t^{v0}."""
    if m < 0 or n < 0:
        raise ConfigError("Pade orders must be non-negative")
    c = series.coeffs
    if len(c) < m + n + 1:
        raise ConfigError(f"[{m}/{n}] needs {m + n + 1} coefficients, the series has {len(c)}")
    c = list(c[: m + n + 1])
    coef = lambda k: c[k] if 0 <= k < len(c) else 0  # noqa: E731
    if n:
        A = [[coef(m + i - j) for j in range(1, n + 1)] for i in range(1, n + 1)]
        b = [-coef(m + i) for i in range(1, n + 1)]
        q = [Fraction(1) if isinstance(c[0], Fraction) else 1.0] + _solve_exact(A, b)
    else:
        q = [1]
    p = [sum((q[j] * coef(i - j) for j in range(0, min(i, n) + 1)), 0) for i in range(m + 1)]
    return PadeApproximant(m, n, tuple(p), tuple(q), series.basis, series.valuation, series.lattice_step)


def eval_pade(a: PadeApproximant, phi):
    return a(phi)
