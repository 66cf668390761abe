"""Special functions: Gamma family, incomplete gamma, Mittag-Leffler type
series, q-Pochhammer symbols and Fox-Wright series.

Every series evaluator returns a :class:`SeriesValue` carrying a truncation
error estimate that bounds the first omitted term.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special as sc

from .errors import DomainError, NumericalError

__all__ = [
    "SeriesEvalPolicy",
    "SeriesValue",
    "DEFAULT_POLICY",
    "gamma",
    "lgamma",
    "loggamma",
    "digamma",
    "beta",
    "inc_gamma",
    "lower_inc_gamma",
    "reg_lower_inc_gamma",
    "pochhammer",
    "mittag_leffler",
    "mittag_leffler_value",
    "inc_mittag_leffler",
    "q_pochhammer",
    "fox_wright",
    "wright_2f2",
    "sum_series",
]


@dataclass(frozen=True)
class SeriesEvalPolicy:
    rel_cutoff: float = 1e-16
    max_terms: int = 500
    condition_alarm: float = 1e8

    def __post_init__(self):
        if not self.rel_cutoff > 0:
            raise ValueError("rel_cutoff must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_POLICY = SeriesEvalPolicy()


@dataclass(frozen=True)
class SeriesValue:
    value: float
    error: float
    terms: int
    condition: float

    def __float__(self) -> float:
        return float(self.value)


def sum_series(term: Callable[[int], float], policy: SeriesEvalPolicy = DEFAULT_POLICY,
               start: int = 0) -> SeriesValue:
    """Sum ``term(n)`` for n >= start until the terms fall below the cutoff.

    Stops after two consecutive small terms whose magnitudes are decreasing.
    The error estimate is a geometric bound on the tail seeded by the first
    omitted term, plus accumulated rounding.
    """
    total = 0.0
    abs_total = 0.0
    small = 0
    n = start
    prev = None
    while True:
        t = term(n)
        if not np.isfinite(t):
            raise NumericalError(f"non-finite series term at n={n}")
        total += t
        abs_total += abs(t)
        n += 1
        decreasing = prev is None or abs(t) <= abs(prev)
        prev = t
        if abs(t) <= policy.rel_cutoff * abs(total) and decreasing:
            small += 1
            if small >= 2:
                break
        elif abs(t) == 0.0 and total == 0.0:
            small += 1
            if small >= 4:
                break
        else:
            small = 0
        if n - start >= policy.max_terms:
            raise NumericalError(
                f"series did not converge within {policy.max_terms} terms")
    nxt = term(n)
    ratio = abs(nxt / t) if t != 0 else 0.0
    ratio = min(ratio, 0.5)
    err = abs(nxt) / (1.0 - ratio) + 2.0 * np.finfo(float).eps * abs_total
    cond = abs_total / abs(total) if total != 0 else math.inf
    if cond > policy.condition_alarm:
        raise NumericalError(f"series cancellation too severe (condition {cond:.3g})")
    return SeriesValue(float(total), float(err), n - start, float(cond))


# ---------------------------------------------------------------- Gamma family

_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and float(z.real).is_integer()


def _loggamma_scalar(z: complex) -> complex:
    if _is_pole(z):
        raise DomainError(f"Gamma pole at {z.real}")
    if z.real < 0.5:
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return cmath.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - _loggamma_scalar(1.0 - z)
    z = z - 1.0
    x = _LANCZOS_P[0]
    for i in range(1, 9):
        x += _LANCZOS_P[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def loggamma(z):
    """Complex log-Gamma by the Lanczos approximation.

    The imaginary part is only defined modulo 2*pi; exponentiate or use the
    real part when comparing against other branches.
    """
    if np.ndim(z) == 0:
        return _loggamma_scalar(complex(z))
    arr = np.asarray(z, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    for idx, v in np.ndenumerate(arr):
        out[idx] = _loggamma_scalar(complex(v))
    return out


def _check_real_pole(x):
    xa = np.asarray(x, dtype=float)
    if np.any((xa <= 0) & (xa == np.round(xa))):
        raise DomainError("Gamma pole")


def gamma(x):
    _check_real_pole(x)
    return sc.gamma(x)


def lgamma(x):
    """log|Gamma(x)| for real x."""
    _check_real_pole(x)
    return sc.gammaln(x)


def digamma(x):
    _check_real_pole(x)
    return sc.digamma(x)


def beta(a, b):
    _check_real_pole(a)
    _check_real_pole(b)
    return sc.beta(a, b)


def inc_gamma(a, b):
    """Upper incomplete gamma Gamma(a, b) = int_b^inf t^(a-1) e^-t dt."""
    if np.any(np.asarray(a) <= 0):
        raise DomainError("inc_gamma needs a > 0")
    if np.any(np.asarray(b) < 0):
        raise DomainError("inc_gamma needs b >= 0")
    return sc.gammaincc(a, b) * sc.gamma(a)


def lower_inc_gamma(a, b):
    """Lower incomplete gamma int_0^b t^(a-1) e^-t dt."""
    if np.any(np.asarray(a) <= 0):
        raise DomainError("lower_inc_gamma needs a > 0")
    if np.any(np.asarray(b) < 0):
        raise DomainError("lower_inc_gamma needs b >= 0")
    return sc.gammainc(a, b) * sc.gamma(a)


def reg_lower_inc_gamma(a, b):
    if np.any(np.asarray(a) <= 0):
        raise DomainError("reg_lower_inc_gamma needs a > 0")
    return sc.gammainc(a, b)


def pochhammer(z, a):
    """(z)_a = Gamma(z+a)/Gamma(z), real or complex z.

    Real arguments with z at a pole of Gamma(z) and z+a off the pole set give
    0; poles of the numerator raise.
    """
    if np.iscomplexobj(z) or isinstance(z, complex):
        return np.exp(loggamma(np.asarray(z) + a) - loggamma(z))
    za = np.asarray(z, dtype=float)
    top = za + a
    if np.any((top <= 0) & (top == np.round(top))):
        raise DomainError("Pochhammer symbol has a pole")
    out = sc.poch(za, a)
    return out if np.ndim(z) else float(out)


# ------------------------------------------------------- Mittag-Leffler series

def _inv_gamma(x: float) -> float:
    if x < 150.0:
        return float(sc.rgamma(x))
    return math.exp(-float(sc.gammaln(x)))


def mittag_leffler(alpha: float, beta_: float, x: float,
                   policy: SeriesEvalPolicy = DEFAULT_POLICY) -> SeriesValue:
    """E_{alpha,beta}(x) = sum_n x^n / Gamma(alpha n + beta)."""
    if not alpha > 0:
        raise DomainError("mittag_leffler needs alpha > 0")
    x = float(x)
    if x == 0.0:
        return SeriesValue(_inv_gamma(beta_), 0.0, 1, 1.0)
    lx = math.log(abs(x))
    sgn = -1.0 if x < 0 else 1.0

    def term(n):
        arg = alpha * n + beta_
        if arg > 0:
            return (sgn ** n) * math.exp(n * lx - float(sc.gammaln(arg)))
        return (x ** n) * _inv_gamma(arg)

    return sum_series(term, policy)


def mittag_leffler_value(alpha, beta_, x):
    return mittag_leffler(alpha, beta_, x).value


def inc_mittag_leffler(alpha: float, beta_: float, x: float, kappa: float,
                       lower: bool = True,
                       policy: SeriesEvalPolicy = DEFAULT_POLICY) -> SeriesValue:
    """sum_n G(alpha n + beta, x) kappa^n / Gamma(alpha n + beta).

    G is the lower incomplete gamma by default, so each coefficient is the
    regularized P(alpha n + beta, x). With ``lower=False`` the upper function
    Q is used; that series diverges unless |kappa| < 1.
    """
    if not alpha > 0:
        raise DomainError("inc_mittag_leffler needs alpha > 0")
    if beta_ <= 0:
        raise DomainError("inc_mittag_leffler needs beta > 0")
    if x < 0:
        raise DomainError("inc_mittag_leffler needs x >= 0")
    if not lower and abs(kappa) >= 1:
        raise NumericalError("upper incomplete reading diverges for |kappa| >= 1")
    reg = sc.gammainc if lower else sc.gammaincc

    def term(n):
        if n == 0:
            return float(reg(beta_, x))
        if kappa == 0:
            return 0.0
        return float(reg(alpha * n + beta_, x)) * kappa ** n

    if kappa == 0:
        v = float(reg(beta_, x))
        return SeriesValue(v, 0.0, 1, 1.0)
    return sum_series(term, policy)


def q_pochhammer(a: float, q: float, n: int | None = None,
                 policy: SeriesEvalPolicy = DEFAULT_POLICY) -> SeriesValue:
    """(a; q)_n = prod_{j<n} (1 - a q^j); n=None gives the infinite product."""
    if not abs(q) < 1:
        raise DomainError("q_pochhammer needs |q| < 1")
    if n is not None:
        p = 1.0
        for j in range(n):
            p *= 1.0 - a * q ** j
        return SeriesValue(p, 0.0, n, 1.0)
    p = 1.0
    j = 0
    while True:
        f = a * q ** j
        p *= 1.0 - f
        j += 1
        if abs(f) < policy.rel_cutoff or j >= policy.max_terms:
            break
    if j >= policy.max_terms:
        raise NumericalError("q_pochhammer did not converge")
    # remaining factors multiply p by exp(-a q^j/(1-q)) up to second order
    tail = abs(a) * abs(q) ** j / (1.0 - abs(q))
    err = abs(p) * (math.expm1(tail) if tail < 1 else math.inf)
    return SeriesValue(p, err + 4 * j * np.finfo(float).eps * abs(p), j, 1.0)


def fox_wright(num: Sequence[tuple[float, float]], den: Sequence[tuple[float, float]],
               x: float, policy: SeriesEvalPolicy = DEFAULT_POLICY) -> SeriesValue:
    """Fox-Wright series sum_n prod Gamma(a_i + A_i n)/prod Gamma(b_j + B_j n) x^n/n!.

    Pairs are given as (A, a), slope first.
    """
    x = float(x)

    def coef_log(n):
        s = 0.0
        sign = 1.0
        for A, a in num:
            arg = a + A * n
            if arg <= 0 and float(arg).is_integer():
                raise DomainError("Gamma pole in Fox-Wright coefficient")
            s += float(sc.gammaln(arg))
            sign *= float(np.sign(sc.gamma(arg))) if arg < 0 else 1.0
        for B, b in den:
            arg = b + B * n
            if arg <= 0 and float(arg).is_integer():
                return None
            s -= float(sc.gammaln(arg))
            sign *= float(np.sign(sc.gamma(arg))) if arg < 0 else 1.0
        s -= float(sc.gammaln(n + 1))
        return s, sign

    def term(n):
        c = coef_log(n)
        if c is None:
            return 0.0
        s, sign = c
        if x == 0.0:
            return sign * math.exp(s) if n == 0 else 0.0
        return sign * math.exp(s + n * math.log(abs(x))) * (-1.0 if x < 0 and n % 2 else 1.0)

    if x == 0.0:
        return SeriesValue(term(0), 0.0, 1, 1.0)
    return sum_series(term, policy)


def wright_2f2(alpha: float, delta: float, x: float, normalized: bool = True,
               policy: SeriesEvalPolicy = DEFAULT_POLICY) -> SeriesValue:
    """Wright series with numerator pairs (1, 1/alpha+1), (1, 1) and
    denominator pairs (1, 1/alpha+1-delta), (alpha, alpha).

    The n-th term is Gamma(n+1/a+1)/(Gamma(n+1/a+1-d) Gamma(a n + a)) x^n.
    With ``normalized`` it is multiplied by
    Gamma(a) Gamma(1/a+1-d)/Gamma(1/a+1), so delta=0 gives Gamma(a) E_{a,a}(x).
    """
    s = fox_wright([(1.0, 1.0 / alpha + 1.0), (1.0, 1.0)],
                   [(1.0, 1.0 / alpha + 1.0 - delta), (alpha, alpha)], x, policy)
    if not normalized:
        return s
    c = math.exp(float(sc.gammaln(alpha) + sc.gammaln(1.0 / alpha + 1.0 - delta)
                       - sc.gammaln(1.0 / alpha + 1.0)))
    return SeriesValue(c * s.value, c * s.error, s.terms, s.condition)
