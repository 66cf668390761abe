"""Exponential functionals I = int_0^inf e^{-xi_s} ds.

Integer moments come from the recursions for subordinators (positive
moments) and spectrally negative processes (negative moments). Fractional
moments, densities and factorizations are available for the families with
closed-form laws.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy import special as sc

from . import specfun
from .errors import DomainError, NumericalError, RegimeError, ValidationError
from .exponents import (
    Brownian,
    CPExpSub,
    LaplaceExponent,
    Pochhammer,
    PoissonSub,
    Stable,
    StableSub,
    cramer_root,
    drift_at_zero,
)
from .factors import BetaFactor, ConstantFactor, DistributionFactor, GammaFactor, MellinFactor
from .transform import TComposed, TDeltaBeta, esscher, t_transform

__all__ = [
    "MomentLadder",
    "DensityHandle",
    "EKResult",
    "TailAsymptote",
    "ClosedLaw",
    "sub_moments",
    "sub_tbeta_moments",
    "sub_mellin",
    "sn_neg_moments",
    "sn_mellin",
    "sn_tbeta_density",
    "cramer_shift",
    "exp_functional_factor",
    "beta_factorization",
    "density_tdelta_theta",
    "ek_apply",
    "ek_eigenvalue",
    "tail_asymptote",
    "closed_laws",
    "poisson_qseries_density",
    "stable_sub_log_mellin_lk",
    "lamperti_sub_readings",
]

_ZERO_TOL = 1e-10


# ------------------------------------------------------------------ ladders

@dataclass(frozen=True)
class MomentLadder:
    """values[i] = E[I^{sign * orders[i]}]."""
    label: str
    sign: str
    orders: tuple
    values: tuple

    def __getitem__(self, n: int) -> float:
        try:
            return self.values[self.orders.index(n)]
        except ValueError:
            raise KeyError(n) from None

    def to_json(self) -> dict:
        s = 1 if self.sign == "positive" else -1
        return {"label": self.label, "sign": self.sign,
                "moments": [{"order": s * n, "value": v} for n, v in zip(self.orders, self.values)]}


def _real(v) -> float:
    return float(np.real(v))


def sub_moments(phi: LaplaceExponent, N: int) -> MomentLadder:
    """E[I^n] = n!/prod_{k<=n} phi(k), built by m_n = n m_{n-1}/phi(n)."""
    if not phi.is_subordinator:
        raise RegimeError("sub_moments needs a subordinator exponent")
    if N < 0:
        raise ValidationError("N must be >= 0")
    vals, m = [1.0], 1.0
    for n in range(1, N + 1):
        p = _real(phi(float(n)))
        if not p > 0:
            raise DomainError(f"phi({n}) = {p} is not positive")
        m = m * n / p
        vals.append(m)
    return MomentLadder(phi.describe(), "positive", tuple(range(N + 1)), tuple(vals))


def _lg(z) -> complex:
    z = complex(z)
    if z.imag == 0 and z.real > 0:
        return complex(sc.gammaln(z.real))
    return specfun.loggamma(z)


def _q_poch_inf(a: complex, q: float) -> complex:
    """(a; q)_inf for complex a, truncated when |a q^j| < 1e-17."""
    out, t = 1.0 + 0j, complex(a)
    for _ in range(10000):
        if abs(t) < 1e-17:
            return out
        out *= 1.0 - t
        t *= q
    raise NumericalError("q-Pochhammer product did not converge")


def sub_mellin(phi: LaplaceExponent) -> Callable[[complex], complex] | None:
    """s -> E[I_phi^s] for subordinator families with a known law, else None."""
    if isinstance(phi, StableSub):
        a = phi.alpha
        return lambda s: cmath.exp((1 - a) * _lg(1 + s))
    if isinstance(phi, Pochhammer) and phi.convention == "phi" and phi.scale == phi.alpha:
        a, c = phi.alpha, phi.shift
        return lambda s: cmath.exp(_lg(1 + s) + _lg(a + c) - _lg(a * (1 + s) + c))
    if isinstance(phi, CPExpSub):
        c, b, k = phi.c, phi.b, phi.kappa
        kb = k * b / (k + c)
        return lambda s: cmath.exp(-s * math.log(k + c) + _lg(b + 1 + s) - _lg(b + 1)
                                   + _lg(1 + s) + _lg(1 + kb) - _lg(1 + kb + s))
    if isinstance(phi, PoissonSub):
        lam, q = phi.rate, phi.q
        qq = _q_poch_inf(q, q)
        return lambda s: cmath.exp(-s * math.log(lam) + _lg(1 + s)) * _q_poch_inf(q ** (1 + s), q) / qq
    if isinstance(phi, TDeltaBeta) and phi.delta == phi.beta and phi.beta > 0 and phi.base.is_subordinator:
        base = sub_mellin(phi.base)
        if base is None:
            return None
        b = phi.beta
        nb = base(b)
        return lambda s: base(s + b) / nb
    return None


def sub_tbeta_moments(phi: LaplaceExponent, beta: float, N: int) -> MomentLadder:
    """E[I_{T_beta phi}^n] = E[I_phi^{n+beta}]/E[I_phi^beta]."""
    if beta < 0:
        raise DomainError("beta must be >= 0")
    if beta == 0:
        return sub_moments(phi, N)
    if float(beta).is_integer():
        lad = sub_moments(phi, N + int(beta))
        b = int(beta)
        vals = tuple(lad.values[n + b] / lad.values[b] for n in range(N + 1))
    else:
        M = sub_mellin(phi)
        if M is None:
            raise DomainError(f"fractional moments of I unavailable for {phi.describe()}")
        mb = _real(M(beta))
        vals = tuple(_real(M(n + beta)) / mb for n in range(N + 1))
    return MomentLadder(f"T_{beta:g}({phi.describe()})", "positive", tuple(range(N + 1)), vals)


def sn_neg_moments(psi: LaplaceExponent, N: int) -> MomentLadder:
    """E[I^{-n}] = psi'(0+) prod_{k<n} psi(k)/Gamma(n), with E[I^{-1}] = psi'(0+)."""
    if psi.is_subordinator:
        raise RegimeError("sn_neg_moments needs a spectrally negative exponent")
    if abs(_real(psi(0.0))) > _ZERO_TOL:
        raise RegimeError("sn_neg_moments needs psi(0) = 0")
    d0 = drift_at_zero(psi)
    if not d0 > 0:
        raise RegimeError(f"psi'(0+) = {d0} must be positive for I to be finite")
    vals, m = [], d0
    for n in range(1, N + 1):
        if n > 1:
            m = m * _real(psi(float(n - 1))) / (n - 1)
        vals.append(m)
    return MomentLadder(psi.describe(), "negative", tuple(range(1, N + 1)), tuple(vals))


def cramer_shift(psi: LaplaceExponent) -> tuple[float, LaplaceExponent]:
    """(theta, psi_theta) with psi_theta(u) = psi(u + theta), as a closed family when possible."""
    th = cramer_root(psi)
    if th == 0:
        return 0.0, psi
    if isinstance(psi, Brownian):
        return th, Brownian(psi.sigma2, psi.drift + psi.sigma2 * th, 0.0)
    if isinstance(psi, Stable):
        return th, Stable(psi.alpha, 0.0, psi.c + th)
    if isinstance(psi, Pochhammer):
        sh = psi.shift + psi.scale * th
        if abs(sh) < 1e-12:
            sh = 0.0
        return th, Pochhammer(psi.alpha, psi.scale, sh)
    return th, esscher(psi, th)


def sn_mellin(psi: LaplaceExponent) -> Callable[[complex], complex] | None:
    """s -> E[I_psi^s] for spectrally negative families with a known law, else None."""
    if isinstance(psi, Brownian) and psi.kappa == 0 and psi.drift > 0:
        if psi.sigma2 == 0:
            return lambda s: cmath.exp(-s * math.log(psi.drift))
        c = 2 * psi.drift / psi.sigma2
        k = math.log(2 / psi.sigma2)
        return lambda s: cmath.exp(s * k + _lg(c - s) - _lg(c))
    if (isinstance(psi, Pochhammer) and psi.convention == "psi" and psi.shift == 0
            and abs(psi.scale - (psi.alpha - 1)) < 1e-14):
        p = psi.alpha - 1
        return lambda s: cmath.exp(-s * math.log(p) + _lg(1 - p * s))
    if isinstance(psi, TDeltaBeta) and not psi.base.is_subordinator:
        if psi.delta == psi.beta and psi.beta > 0:
            base = sn_mellin(psi.base)
            if base is None:
                return None
            b = psi.beta
            nb = base(-b)
            return lambda s: base(s - b) / nb
        try:
            fac = beta_factorization(psi.base, psi.delta) if psi.beta > 0 else None
        except (RegimeError, DomainError):
            return None
        if fac is not None and abs(psi.beta - cramer_root(psi.base)) < 1e-12:
            return fac.mellin
    return None


def _sn_moment(psi: LaplaceExponent, s: float) -> float:
    M = sn_mellin(psi)
    if M is not None:
        return _real(M(s))
    if s < 0 and float(s).is_integer():
        return sn_neg_moments(psi, int(-s))[int(-s)]
    raise DomainError(f"E[I^{s}] unavailable for {psi.describe()}")


def exp_functional_factor(psi: LaplaceExponent) -> DistributionFactor:
    """I_psi as a DistributionFactor: closed for Brownian and Lamperti-stable laws,
    otherwise a Mellin factor carrying the integer negative moments."""
    if isinstance(psi, Brownian) and psi.kappa == 0 and psi.drift > 0 and psi.sigma2 > 0:
        c = 2 * psi.drift / psi.sigma2
        return DistributionFactor((ConstantFactor(2 / psi.sigma2), GammaFactor(c, power=-1.0)))
    if (isinstance(psi, Pochhammer) and psi.convention == "psi" and psi.shift == 0
            and abs(psi.scale - (psi.alpha - 1)) < 1e-14):
        p = psi.alpha - 1
        return DistributionFactor((ConstantFactor(1 / p), GammaFactor(1.0, power=-p)))
    sn_neg_moments(psi, 1)

    def moment(s):
        s = complex(s)
        if s.imag == 0 and s.real < 0 and s.real.is_integer():
            n = int(-s.real)
            return complex(sn_neg_moments(psi, n)[n])
        if s == 0:
            return 1 + 0j
        raise DomainError(f"only integer negative moments of I are known for {psi.describe()}")

    return DistributionFactor((MellinFactor(f"I[{psi.describe()}]", moment),))


def beta_factorization(psi: LaplaceExponent, delta: float) -> DistributionFactor:
    """I_{T_{delta,theta} psi} = B(theta-delta, delta)^{-1} I_{psi_theta}, 0 < delta < theta."""
    th, pth = cramer_shift(psi)
    if not th > 0:
        raise RegimeError("beta_factorization needs theta > 0 (psi'(0+) < 0 or killing)")
    if not 0 <= delta < th:
        raise DomainError(f"delta must lie in [0, theta) = [0, {th:g})")
    fac = exp_functional_factor(pth)
    if delta == 0:
        return fac
    return DistributionFactor((BetaFactor(th - delta, delta, power=-1.0),)) * fac


# ------------------------------------------------------------------ densities

@dataclass
class DensityHandle:
    func: Callable[[float], float]
    tag: str
    label: str = ""

    def __call__(self, x):
        if np.ndim(x):
            return np.array([self.func(float(v)) if v > 0 else 0.0 for v in np.ravel(x)]).reshape(np.shape(x))
        return self.func(float(x)) if x > 0 else 0.0

    def moment(self, s: float = 0.0, tol: float = 1e-12) -> tuple[float, float]:
        """int_0^inf x^s f(x) dx and its quadrature error, via x = e^t."""
        def g(t):
            x = math.exp(t)
            return x ** (s + 1) * self.func(x)

        ts = np.arange(-60.0, 60.0, 0.25)
        vals = np.array([abs(_safe(g, t)) for t in ts])
        peak = vals.max()
        if not np.isfinite(peak) or peak == 0:
            raise NumericalError("density handle has no mass on the scanned range")
        keep = np.nonzero(vals > 1e-18 * peak)[0]
        lo, hi = ts[max(keep[0] - 1, 0)], ts[min(keep[-1] + 1, len(ts) - 1)]
        edges = np.linspace(lo, hi, 25)
        total, err = 0.0, 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            v, e = integrate.quad(g, a, b, epsabs=tol * 1e-2, epsrel=1e-12, limit=200)
            total += v
            err += e
        return total, err

    def mass(self, tol: float = 1e-12) -> float:
        return self.moment(0.0, tol)[0]

    def reweight(self, power: float, norm: float, tag: str = "reweighted") -> "DensityHandle":
        f = self.func
        return DensityHandle(lambda x: x ** power * f(x) / norm, tag, f"x^{power:g} {self.label}")


def _safe(g, t):
    try:
        return g(t)
    except (OverflowError, ZeroDivisionError):
        return 0.0


def sn_tbeta_density(f: DensityHandle, psi: LaplaceExponent, beta: float) -> DensityHandle:
    """f_{T_beta psi}(x) = x^{-beta} f_psi(x)/E[I_psi^{-beta}]."""
    if beta < 0:
        raise DomainError("beta must be >= 0")
    if beta == 0:
        return f
    d0 = drift_at_zero(psi)
    if not d0 > 0:
        raise RegimeError("sn_tbeta_density needs psi'(0+) > 0")
    try:
        norm = _sn_moment(psi, -beta)
    except DomainError:
        norm, _ = f.moment(-beta)
    if not (norm > 0 and math.isfinite(norm)):
        raise NumericalError("reweighting is not integrable")
    return f.reweight(-beta, norm)


def poisson_qseries_density(q: float, rate: float = 1.0, max_terms: int = 200) -> DensityHandle:
    """Density of I for phi(u) = rate (1 - q^u):
    rate * sum_n (-1)^n q^{n(n-1)/2}/((q;q)_inf (q;q)_n) e^{-rate x q^{-n}}."""
    if not 0 < q < 1:
        raise DomainError("q must lie in (0,1)")
    qq = float(specfun.q_pochhammer(q, q))
    coefs, qn = [], 1.0
    for n in range(max_terms):
        if n > 0:
            qn *= 1.0 - q ** n
        c = (-1) ** n * q ** (n * (n - 1) / 2.0) / (qq * qn)
        coefs.append(c)
        if abs(c) < 1e-17 * abs(coefs[0]):
            break
    cs = np.array(coefs)
    rates = q ** (-np.arange(len(cs), dtype=float))

    def f(x):
        z = rate * x * rates
        return rate * float(np.sum(cs * np.exp(-np.minimum(z, 745.0))))

    return DensityHandle(f, "closed-form", f"poisson q-series q={q:g}")


# -------------------------------------------------------------- Erdelyi-Kober

@dataclass(frozen=True)
class EKResult:
    value: float
    alt_value: float
    discrepancy: float


def ek_eigenvalue(alpha: float, delta: float, n: float) -> float:
    """D^{alpha,delta} x^n = ek_eigenvalue * x^n, i.e. E[B(alpha+1, delta)^n]."""
    return math.exp(sc.gammaln(alpha + delta + 1) + sc.gammaln(alpha + n + 1)
                    - sc.gammaln(alpha + 1) - sc.gammaln(alpha + delta + n + 1))


def _check_ek(alpha, delta):
    if not alpha > -1 or not delta > 0:
        raise DomainError("Erdelyi-Kober parameters need alpha > -1, delta > 0")


def ek_apply(f: Callable[[float], float], alpha: float, delta: float, x: float,
             tol: float = 1e-8, scale: float = 1.0) -> EKResult:
    """D^{alpha,delta} f(x) = E[f(B(alpha+1, delta) x)] by two independent quadratures.

    Route 1 substitutes r = x(1 - t^{1/delta}) in the integral form, which
    removes the (x - r)^{delta-1} singularity. Route 2 integrates against the
    Beta density with an algebraic-weight rule. Both split [0, x] at
    r = scale * 10^k so that mass of f near its own scale is resolved.
    """
    _check_ek(alpha, delta)
    if not x > 0:
        raise DomainError("x must be positive")
    norm = math.exp(sc.gammaln(alpha + delta + 1) - sc.gammaln(alpha + 1) - sc.gammaln(delta + 1))
    inv_d = 1.0 / delta
    breaks = sorted(b for b in _open_unit(scale, x) if (1.0 - b) ** delta < 1.0)
    bs = [0.0] + breaks + [1.0]
    opts = dict(epsabs=tol * 1e-3, epsrel=1e-11, limit=400)

    def w(t):
        return -math.expm1(inv_d * math.log(t)) if t > 0 else 1.0

    f0 = f(1e-300)

    def g1(t):
        wt = w(t)
        if wt <= 0:
            return f0 if alpha == 0 else 0.0
        return wt ** alpha * f(x * wt)

    def g1w(t):
        # w(t) ~ (1-t)/delta at t = 1; the (1-t)^alpha part is the weight
        wt = w(t)
        if wt <= 0 or t >= 1:
            return inv_d ** alpha * f0
        return (wt / (1.0 - t)) ** alpha * f(x * wt)

    v1 = 0.0
    for b0, b1 in zip(bs[:-1], bs[1:]):
        t0, t1 = (1.0 - b1) ** delta, (1.0 - b0) ** delta
        if b0 == 0.0 and alpha < 0:
            v, _ = integrate.quad(g1w, t0, 1.0, weight="alg", wvar=(0.0, alpha), **opts)
        else:
            v, _ = integrate.quad(g1, t0, t1, **opts)
        v1 += v
    v1 *= norm

    bnorm = math.exp(sc.gammaln(alpha + 1) + sc.gammaln(delta) - sc.gammaln(alpha + delta + 1))
    fb = lambda b: f(b * x) if b > 0 else f0
    v2 = 0.0
    last = len(bs) - 2
    for i, (b0, b1) in enumerate(zip(bs[:-1], bs[1:])):
        wa = alpha if i == 0 else 0.0
        wb = delta - 1.0 if i == last else 0.0
        if i == 0 or i == last:
            h = lambda b, i=i: fb(b) * (b ** alpha if i != 0 else 1.0) * ((1 - b) ** (delta - 1) if i != last else 1.0)
            v, _ = integrate.quad(h, b0, b1, weight="alg", wvar=(wa, wb), **opts)
        else:
            v, _ = integrate.quad(lambda b: fb(b) * b ** alpha * (1 - b) ** (delta - 1), b0, b1, **opts)
        v2 += v
    v2 /= bnorm
    disc = abs(v1 - v2)
    if disc > tol * max(1.0, abs(v1)):
        raise NumericalError(f"Erdelyi-Kober routes disagree by {disc:.3g} at x={x}")
    return EKResult(v1, v2, disc)


def _open_unit(scale, x):
    return {scale * 10.0 ** k / x for k in range(-4, 5) if 0 < scale * 10.0 ** k / x < 1}


def density_tdelta_theta(f_theta: DensityHandle, theta: float, delta: float,
                         form: str = "corrected", tol: float = 1e-8) -> DensityHandle:
    """Density of B(theta-delta, delta)^{-1} Y from the density of Y.

    form='corrected' is ((theta-delta)/theta) D^{theta-delta,delta} f, the
    density of the product. form='stated' applies D^{theta-delta-1,delta}
    as printed in the source; it is kept for the discrepancy report.
    """
    if not 0 < delta < theta:
        raise DomainError("need 0 < delta < theta")
    if form == "corrected":
        c, a = (theta - delta) / theta, theta - delta
    elif form == "stated":
        c, a = 1.0, theta - delta - 1.0
    else:
        raise ValidationError("form must be 'corrected' or 'stated'")
    g = f_theta.func
    return DensityHandle(lambda x: c * ek_apply(g, a, delta, x, tol).value, "kernel-transformed",
                         f"D[{a:g},{delta:g}] {f_theta.label}")


# ------------------------------------------------------------------ tails

@dataclass(frozen=True)
class TailAsymptote:
    exponent: float
    constant: float
    theta: float

    def to_json(self):
        return {"exponent": self.exponent, "constant": self.constant, "theta": self.theta}


def tail_asymptote(psi: LaplaceExponent, delta: float, beta: float = 0.0) -> TailAsymptote:
    """f(x) ~ constant x^exponent for I under T_beta o T_{delta,theta} psi.

    constant = Gamma(theta) E[I_{psi_theta}^{theta-delta}]/(Gamma(delta) Gamma(theta-delta)),
    divided by E[I_{T_{delta,theta} psi}^{-beta}] when beta > 0.
    """
    th, pth = cramer_shift(psi)
    if not 0 < delta < th:
        raise DomainError(f"need 0 < delta < theta = {th:g}")
    if beta < 0:
        raise DomainError("beta must be >= 0")
    m = _sn_moment(pth, th - delta)
    c = math.exp(sc.gammaln(th) - sc.gammaln(delta) - sc.gammaln(th - delta)) * m
    if beta > 0:
        c /= beta_factorization(psi, delta).moment(-beta)
    return TailAsymptote(delta - th - beta - 1.0, c, th)


# -------------------------------------------------------------- closed laws

@dataclass
class ClosedLaw:
    tag: str
    exponent: LaplaceExponent
    mellin: Callable[[complex], complex] | None = None
    density: DensityHandle | None = None
    factor: DistributionFactor | None = None
    tbeta: Callable[[float], "ClosedLaw"] | None = None
    notes: dict = field(default_factory=dict)

    def moment(self, s: float) -> float:
        if self.mellin is not None:
            return _real(self.mellin(s))
        if self.factor is not None:
            return self.factor.moment(s)
        if self.density is not None:
            return self.density.moment(s)[0]
        raise DomainError("law has no moment representation")


def stable_sub_log_mellin_lk(alpha: float, beta: float, u: float) -> complex:
    """log E[I_{T_beta phi}^{iu}] for phi(u) = u^alpha through the Levy-Khintchine form
    (1-alpha)[iu digamma(1+beta) + int_0^inf e^{-(1+beta)t}(e^{-iut} - 1 + iut) dt/(t(1-e^{-t}))]."""
    z = 1.0 + beta

    def k(t):
        return math.exp(-z * t) / (t * -math.expm1(-t))

    re, _ = integrate.quad(lambda t: k(t) * (math.cos(u * t) - 1.0), 0.0, math.inf, limit=400,
                           epsabs=1e-12, epsrel=1e-12)
    im, _ = integrate.quad(lambda t: k(t) * (u * t - math.sin(u * t)), 0.0, math.inf, limit=400,
                           epsabs=1e-12, epsrel=1e-12)
    return (1 - alpha) * (1j * u * float(sc.digamma(z)) + re + 1j * im)


def lamperti_sub_readings(alpha: float, beta: float, n: int) -> dict:
    """E[I_{T_beta phi}^n] for phi(u) = (alpha u)_alpha under three readings:
    'recursion' (the moment formula), 'independent' (G(beta+1) G'(beta+1)^{-alpha},
    independent copies) and 'same' (G(beta+1)^{1-alpha})."""
    phi = Pochhammer(alpha, alpha, 0.0, name="LampertiStableSub")
    rec = sub_tbeta_moments(phi, beta, n)[n]
    b1 = beta + 1
    ind = math.exp(sc.gammaln(b1 + n) - sc.gammaln(b1)) * _gamma_ratio(b1 - alpha * n, b1)
    same = _gamma_ratio(b1 + (1 - alpha) * n, b1)
    return {"recursion": rec, "independent": ind, "same": same}


def _gamma_ratio(a, b):
    if a <= 0:
        return math.inf
    return math.exp(sc.gammaln(a) - sc.gammaln(b))


def closed_laws(tag: str, **p) -> ClosedLaw:
    """Closed-form exponential-functional laws.

    poisson(q, rate=1): phi(u) = rate(1 - q^u), q-series density.
    cpexp(c, b, kappa): I = (kappa+c)^{-1} G(b+1) B(1, kappa_b), kappa_b = kappa b/(kappa+c).
    stable_sub(alpha): E[I^s] = Gamma(1+s)^{1-alpha}.
    lamperti_stable_sub(alpha): E[I^s] = Gamma(1+s)Gamma(alpha)/Gamma(alpha(1+s)).
    lamperti_stable_sn(alpha): I = (alpha-1)^{-1} e1^{-(alpha-1)} for psi(u) = ((alpha-1)u)_alpha.
    dufresne(sigma2, drift): I = 2/(sigma2 G(2 drift/sigma2)).
    """
    if tag == "poisson":
        q, rate = float(p["q"]), float(p.get("rate", 1.0))
        phi = PoissonSub(rate, -math.log(q), form="unit_rate" if rate == 1.0 else "rate_jump")
        M = sub_mellin(phi)
        dens = poisson_qseries_density(q, rate)

        def tb(beta):
            return ClosedLaw(f"poisson_t{beta:g}", t_transform(phi, beta, beta),
                             lambda s: M(s + beta) / M(beta),
                             dens.reweight(beta, _real(M(beta))))

        return ClosedLaw(tag, phi, M, dens, None, tb)
    if tag == "cpexp":
        c, b, k = float(p["c"]), float(p["b"]), float(p.get("kappa", 0.0))
        phi = CPExpSub(c, b, k)
        kb = k * b / (k + c)

        def fac(beta):
            return DistributionFactor((ConstantFactor(1.0 / (k + c)), GammaFactor(b + beta + 1),
                                       BetaFactor(beta + 1, kb)))

        def tb(beta):
            return ClosedLaw(f"cpexp_t{beta:g}", t_transform(phi, beta, beta), None, None, fac(beta))

        return ClosedLaw(tag, phi, sub_mellin(phi), None, fac(0.0), tb, {"kappa_b": kb})
    if tag == "stable_sub":
        a = float(p["alpha"])
        phi = StableSub(a)
        M = sub_mellin(phi)

        def tb(beta):
            return ClosedLaw(f"stable_sub_t{beta:g}", t_transform(phi, beta, beta),
                             lambda s: cmath.exp((1 - a) * (_lg(1 + beta + s) - _lg(1 + beta))))

        return ClosedLaw(tag, phi, M, None, None, tb)
    if tag == "lamperti_stable_sub":
        a = float(p["alpha"])
        phi = Pochhammer(a, a, 0.0, name="LampertiStableSub")
        M = sub_mellin(phi)

        def tb(beta):
            return ClosedLaw(f"lamperti_stable_sub_t{beta:g}", t_transform(phi, beta, beta),
                             lambda s: M(s + beta) / M(beta))

        return ClosedLaw(tag, phi, M, None, None, tb)
    if tag == "lamperti_stable_sn":
        a = float(p["alpha"])
        if not 1 < a < 2:
            raise DomainError("alpha must lie in (1,2)")
        psi = Pochhammer(a, a - 1.0, 0.0)
        pw, k = a - 1.0, 1.0 / (a - 1.0)

        def f(y):
            lz = -math.log(y / k) / pw
            if lz > 6.0:
                return 0.0
            z = math.exp(lz)
            return math.exp(-z + lz) / (pw * y)

        return ClosedLaw(tag, psi, sn_mellin(psi), DensityHandle(f, "closed-form", "lamperti-stable SN"),
                         exp_functional_factor(psi))
    if tag == "dufresne":
        s2, mu = float(p.get("sigma2", 1.0)), float(p["drift"])
        psi = Brownian(s2, mu, 0.0)
        c = 2 * mu / s2

        def f(y):
            lz = math.log(2.0 / s2) - math.log(y)
            if lz > 6.5:
                return 0.0
            return math.exp(c * lz - math.exp(lz) - sc.gammaln(c)) / y

        return ClosedLaw(tag, psi, sn_mellin(psi), DensityHandle(f, "closed-form", "dufresne"),
                         exp_functional_factor(psi))
    raise ValidationError(f"unknown closed law {tag!r}")
