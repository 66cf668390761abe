"""Positive self-similar Markov processes of index 1: entrance laws,
Beta intertwinings and the eigenfunction series I_psi.

J_psi denotes the law with P_t f(0) = E[f(t J_psi)] and integer moments
prod_{k<=n} psi(k)/n!. I_psi(z) = sum_n a_n z^n with 1/a_n = prod_{k<=n} psi(k).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from . import specfun
from .errors import DomainError, RegimeError, ValidationError
from .expfunctional import cramer_shift, ek_eigenvalue, sn_mellin, sn_neg_moments
from .exponents import Brownian, LaplaceExponent, Pochhammer, Stable, cramer_root, drift_at_zero
from .factors import BetaFactor, DistributionFactor, MellinFactor
from .transform import TDeltaBeta, t_beta, t_formal, t_transform

__all__ = [
    "EntranceLaw",
    "IntertwiningReport",
    "MellinProfile",
    "PowerSeries",
    "KernelCheck",
    "entrance_moments",
    "entrance_factorization",
    "intertwining_factor",
    "mellin_profile",
    "eigen_series",
    "ek_on_series",
    "kernel_check",
    "beta_moment",
]

_ZERO_TOL = 1e-10
_AMBIGUOUS = "delta in [theta, theta+1): admissible for the moment identity only"


def _r(v) -> float:
    return float(np.real(v))


def beta_moment(a: float, b: float, n: float) -> float:
    """E[B(a, b)^n]; b = 0 is the point mass at 1."""
    if b == 0:
        return 1.0
    return math.exp(sc.gammaln(a + n) + sc.gammaln(a + b) - sc.gammaln(a) - sc.gammaln(a + b + n))


# -------------------------------------------------------------- entrance law

@dataclass(frozen=True)
class EntranceLaw:
    label: str
    regime: str
    theta: float
    orders: tuple
    moments: tuple

    def __getitem__(self, n: int) -> float:
        if n == 0:
            return 1.0
        return self.moments[self.orders.index(n)]

    def to_json(self) -> dict:
        return {"psi": self.label, "regime": self.regime, "theta": self.theta,
                "moments": {str(n): m for n, m in zip(self.orders, self.moments)}}


def _regime(psi: LaplaceExponent) -> tuple[str, float]:
    if psi.is_subordinator:
        raise RegimeError("entrance laws need a spectrally negative exponent")
    k = psi.kappa
    d0 = drift_at_zero(psi)
    if d0 >= 0 and abs(k) <= _ZERO_TOL:
        return "drift>=0", 0.0
    if min(-k, d0) < 0:
        th = cramer_root(psi)
        if th < 1:
            return "recurrent-extension", th
        raise RegimeError(f"theta = {th:.12g} >= 1: no recurrent extension leaving 0 continuously")
    raise RegimeError("entrance law regime not identified")


def entrance_moments(psi: LaplaceExponent, N: int, check_regime: bool = True) -> EntranceLaw:
    """E[J^n] = prod_{k=1}^n psi(k) / n!, n = 1..N.

    ``check_regime=False`` evaluates the product formally (used for the
    partner exponent T_{-theta} psi_theta, which need not be an exponent).
    """
    if N < 1:
        raise ValidationError("N must be >= 1")
    if check_regime:
        regime, th = _regime(psi)
    else:
        regime, th = "formal", float("nan")
    vals, m = [], 1.0
    for k in range(1, N + 1):
        v = _r(psi.psi(float(k)))
        if check_regime and regime == "recurrent-extension" and not v > 0:
            raise RegimeError(f"psi({k}) = {v} <= 0")
        m *= v / k
        vals.append(m)
    return EntranceLaw(psi.describe(), regime, th, tuple(range(1, N + 1)), tuple(vals))


def _neg_moment_factor(chi: LaplaceExponent, name: str) -> MellinFactor:
    """I_chi^{-1} as a Mellin factor: integer moments from the recursion,
    other s from the closed law when one is known."""
    M = sn_mellin(chi)
    sn_neg_moments(chi, 1)

    def moment(s):
        s = complex(s)
        if s == 0:
            return 1 + 0j
        if s.imag == 0 and s.real > 0 and s.real.is_integer():
            n = int(s.real)
            return complex(sn_neg_moments(chi, n)[n])
        if M is not None:
            return complex(M(-s))
        raise DomainError(f"E[I^(-s)] at s={s} unavailable for {chi.describe()}")

    return MellinFactor(name, moment, 1.0, params={"psi": chi.describe()})


def entrance_factorization(psi: LaplaceExponent) -> DistributionFactor:
    """J_psi = B(1-theta, theta) / I_{T_{1-theta} psi_theta} in the recurrent regime."""
    regime, th = _regime(psi)
    if regime != "recurrent-extension":
        raise RegimeError("entrance_factorization needs min(psi(0), psi'(0+)) < 0 and theta < 1")
    _, pth = cramer_shift(psi)
    chi = t_beta(pth, 1.0 - th)
    inv = _neg_moment_factor(chi, f"I[{chi.describe()}]^-1")
    return DistributionFactor((BetaFactor(1.0 - th, th),)) * DistributionFactor((inv,))


# ------------------------------------------------------------- intertwining

@dataclass
class IntertwiningReport:
    case: int
    delta: float
    theta: float
    factor: DistributionFactor
    transformed: str
    partner: str
    orders: tuple
    lhs: tuple
    rhs: tuple
    max_rel_error: float
    flags: list = field(default_factory=list)
    mellin_min_modulus: float | None = None

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= 1e-10

    def to_json(self) -> dict:
        return {"case": self.case, "delta": self.delta, "theta": self.theta,
                "factor": self.factor.to_json(), "transformed": self.transformed,
                "partner": self.partner,
                "moments": [{"n": n, "lhs": a, "rhs": b}
                            for n, a, b in zip(self.orders, self.lhs, self.rhs)],
                "max_rel_error": self.max_rel_error, "flags": list(self.flags),
                "mellin_min_modulus": self.mellin_min_modulus}


def intertwining_factor(psi: LaplaceExponent, delta: float, case: int, N: int = 6,
                        mellin_check: bool = True) -> IntertwiningReport:
    """Beta factor of the entrance-law identity for each of the three cases:

    1. J_{T_{delta,theta} psi} = B(1+theta-delta, delta) J_{psi_theta}
    2. J_psi = B(1-theta, theta) J_{T_{-theta} psi_theta}
    3. J_{T_{delta,0} psi} = B(1-delta, delta) J_psi

    The moment identity E[left^n] = E[B^n] E[right^n] is evaluated for n=1..N.
    """
    flags: list[str] = []
    d0 = drift_at_zero(psi)
    if case == 1:
        th = cramer_root(psi)
        if not th > 0:
            raise RegimeError("case 1 needs psi'(0+) < 0 (or killing), i.e. theta > 0")
        if not 0 <= delta < th + 1:
            raise DomainError(f"case 1 needs 0 <= delta < theta + 1 = {th + 1:g}")
        if delta >= th:
            flags.append(_AMBIGUOUS)
        _, pth = cramer_shift(psi)
        left, right = t_transform(psi, delta, th), pth
        a, b = 1 + th - delta, delta
        left_law = entrance_moments(left, N)
        right_law = entrance_moments(right, N)
        base = pth
    elif case == 2:
        if not min(-psi.kappa, d0) < 0:
            raise RegimeError("case 2 needs min(psi(0), psi'(0+)) < 0")
        th = cramer_root(psi)
        if not th < 1:
            raise RegimeError(f"case 2 needs theta < 1 (theta = {th:g})")
        _, pth = cramer_shift(psi)
        left, right = psi, t_formal(pth, -th)
        a, b = 1 - th, th
        left_law = entrance_moments(left, N)
        right_law = entrance_moments(right, N, check_regime=False)
        flags.append("T_{-theta} evaluated formally as u psi(u)/(u-theta)")
        base = pth
    elif case == 3:
        th = 0.0
        if abs(d0) > 1e-8 or abs(psi.kappa) > _ZERO_TOL:
            raise RegimeError(f"case 3 needs psi(0) = psi'(0+) = 0 (psi'(0+) = {d0:g})")
        if not 0 <= delta < 1:
            raise DomainError("case 3 needs 0 <= delta < 1")
        left, right = t_transform(psi, delta, 0.0), psi
        a, b = 1 - delta, delta
        left_law = entrance_moments(left, N)
        right_law = entrance_moments(right, N)
        base = psi
    else:
        raise ValidationError("case must be 1, 2 or 3")
    lhs, rhs, err = [], [], 0.0
    for n in range(1, N + 1):
        lv = left_law[n]
        rv = beta_moment(a, b, n) * right_law[n]
        lhs.append(lv)
        rhs.append(rv)
        err = max(err, abs(lv - rv) / max(abs(rv), 1e-300))
    mm = None
    if mellin_check:
        try:
            prof = mellin_profile(base)
            mm = prof.min_modulus
            if not prof.nonvanishing:
                flags.append(f"Mellin transform nearly vanishes at s = {prof.flagged[:5]}")
        except DomainError:
            flags.append("Mellin nonvanishing not checked: no Mellin representation")
    fac = DistributionFactor((BetaFactor(a, b),))
    return IntertwiningReport(case, float(delta), th, fac, left.describe(), right.describe(),
                              tuple(range(1, N + 1)), tuple(lhs), tuple(rhs), err, flags, mm)


# ------------------------------------------------------------ Mellin profile

@dataclass
class MellinProfile:
    label: str
    s: np.ndarray
    values: np.ndarray
    threshold: float
    min_modulus: float
    flagged: list
    source: str

    @property
    def nonvanishing(self) -> bool:
        return not self.flagged

    def to_json(self) -> dict:
        return {"psi": self.label, "source": self.source, "threshold": self.threshold,
                "min_modulus": self.min_modulus, "nonvanishing": self.nonvanishing,
                "flagged": self.flagged, "points": len(self.s)}


def _lg(z: complex) -> complex:
    return specfun.loggamma(z)


def _log_mellin(psi: LaplaceExponent):
    """(log z -> log E[J^z], source) for closed families, else None."""
    if isinstance(psi, Brownian) and psi.kappa == 0 and psi.sigma2 > 0:
        c = 2 * psi.drift / psi.sigma2
        if 1 + c <= 0:
            return None
        k = math.log(psi.sigma2 / 2)
        return (lambda z: z * k + _lg(1 + c + z) - _lg(1 + c)), "closed:brownian"
    if isinstance(psi, Stable) and psi.kappa == 0 and psi.c == 0:
        a = psi.alpha
        return (lambda z: (a - 1) * _lg(1 + z)), "closed:stable"
    if (isinstance(psi, Pochhammer) and psi.convention == "psi"
            and abs(psi.scale - psi.alpha) < 1e-14 and psi.alpha + psi.shift > 0):
        a, c = psi.alpha, psi.shift
        return (lambda z: _lg(a * z + a + c) - _lg(a + c) - _lg(1 + z)), "closed:pochhammer"
    if isinstance(psi, TDeltaBeta) and not psi.is_identity:
        base = psi.base
        th = cramer_root(base) if not base.is_subordinator else 0.0
        if abs(psi.beta - th) > 1e-12:
            return None
        _, pth = cramer_shift(base)
        inner = _log_mellin(pth)
        if inner is None:
            return None
        f, src = inner
        a, b = 1 + th - psi.delta, psi.delta
        fb = BetaFactor(a, b)
        return (lambda z: fb.log_mellin(z) + f(z)), f"intertwining({src})"
    return None


def mellin_profile(psi: LaplaceExponent, s_grid=None, threshold: float = 1e-8) -> MellinProfile:
    """M(s) = E[J^{is}] on a grid, flagging possible zeros.

    Gamma ratios decay exponentially in |s|, so |M(s)| is compared with the
    geometric mean of its two grid neighbours; a zero shows up as a dip of
    the log-modulus far below that local trend.
    """
    if s_grid is None:
        s_grid = np.round(np.arange(-50.0, 50.0 + 1e-9, 0.05), 10)
    s = np.asarray(s_grid, dtype=float)
    lm = _log_mellin(psi)
    if lm is not None:
        f, src = lm
        logs = np.array([f(1j * x) for x in s])
    else:
        try:
            fac = entrance_factorization(psi)
            logs = np.array([fac.log_mellin(1j * x) for x in s])
        except (RegimeError, DomainError) as exc:
            raise DomainError(f"no Mellin representation for {psi.describe()}: {exc}") from None
        src = "factorization"
    vals = np.exp(logs)
    lmod = logs.real
    flagged = []
    for i in range(1, len(s) - 1):
        trend = 0.5 * (lmod[i - 1] + lmod[i + 1])
        if lmod[i] < trend + math.log(threshold):
            flagged.append(float(s[i]))
    if not np.all(np.isfinite(lmod)):
        flagged.extend(float(x) for x in s[~np.isfinite(lmod)])
    return MellinProfile(psi.describe(), s, vals, threshold, float(np.min(np.abs(vals))),
                         flagged, src)


# ------------------------------------------------------------- power series

@dataclass(frozen=True)
class PowerSeries:
    label: str
    coefficients: tuple

    @property
    def N(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: float) -> float:
        return self.evaluate(x).value

    def evaluate(self, x: float, rel_cutoff: float = 1e-16) -> specfun.SeriesValue:
        """Sum until |a_n x^n| < rel_cutoff |partial sum|; error = first omitted
        term (or the last used term when the coefficients run out)."""
        total, abs_total, last = 0.0, 0.0, 0.0
        xn = 1.0
        n_used = 0
        for n, a in enumerate(self.coefficients):
            t = a * xn
            total += t
            abs_total += abs(t)
            n_used = n + 1
            if n > 0 and abs(t) < rel_cutoff * abs(total):
                last = abs(t)
                break
            last = abs(t)
            xn *= x
        err = last + 4 * np.finfo(float).eps * abs_total
        cond = abs_total / abs(total) if total != 0 else math.inf
        return specfun.SeriesValue(total, err, n_used, cond)

    def to_json(self) -> dict:
        return {"label": self.label, "coefficients": list(self.coefficients)}


def eigen_series(psi: LaplaceExponent, N: int = 500) -> PowerSeries:
    """a_0 = 1, a_n = a_{n-1}/psi(n); stops early once a_n underflows to 0."""
    if N < 0:
        raise ValidationError("N must be >= 0")
    coef = [1.0]
    for k in range(1, N + 1):
        v = _r(psi.psi(float(k)))
        if v == 0:
            raise DomainError(f"psi({k}) = 0: a_n undefined for {psi.describe()}")
        a = coef[-1] / v
        coef.append(a)
        if a == 0:
            break
    return PowerSeries(f"I[{psi.describe()}]", tuple(coef))


def ek_on_series(p: PowerSeries, alpha: float, delta: float) -> PowerSeries:
    """D^{alpha,delta} applied termwise: coefficient n times E[B(alpha+1, delta)^n]."""
    if not alpha > -1 or delta < 0:
        raise DomainError("Erdelyi-Kober on series needs alpha > -1, delta >= 0")
    if delta == 0:
        return p
    coef = tuple(a * ek_eigenvalue(alpha, delta, n) for n, a in enumerate(p.coefficients))
    return PowerSeries(f"D[{alpha:g},{delta:g}]{p.label}", coef)


@dataclass
class KernelCheck:
    case: int
    mode: str
    alpha: float
    delta: float
    lhs: tuple
    rhs: tuple
    max_rel_error: float

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_rel_error <= tol

    def to_json(self) -> dict:
        return {"case": self.case, "mode": self.mode, "ek": [self.alpha, self.delta],
                "max_rel_error": self.max_rel_error, "n": len(self.lhs)}


def _compare(lhs: PowerSeries, rhs: PowerSeries, N: int) -> float:
    err = 0.0
    for a, b in zip(lhs.coefficients[:N + 1], rhs.coefficients[:N + 1]):
        if b == 0 and a == 0:
            continue
        err = max(err, abs(a - b) / max(abs(b), 1e-300))
    return err


def kernel_check(psi: LaplaceExponent, case: int, delta: float | None = None,
                    mode: str = "corrected", N: int = 30) -> KernelCheck:
    """Coefficientwise eigenfunction identities.

    mode="stated" uses the kernels as printed:
      1. D^{theta,delta} I_{psi_theta} = I_{T_{delta,theta} psi}
      2. D^{1,theta} I_{T_{-theta} psi_theta} = I_psi
      3. D^{1,delta} I_psi = I_{T_{delta,0} psi}
    mode="corrected" uses the kernels implied by the entrance-law identities:
      1. D^{theta-delta,delta} I_{T_{delta,theta} psi} = I_{psi_theta}
      2. D^{-theta,theta} I_psi = I_{T_{-theta} psi_theta}
      3. D^{-delta,delta} I_{T_{delta,0} psi} = I_psi
    """
    if mode not in ("stated", "corrected"):
        raise ValidationError("mode must be 'stated' or 'corrected'")
    if case == 1:
        th, pth = cramer_shift(psi)
        if not th > 0 or delta is None or not 0 <= delta < th + 1:
            raise DomainError("case 1 needs theta > 0 and 0 <= delta < theta + 1")
        I_t = eigen_series(t_transform(psi, delta, th), N)
        I_p = eigen_series(pth, N)
        if mode == "stated":
            al, de, src, dst = th, delta, I_p, I_t
        else:
            al, de, src, dst = th - delta, delta, I_t, I_p
    elif case == 2:
        th, pth = cramer_shift(psi)
        if not 0 < th < 1:
            raise DomainError("case 2 needs 0 < theta < 1")
        delta = th
        I_f = eigen_series(t_formal(pth, -th), N)
        I_s = eigen_series(psi, N)
        if mode == "stated":
            al, de, src, dst = 1.0, th, I_f, I_s
        else:
            al, de, src, dst = -th, th, I_s, I_f
    elif case == 3:
        if delta is None or not 0 <= delta < 1:
            raise DomainError("case 3 needs 0 <= delta < 1")
        I_t = eigen_series(t_transform(psi, delta, 0.0), N)
        I_s = eigen_series(psi, N)
        if mode == "stated":
            al, de, src, dst = 1.0, delta, I_s, I_t
        else:
            al, de, src, dst = -delta, delta, I_t, I_s
    else:
        raise ValidationError("case must be 1, 2 or 3")
    img = ek_on_series(src, al, de)
    n = min(N, img.N, dst.N)
    err = _compare(img, dst, n)
    return KernelCheck(case, mode, al, float(delta), img.coefficients[:n + 1],
                          dst.coefficients[:n + 1], err)
