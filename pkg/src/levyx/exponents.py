"""Laplace exponents of spectrally negative Levy processes and subordinators.

Two sign conventions are supported. A spectrally negative exponent ``psi``
satisfies E[exp(u X_1)] = exp(psi(u)); a subordinator exponent ``phi``
satisfies E[exp(-u S_1)] = exp(-phi(u)). A subordinator S is stored with its
own ``phi`` and reported in the spectrally negative convention as
psi = -phi, the exponent of -S.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate
from scipy import special as sc

from . import specfun
from .errors import DomainError, NumericalError, RegimeError, ValidationError

__all__ = [
    "JumpComponent",
    "StableJumps",
    "PochhammerJumps",
    "ExpJumps",
    "AtomJumps",
    "TableJumps",
    "TiltedJumps",
    "TiltedTailJumps",
    "JumpMeasure",
    "LevyTriple",
    "LaplaceExponent",
    "Brownian",
    "Stable",
    "Pochhammer",
    "PochhammerSN",
    "LampertiStableSN",
    "StableSub",
    "LampertiStableSub",
    "PoissonSub",
    "CPExpSub",
    "TripleExponent",
    "CallableExponent",
    "LadderExponent",
    "ValidationReport",
    "eval_lk_triple",
    "drift_at_zero",
    "cramer_root",
    "ladder",
    "validate",
    "from_spec",
    "to_spec",
]

_LK_TOL = 1e-10


def _quad(f, a, b, tol=_LK_TOL, **kw):
    val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=1e-12, limit=400, **kw)
    return val, err


def _log_quad(f, lo, hi, tol=_LK_TOL):
    """int_lo^hi f(r) dr for 0 < lo < hi <= inf via r = exp(t)."""
    if hi <= lo:
        return 0.0, 0.0
    g = lambda t: f(math.exp(t)) * math.exp(t)
    if math.isinf(hi):
        # split so the infinite piece starts where decay has set in
        mid = max(math.log(lo), 0.0) + 1.0
        v1, e1 = _quad(g, math.log(lo), mid, tol)
        v2, e2 = _quad(f, math.exp(mid), math.inf, tol)
        return v1 + v2, e1 + e2
    return _quad(g, math.log(lo), math.log(hi), tol)


# ----------------------------------------------------------------- jump measures
#
# Jumps of the spectrally negative process are x = -r with r > 0. Components
# are described by their density in r.

class JumpComponent:
    """One weighted piece of a Levy measure on (-inf, 0), written in r = -x."""

    decay: float = 0.0  # exponential decay rate of the density at infinity

    def density(self, r: float) -> float:
        raise NotImplementedError

    def atoms(self) -> list[tuple[float, float]]:
        return []

    def tail(self, r: float) -> float:
        """Pi(-inf, -r) for r > 0."""
        v, _ = _log_quad(self.density, r, math.inf)
        return v + sum(m for s, m in self.atoms() if s > r)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class StableJumps(JumpComponent):
    alpha: float
    weight: float
    tempering: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha < 2 or self.weight < 0 or self.tempering < 0:
            raise ValidationError("stable jumps need alpha in (0,2), weight, tempering >= 0")

    @property
    def decay(self):
        return self.tempering

    def density(self, r):
        return self.weight * np.exp(-self.tempering * r) * r ** (-1.0 - self.alpha)

    def tail(self, r):
        if self.tempering == 0:
            return self.weight * r ** (-self.alpha) / self.alpha
        return super().tail(r)

    def to_json(self):
        return {"type": "stable", "alpha": self.alpha, "weight": self.weight,
                "tempering": self.tempering}


@dataclass(frozen=True)
class PochhammerJumps(JumpComponent):
    """Density w e^{-g r/s}(1 - e^{-r/s})^{-a-1}/s with g = shift + alpha."""
    alpha: float
    scale: float
    shift: float
    weight: float

    @property
    def decay(self):
        return (self.shift + self.alpha) / self.scale

    def density(self, r):
        t = r / self.scale
        g = self.shift + self.alpha
        return self.weight * np.exp(-g * t) * (-np.expm1(-t)) ** (-self.alpha - 1.0) / self.scale

    def to_json(self):
        return {"type": "pochhammer", "alpha": self.alpha, "scale": self.scale,
                "shift": self.shift, "weight": self.weight}


@dataclass(frozen=True)
class ExpJumps(JumpComponent):
    weight: float
    rate: float

    @property
    def decay(self):
        return self.rate

    def density(self, r):
        return self.weight * np.exp(-self.rate * r)

    def tail(self, r):
        return self.weight / self.rate * math.exp(-self.rate * r)

    def to_json(self):
        return {"type": "exp", "weight": self.weight, "rate": self.rate}


@dataclass(frozen=True)
class AtomJumps(JumpComponent):
    size: float
    mass: float

    decay = math.inf

    def density(self, r):
        return 0.0 * r

    def atoms(self):
        return [(self.size, self.mass)]

    def tail(self, r):
        return self.mass if self.size > r else 0.0

    def to_json(self):
        return {"type": "atom", "size": self.size, "mass": self.mass}


@dataclass(frozen=True)
class TableJumps(JumpComponent):
    """Piecewise-linear density through (r_i, p_i), zero outside [r_0, r_last]."""
    r: tuple
    values: tuple

    decay = math.inf

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        p = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.size < 2 or r.size != p.size:
            raise ValidationError("density table needs matching r and values with >= 2 points")
        if not (r[0] > 0 and np.all(np.diff(r) > 0)):
            raise ValidationError("density table r must be positive and increasing")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValidationError("density table values must be finite and >= 0")
        object.__setattr__(self, "r", tuple(float(v) for v in r))
        object.__setattr__(self, "values", tuple(float(v) for v in p))

    def density(self, r):
        return np.interp(r, self.r, self.values, left=0.0, right=0.0)

    def tail(self, r):
        r_, p = np.asarray(self.r), np.asarray(self.values)
        if r >= r_[-1]:
            return 0.0
        lo = max(r, r_[0])
        xs = np.concatenate(([lo], r_[r_ > lo]))
        ys = np.interp(xs, r_, p)
        return float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))

    def to_json(self):
        return {"type": "table", "r": list(self.r), "values": list(self.values)}


@dataclass(frozen=True)
class TiltedJumps(JumpComponent):
    """e^{beta x} Pi(dx) for a base measure Pi."""
    beta: float
    base: "JumpMeasure"

    @property
    def decay(self):
        return self.base.decay + self.beta

    def density(self, r):
        return np.exp(-self.beta * r) * self.base.density(r)

    def atoms(self):
        return [(s, m * math.exp(-self.beta * s)) for s, m in self.base.atoms()]

    def to_json(self):
        return {"type": "tilt", "beta": self.beta, "jumps": self.base.to_json()}


@dataclass(frozen=True)
class TiltedTailJumps(JumpComponent):
    """delta e^{beta x} Pi-bar(-x) dx, Pi-bar the tail of a base measure."""
    delta: float
    beta: float
    base: "JumpMeasure"

    @property
    def decay(self):
        return self.base.decay + self.beta

    def density(self, r):
        if np.ndim(r):
            return np.array([self.density(float(v)) for v in np.ravel(r)]).reshape(np.shape(r))
        return self.delta * math.exp(-self.beta * r) * self.base.tail(r)

    def to_json(self):
        return {"type": "tilted_tail", "delta": self.delta, "beta": self.beta,
                "jumps": self.base.to_json()}


@dataclass(frozen=True)
class JumpMeasure:
    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def decay(self) -> float:
        if not self.components:
            return math.inf
        return min(c.decay for c in self.components)

    @property
    def is_zero(self) -> bool:
        return not self.components

    def density(self, r):
        out = 0.0 * np.asarray(r, dtype=float)
        for c in self.components:
            out = out + c.density(r)
        return out if np.ndim(r) else float(out)

    def atoms(self) -> list[tuple[float, float]]:
        out = []
        for c in self.components:
            out.extend(c.atoms())
        return out

    def tail(self, r: float) -> float:
        if r <= 0:
            raise DomainError("tail needs r > 0")
        return float(sum(c.tail(r) for c in self.components))

    def integral(self, f: Callable[[float], float], lo: float, hi: float,
                 tol: float = _LK_TOL) -> tuple[float, float]:
        """int_{lo < r < hi} f(r) Pi(dr) including atoms, lo >= 0."""
        val, err = 0.0, 0.0
        if self.components:
            g = lambda r: f(r) * self.density(r)
            if lo == 0.0:
                # r = s^4 tames the small-jump singularity
                top = min(hi, 1.0)
                h = lambda s: g(s ** 4) * 4.0 * s ** 3 if s > 0 else 0.0
                v, e = _quad(h, 0.0, top ** 0.25, tol)
                val += v
                err += e
                if hi > 1.0:
                    v, e = _log_quad(g, 1.0, hi, tol)
                    val += v
                    err += e
            else:
                v, e = _log_quad(g, lo, hi, tol)
                val += v
                err += e
        for s, m in self.atoms():
            if lo < s < hi or (lo == 0 and s == hi == math.inf):
                val += m * f(s)
        return val, err

    def mass_above(self, eta: float) -> float:
        return self.integral(lambda r: 1.0, eta, math.inf)[0]

    def to_json(self) -> list:
        return [c.to_json() for c in self.components]

    @staticmethod
    def from_json(items: Sequence[dict]) -> "JumpMeasure":
        comps = []
        for it in items:
            t = it.get("type")
            try:
                if t == "stable":
                    comps.append(StableJumps(float(it["alpha"]), float(it["weight"]),
                                             float(it.get("tempering", 0.0))))
                elif t == "pochhammer":
                    comps.append(PochhammerJumps(float(it["alpha"]), float(it["scale"]),
                                                 float(it["shift"]), float(it["weight"])))
                elif t == "exp":
                    comps.append(ExpJumps(float(it["weight"]), float(it["rate"])))
                elif t == "table":
                    comps.append(TableJumps(tuple(it["r"]), tuple(it["values"])))
                elif t == "atom":
                    comps.append(AtomJumps(float(it["size"]), float(it["mass"])))
                elif t == "tilt":
                    comps.append(TiltedJumps(float(it["beta"]), JumpMeasure.from_json(it["jumps"])))
                elif t == "tilted_tail":
                    comps.append(TiltedTailJumps(float(it["delta"]), float(it["beta"]),
                                                 JumpMeasure.from_json(it["jumps"])))
                else:
                    raise ValidationError(f"unknown jump component type {t!r}")
            except KeyError as exc:
                raise ValidationError(f"jump component {t!r} missing field {exc}") from None
        return JumpMeasure(tuple(comps))


def _small_jump_term(u, r):
    z = u * r
    if abs(z) < 1e-4:
        return z * z / 2.0 - z ** 3 / 6.0 + z ** 4 / 24.0
    return math.expm1(-z) + z


@dataclass(frozen=True)
class LevyTriple:
    """(kappa, a, sigma2, Pi) in psi(u) = -kappa + a u + sigma2 u^2/2
    + int (e^{ux} - 1 - ux 1{|x|<1}) Pi(dx)."""
    kappa: float
    a: float
    sigma2: float
    jumps: JumpMeasure = field(default_factory=JumpMeasure)

    def __post_init__(self):
        if self.kappa < 0:
            raise ValidationError("killing rate must be >= 0")
        if self.sigma2 < 0:
            raise ValidationError("gaussian coefficient must be >= 0")
        if not isinstance(self.jumps, JumpMeasure):
            object.__setattr__(self, "jumps", JumpMeasure(tuple(self.jumps)))

    def check_integrability(self, tol: float = 1e-8) -> float:
        """int (1 ^ r^2) Pi(dr); raises if not finite."""
        try:
            v1, _ = self.jumps.integral(lambda r: r * r, 0.0, 1.0, tol)
            v2, _ = self.jumps.integral(lambda r: 1.0, 1.0, math.inf, tol)
        except (integrate.IntegrationWarning, OverflowError) as exc:
            raise ValidationError(f"jump measure not integrable: {exc}") from None
        v = v1 + v2
        if not np.isfinite(v):
            raise ValidationError("jump measure violates int (1 ^ x^2) Pi(dx) < inf")
        return v

    def to_json(self) -> dict:
        return {"kappa": self.kappa, "a": self.a, "sigma2": self.sigma2,
                "jumps": self.jumps.to_json()}

    @staticmethod
    def from_json(d: dict) -> "LevyTriple":
        try:
            return LevyTriple(float(d.get("kappa", 0.0)), float(d.get("a", 0.0)),
                              float(d.get("sigma2", 0.0)),
                              JumpMeasure.from_json(d.get("jumps", [])))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"malformed triple: {exc}") from None


def eval_lk_triple(t: LevyTriple, u, tol: float = _LK_TOL) -> float:
    """psi(u) from the triple by quadrature; real u >= -(decay of Pi)."""
    if np.ndim(u):
        return np.array([eval_lk_triple(t, float(v), tol) for v in np.ravel(u)]).reshape(np.shape(u))
    u = float(u)
    if u < 0 and -u >= t.jumps.decay:
        raise DomainError(f"u={u} outside the exponential moments of the jump measure")
    val = -t.kappa + t.a * u + 0.5 * t.sigma2 * u * u
    if t.jumps.is_zero:
        return val
    v1, e1 = t.jumps.integral(lambda r: _small_jump_term(u, r), 0.0, 1.0, tol / 2)
    v2, e2 = t.jumps.integral(lambda r: math.expm1(-u * r), 1.0, math.inf, tol / 2)
    # atoms at exactly r = 1 fall outside |x| < 1
    for s, m in t.jumps.atoms():
        if s == 1.0:
            v2 += m * math.expm1(-u)
    if e1 + e2 > 10 * tol:
        raise NumericalError(f"LK quadrature error {e1 + e2:.3g} above tolerance")
    return val + v1 + v2


def _eval_lk_complex(t: LevyTriple, u: complex, tol: float = 1e-10) -> complex:
    val = -t.kappa + t.a * u + 0.5 * t.sigma2 * u * u
    if t.jumps.is_zero:
        return val

    def small(r):
        z = u * r
        if abs(z) < 1e-4:
            return z * z / 2.0 - z ** 3 / 6.0
        return np.expm1(-z) + z

    out = complex(val)
    for part in (np.real, np.imag):
        v1, _ = t.jumps.integral(lambda r: float(part(small(r))), 0.0, 1.0, tol)
        v2, _ = t.jumps.integral(lambda r: float(part(np.expm1(-u * r))), 1.0, math.inf, tol)
        for s, m in t.jumps.atoms():
            if s == 1.0:
                v2 += m * float(part(np.expm1(-u)))
        out += (v1 + v2) * (1.0 if part is np.real else 1j)
    return out


def _linear_coefficient(dpsi0: float, jumps: JumpMeasure) -> float:
    """a such that the triple has right-derivative dpsi0 at 0."""
    if jumps.is_zero:
        return dpsi0
    v, _ = jumps.integral(lambda r: r, 1.0, math.inf)
    for s, m in jumps.atoms():
        if s == 1.0:
            v += m
    return dpsi0 + v


# ------------------------------------------------------------------- exponents

class LaplaceExponent:
    """Base class. Subclasses implement ``_value`` in their own convention."""

    convention: str = "psi"
    floor: float = 0.0
    unbounded_variation: bool | None = None
    family: str = "custom"

    # -- evaluation
    def _value(self, u):
        raise NotImplementedError

    def _check_domain(self, u):
        if np.iscomplexobj(u) or isinstance(u, complex):
            return
        ua = np.asarray(u, dtype=float)
        if self.floor == 0.0:
            bad = ua < 0
        else:
            bad = ua <= self.floor
        if np.any(bad) or np.any(np.isnan(ua)):
            raise DomainError(f"argument outside ({self.floor}, inf) for {self.describe()}")

    def __call__(self, u):
        self._check_domain(u)
        return self._value(u)

    def psi(self, u):
        v = self(u)
        return v if self.convention == "psi" else -v

    @property
    def is_subordinator(self) -> bool:
        return self.convention == "phi"

    @property
    def kappa(self) -> float:
        v = float(np.real(self._value(0.0)))
        return 0.0 - v if self.convention == "psi" else v + 0.0

    # -- derivatives
    def _derivative(self, u):
        return None

    def derivative(self, u, h: float = 1e-6):
        """Derivative in the exponent's own convention."""
        d = self._derivative(u)
        if d is not None:
            return d
        return _fd_derivative(self, float(u), h)

    # -- Levy-Khintchine data
    def triple(self) -> LevyTriple:
        raise NotImplementedError(f"no Levy triple available for {self.describe()}")

    def has_triple(self) -> bool:
        try:
            self.triple()
        except NotImplementedError:
            return False
        return True

    def spec(self) -> dict:
        raise NotImplementedError(f"{self.describe()} has no JSON form")

    def describe(self) -> str:
        return self.family


def _fd_derivative(f: LaplaceExponent, u: float, h: float) -> float:
    """Central difference with one Richardson level; one-sided near the floor."""
    lo = f.floor
    if (lo == 0.0 and u - 2 * h < 0) or (lo != 0.0 and u - 2 * h <= lo):
        d1 = (-3 * f(u) + 4 * f(u + h) - f(u + 2 * h)) / (2 * h)
        h2 = h / 2
        d2 = (-3 * f(u) + 4 * f(u + h2) - f(u + 2 * h2)) / (2 * h2)
        return float((4 * d2 - d1) / 3)
    d1 = (f(u + h) - f(u - h)) / (2 * h)
    d2 = (f(u + h / 2) - f(u - h / 2)) / h
    return float((4 * d2 - d1) / 3)


class Brownian(LaplaceExponent):
    family = "Brownian"

    def __init__(self, sigma2: float = 1.0, drift: float = 0.0, kappa: float = 0.0):
        if sigma2 < 0 or kappa < 0:
            raise ValidationError("Brownian needs sigma2 >= 0 and kappa >= 0")
        if sigma2 == 0 and drift <= 0 and kappa == 0:
            raise ValidationError("pure drift exponent must have positive drift")
        self.sigma2, self.drift, self._kappa = float(sigma2), float(drift), float(kappa)
        self.floor = -math.inf
        self.unbounded_variation = sigma2 > 0

    def _value(self, u):
        return -self._kappa + self.drift * u + 0.5 * self.sigma2 * u * u

    def _derivative(self, u):
        return self.drift + self.sigma2 * u

    @property
    def kappa(self):
        return self._kappa

    def triple(self):
        return LevyTriple(self._kappa, self.drift, self.sigma2, JumpMeasure())

    def spec(self):
        return {"family": "Brownian", "params": {"sigma2": self.sigma2, "drift": self.drift,
                                                 "kappa": self._kappa}}

    def describe(self):
        return f"Brownian(sigma2={self.sigma2:g}, drift={self.drift:g}, kappa={self._kappa:g})"


class Stable(LaplaceExponent):
    """psi(u) = (u+c)^alpha - c^alpha - kappa, alpha in (1,2)."""
    family = "Stable"
    unbounded_variation = True

    def __init__(self, alpha: float, kappa: float = 0.0, c: float = 0.0):
        if not 1 < alpha < 2:
            raise ValidationError("Stable needs alpha in (1,2)")
        if kappa < 0 or c < 0:
            raise ValidationError("Stable needs kappa >= 0 and c >= 0")
        self.alpha, self._kappa, self.c = float(alpha), float(kappa), float(c)
        self.floor = -self.c

    def _value(self, u):
        if np.iscomplexobj(u) or isinstance(u, complex):
            return np.power(np.asarray(u) + self.c, self.alpha) - self.c ** self.alpha - self._kappa
        if np.ndim(u):
            return np.power(np.asarray(u, dtype=float) + self.c, self.alpha) - self.c ** self.alpha - self._kappa
        return (float(u) + self.c) ** self.alpha - self.c ** self.alpha - self._kappa

    def _derivative(self, u):
        z = u + self.c
        if z == 0:
            return 0.0
        return self.alpha * z ** (self.alpha - 1.0)

    @property
    def kappa(self):
        return self._kappa

    def triple(self):
        a, c = self.alpha, self.c
        w = 1.0 / float(sc.gamma(-a))
        if c == 0:
            lin = w / (a - 1.0)
        else:
            # Gamma(1-a, c) through the recurrence from Gamma(2-a, c)
            g1 = (float(sc.gammaincc(2 - a, c) * sc.gamma(2 - a)) - c ** (1 - a) * math.exp(-c)) / (1 - a)
            lin = a * c ** (a - 1) + w * c ** (a - 1) * g1
        return LevyTriple(self._kappa, lin, 0.0, JumpMeasure((StableJumps(a, w, c),)))

    def spec(self):
        return {"family": "Stable", "params": {"alpha": self.alpha, "kappa": self._kappa, "c": self.c}}

    def describe(self):
        return f"Stable(alpha={self.alpha:g}, kappa={self._kappa:g}, c={self.c:g})"


class Pochhammer(LaplaceExponent):
    """Value (s u + c)_alpha = Gamma(s u + c + alpha)/Gamma(s u + c).

    alpha in (1,2) gives a spectrally negative exponent, alpha in (0,1) a
    subordinator exponent.
    """
    family = "Pochhammer"

    def __init__(self, alpha: float, scale: float = 1.0, shift: float = 0.0,
                 name: str | None = None):
        if not (0 < alpha < 1 or 1 < alpha < 2):
            raise ValidationError("Pochhammer exponent needs alpha in (0,1) or (1,2)")
        if not scale > 0:
            raise ValidationError("scale must be positive")
        self.alpha, self.scale, self.shift = float(alpha), float(scale), float(shift)
        self.convention = "psi" if alpha > 1 else "phi"
        self.unbounded_variation = alpha > 1
        self.floor = -(self.shift + self.alpha) / self.scale
        if self.floor > 0:
            raise ValidationError("Pochhammer exponent not defined at 0 (shift + alpha < 0)")
        if name:
            self.family = name
        if self.convention == "phi" and self.shift < 0:
            raise ValidationError("subordinator Pochhammer exponent needs shift >= 0")

    def _value(self, u):
        z = self.scale * (np.asarray(u) if np.ndim(u) else u) + self.shift
        return specfun.pochhammer(z, self.alpha)

    def _derivative(self, u):
        z = self.scale * float(u) + self.shift
        if z <= 0 and float(z).is_integer():
            k = int(-z)
            return self.scale * float(sc.gamma(z + self.alpha)) * (-1) ** k * math.factorial(k)
        p = float(sc.poch(z, self.alpha))
        return self.scale * p * float(sc.digamma(z + self.alpha) - sc.digamma(z))

    def triple(self):
        a, s, c = self.alpha, self.scale, self.shift
        w = 1.0 / abs(float(sc.gamma(-a)))
        jumps = JumpMeasure((PochhammerJumps(a, s, c, w),))
        kappa = self.kappa
        if self.convention == "psi":
            lin = _linear_coefficient(self.derivative(0.0), jumps)
        else:
            lin = -jumps.integral(lambda r: r, 0.0, 1.0)[0]
        return LevyTriple(max(kappa, 0.0), lin, 0.0, jumps)

    def spec(self):
        if self.family == "PochhammerSN":
            return {"family": "PochhammerSN", "params": {"alpha": self.alpha}}
        if self.family == "LampertiStableSN":
            return {"family": "LampertiStableSN", "params": {"alpha": self.alpha}}
        if self.family == "LampertiStableSub":
            return {"family": "LampertiStableSub", "params": {"alpha": self.alpha}}
        return {"family": "Pochhammer", "params": {"alpha": self.alpha, "scale": self.scale,
                                                   "shift": self.shift}}

    def describe(self):
        return f"{self.family}(alpha={self.alpha:g}, scale={self.scale:g}, shift={self.shift:g})"


def PochhammerSN(alpha: float) -> Pochhammer:
    """psi(u) = (u-1)_alpha."""
    if not 1 < alpha < 2:
        raise ValidationError("PochhammerSN needs alpha in (1,2)")
    return Pochhammer(alpha, 1.0, -1.0, name="PochhammerSN")


def LampertiStableSN(alpha: float) -> Pochhammer:
    """psi(u) = ((alpha-1)(u-1))_alpha, killed at rate -1/Gamma(1-alpha)."""
    if not 1 < alpha < 2:
        raise ValidationError("LampertiStableSN needs alpha in (1,2)")
    return Pochhammer(alpha, alpha - 1.0, -(alpha - 1.0), name="LampertiStableSN")


def LampertiStableSub(alpha: float) -> Pochhammer:
    """phi(u) = (alpha u)_alpha."""
    if not 0 < alpha < 1:
        raise ValidationError("LampertiStableSub needs alpha in (0,1)")
    return Pochhammer(alpha, alpha, 0.0, name="LampertiStableSub")


class StableSub(LaplaceExponent):
    """phi(u) = u^alpha, alpha in (0,1)."""
    family = "StableSub"
    convention = "phi"
    unbounded_variation = False

    def __init__(self, alpha: float):
        if not 0 < alpha < 1:
            raise ValidationError("StableSub needs alpha in (0,1)")
        self.alpha = float(alpha)
        self.floor = 0.0

    def _value(self, u):
        if np.iscomplexobj(u) or isinstance(u, complex):
            return np.power(np.asarray(u, dtype=complex), self.alpha)
        if np.ndim(u):
            return np.power(np.asarray(u, dtype=float), self.alpha)
        return float(u) ** self.alpha

    def _derivative(self, u):
        return math.inf if u == 0 else self.alpha * u ** (self.alpha - 1)

    @property
    def kappa(self):
        return 0.0

    def triple(self):
        a = self.alpha
        w = a / float(sc.gamma(1 - a))
        return LevyTriple(0.0, -a / float(sc.gamma(2 - a)), 0.0, JumpMeasure((StableJumps(a, w, 0.0),)))

    def spec(self):
        return {"family": "StableSub", "params": {"alpha": self.alpha}}

    def describe(self):
        return f"StableSub(alpha={self.alpha:g})"


class PoissonSub(LaplaceExponent):
    """phi(u) = rate (1 - e^{-jump u}): Poisson process with fixed jumps.

    ``PoissonSub.from_q(q)`` gives phi(u) = -log(q)(1 - e^{-u}) (unit jumps);
    ``PoissonSub.unit_rate(q)`` gives phi(u) = 1 - q^u (jumps of size -log q).
    """
    family = "PoissonSub"
    convention = "phi"
    unbounded_variation = False

    def __init__(self, rate: float, jump: float, form: str = "rate_jump"):
        if not rate > 0 or not jump > 0:
            raise ValidationError("PoissonSub needs positive rate and jump")
        self.rate, self.jump, self.form = float(rate), float(jump), form
        self.floor = -math.inf

    @classmethod
    def from_q(cls, q: float) -> "PoissonSub":
        if not 0 < q < 1:
            raise ValidationError("q must lie in (0,1)")
        return cls(-math.log(q), 1.0, form="q")

    @classmethod
    def unit_rate(cls, q: float) -> "PoissonSub":
        if not 0 < q < 1:
            raise ValidationError("q must lie in (0,1)")
        return cls(1.0, -math.log(q), form="unit_rate")

    @property
    def q(self) -> float:
        return math.exp(-self.jump)

    def _value(self, u):
        return -self.rate * np.expm1(-self.jump * (np.asarray(u) if np.ndim(u) else u))

    def _derivative(self, u):
        return self.rate * self.jump * math.exp(-self.jump * u)

    @property
    def kappa(self):
        return 0.0

    def triple(self):
        lin = -self.rate * self.jump if self.jump < 1 else 0.0
        return LevyTriple(0.0, lin, 0.0, JumpMeasure((AtomJumps(self.jump, self.rate),)))

    def spec(self):
        if self.form == "q":
            return {"family": "PoissonSub", "params": {"q": math.exp(-self.rate)}}
        if self.form == "unit_rate":
            return {"family": "PoissonSub", "params": {"q": self.q, "form": "unit_rate"}}
        return {"family": "PoissonSub", "params": {"rate": self.rate, "jump": self.jump}}

    def describe(self):
        return f"PoissonSub(rate={self.rate:g}, jump={self.jump:g})"


class CPExpSub(LaplaceExponent):
    """phi(u) = c u/(u+b) + kappa: exponential jumps at rate c, killed at kappa."""
    family = "CPExpSub"
    convention = "phi"
    unbounded_variation = False

    def __init__(self, c: float, b: float, kappa: float = 0.0):
        if not c > 0 or not b > 0 or kappa < 0:
            raise ValidationError("CPExpSub needs c > 0, b > 0, kappa >= 0")
        self.c, self.b, self._kappa = float(c), float(b), float(kappa)
        self.floor = -self.b

    def _value(self, u):
        u = np.asarray(u) if np.ndim(u) else u
        return self.c * u / (u + self.b) + self._kappa

    def _derivative(self, u):
        return self.c * self.b / (u + self.b) ** 2

    @property
    def kappa(self):
        return self._kappa

    def triple(self):
        c, b = self.c, self.b
        lin = -c * (1.0 - math.exp(-b) * (1.0 + b)) / b
        return LevyTriple(self._kappa, lin, 0.0, JumpMeasure((ExpJumps(c * b, b),)))

    def spec(self):
        return {"family": "CPExpSub", "params": {"c": self.c, "b": self.b, "kappa": self._kappa}}

    def describe(self):
        return f"CPExpSub(c={self.c:g}, b={self.b:g}, kappa={self._kappa:g})"


class TripleExponent(LaplaceExponent):
    """Exponent given by a Levy triple, evaluated by quadrature.

    ``convention='phi'`` reads the triple as that of -S for a subordinator S
    and reports phi = -psi.
    """
    family = "Triple"

    def __init__(self, triple: LevyTriple, convention: str = "psi", floor: float = 0.0,
                 tol: float = _LK_TOL, derivative0: float | None = None):
        if convention not in ("psi", "phi"):
            raise ValidationError("convention must be 'psi' or 'phi'")
        self._triple = triple
        self.convention = convention
        self.floor = float(floor)
        self.tol = tol
        self._d0 = derivative0
        self.unbounded_variation = triple.sigma2 > 0 or None

    def _value(self, u):
        sgn = 1.0 if self.convention == "psi" else -1.0
        if np.iscomplexobj(u) or isinstance(u, complex):
            if np.ndim(u):
                return np.array([sgn * _eval_lk_complex(self._triple, complex(v))
                                 for v in np.ravel(u)]).reshape(np.shape(u))
            return sgn * _eval_lk_complex(self._triple, complex(u))
        return sgn * eval_lk_triple(self._triple, u, self.tol)

    def _derivative(self, u):
        if u == 0 and self._d0 is not None:
            return self._d0
        return None

    @property
    def kappa(self):
        return self._triple.kappa

    def triple(self):
        return self._triple

    def spec(self):
        d = {"triple": self._triple.to_json()}
        if self.convention != "psi":
            d["convention"] = self.convention
        return d

    def describe(self):
        return "Triple"


class CallableExponent(LaplaceExponent):
    """Wrap an arbitrary function, e.g. for validation experiments."""
    family = "Callable"

    def __init__(self, func: Callable, convention: str = "psi", floor: float = 0.0,
                 derivative: Callable | None = None, name: str = "callable"):
        self.func, self.convention, self.floor = func, convention, float(floor)
        self._dfun = derivative
        self.family = name

    def _value(self, u):
        return self.func(u)

    def _derivative(self, u):
        return None if self._dfun is None else self._dfun(u)


# ---------------------------------------------------------------- operations

def drift_at_zero(psi: LaplaceExponent, h: float = 1e-6) -> float:
    """Right derivative at 0 in the exponent's own convention (E[xi_1] for a
    spectrally negative exponent with no killing)."""
    return float(psi.derivative(0.0, h))


def cramer_root(psi: LaplaceExponent, tol: float = 1e-12) -> float:
    """theta = sup{u >= 0 : psi(u) = 0} for a spectrally negative exponent."""
    if psi.is_subordinator:
        raise RegimeError("cramer_root needs a spectrally negative exponent")
    f0 = float(psi.psi(0.0))
    if abs(f0) <= tol and drift_at_zero(psi) >= 0:
        return 0.0
    hi = 1.0
    while float(psi.psi(hi)) <= 0:
        hi *= 2.0
        if hi > 2.0 ** 60:
            raise NumericalError("no bracket for the Cramer root")
    lo = 0.0
    if f0 > 0:
        raise RegimeError("psi(0) > 0: not a valid exponent")
    # the largest zero lies where psi changes sign for the last time; by
    # convexity psi < 0 on (lo, theta) once psi(lo) <= 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if float(psi.psi(mid)) <= 0:
            lo = mid
        else:
            hi = mid
        if mid in (lo, hi) and hi - lo <= 4 * np.spacing(hi):
            break
    th = 0.5 * (lo + hi)
    # Newton polish; psi'(theta) > 0 at the largest root
    f = float(psi.psi(th))
    for _ in range(3):
        if f == 0:
            break
        d = float(psi.derivative(th))
        if psi.is_subordinator:
            d = -d
        if not d > 0:
            break
        nxt = th - f / d
        if abs(nxt - th) > 2 * tol:
            break
        fn = float(psi.psi(nxt))
        if abs(fn) >= abs(f):
            break
        th, f = nxt, fn
    return th


class LadderExponent(LaplaceExponent):
    """Phi(u) = psi(u)/u with Phi(0) = psi'(0+)."""
    convention = "phi"
    family = "Ladder"

    def __init__(self, base: LaplaceExponent):
        self.base = base
        self.floor = 0.0
        self._d0 = drift_at_zero(base)

    def _value(self, u):
        if np.ndim(u):
            ua = np.asarray(u)
            with np.errstate(invalid="ignore", divide="ignore"):
                out = self.base.psi(ua) / ua
            return np.where(ua == 0, self._d0, out)
        if u == 0:
            return self._d0
        return self.base.psi(u) / u

    @property
    def kappa(self):
        return 0.0

    def describe(self):
        return f"Ladder({self.base.describe()})"


def ladder(psi: LaplaceExponent, tol: float = 1e-12) -> LadderExponent:
    if psi.is_subordinator:
        raise RegimeError("ladder needs a spectrally negative exponent")
    if abs(float(psi.psi(0.0))) > tol:
        raise RegimeError("ladder needs psi(0) = 0")
    return LadderExponent(psi)


@dataclass
class ValidationReport:
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self):
        return {"passed": self.passed, "checks": dict(self.checks)}


def validate(psi: LaplaceExponent, grid: Sequence[float], tol: float = 1e-12) -> ValidationReport:
    g = np.sort(np.asarray(grid, dtype=float))
    vals = np.array([float(np.real(psi(x))) for x in g])
    rep = ValidationReport()
    scale = max(1.0, float(np.max(np.abs(vals))))
    if psi.is_subordinator:
        rep.checks["nondecreasing"] = bool(np.all(np.diff(vals) >= -tol * scale))
        rep.checks["concave"] = _second_differences_ok(g, -vals, tol * scale)
    else:
        rep.checks["convex"] = _second_differences_ok(g, vals, tol * scale)
    if g.size and g[0] == 0.0:
        target = psi.kappa if psi.is_subordinator else -psi.kappa
        rep.checks["value_at_zero"] = bool(abs(vals[0] - target) <= tol * scale)
    return rep


def _second_differences_ok(g, v, tol) -> bool:
    for i in range(1, len(g) - 1):
        x1, x2, x3 = g[i - 1], g[i], g[i + 1]
        lin = v[i - 1] + (v[i + 1] - v[i - 1]) * (x2 - x1) / (x3 - x1)
        if v[i] > lin + tol:
            return False
    return True


# -------------------------------------------------------------------- JSON

_FAMILIES: dict[str, Callable[..., LaplaceExponent]] = {
    "Brownian": lambda p: Brownian(p.get("sigma2", 1.0), p.get("drift", 0.0), p.get("kappa", 0.0)),
    "Stable": lambda p: Stable(p["alpha"], p.get("kappa", 0.0), p.get("c", 0.0)),
    "PochhammerSN": lambda p: PochhammerSN(p["alpha"]),
    "LampertiStableSN": lambda p: LampertiStableSN(p["alpha"]),
    "Pochhammer": lambda p: Pochhammer(p["alpha"], p.get("scale", 1.0), p.get("shift", 0.0)),
    "StableSub": lambda p: StableSub(p["alpha"]),
    "LampertiStableSub": lambda p: LampertiStableSub(p["alpha"]),
    "PoissonSub": lambda p: (PoissonSub.unit_rate(p["q"]) if p.get("form") == "unit_rate"
                             else PoissonSub.from_q(p["q"]) if "q" in p
                             else PoissonSub(p["rate"], p["jump"])),
    "CPExpSub": lambda p: CPExpSub(p["c"], p["b"], p.get("kappa", 0.0)),
}

_FAMILY_ALIASES = {k.lower(): k for k in _FAMILIES}


def from_spec(d: Any) -> LaplaceExponent:
    """Build an exponent from ``{"family":..,"params":..}`` or ``{"triple":..}``."""
    if not isinstance(d, dict):
        raise ValidationError("exponent spec must be a JSON object")
    if "family" in d:
        fam = _FAMILY_ALIASES.get(str(d["family"]).lower(), d["family"])
        if fam not in _FAMILIES:
            raise ValidationError(f"unknown family {fam!r}; known: {sorted(_FAMILIES)}")
        params = d.get("params", {})
        if not isinstance(params, dict):
            raise ValidationError("params must be an object")
        try:
            return _FAMILIES[fam](params)
        except KeyError as exc:
            raise ValidationError(f"family {fam} missing parameter {exc}") from None
        except TypeError as exc:
            raise ValidationError(f"bad parameters for {fam}: {exc}") from None
    if "transform" in d:
        from .transform import t_composed, t_transform
        tp = d["transform"]
        if not isinstance(tp, dict) or "base" not in d:
            raise ValidationError("transform spec needs 'transform' parameters and a 'base'")
        base = from_spec(d["base"])
        try:
            delta, beta = float(tp["delta"]), float(tp["beta"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError("transform needs numeric delta and beta") from None
        gamma = float(tp.get("gamma", 0.0))
        return t_composed(base, gamma, delta, beta) if gamma > 0 else t_transform(base, delta, beta)
    if "triple" in d:
        t = LevyTriple.from_json(d["triple"])
        t.check_integrability()
        return TripleExponent(t, d.get("convention", "psi"), float(d.get("floor", 0.0)))
    raise ValidationError("spec needs a 'family' or a 'triple' key")


def to_spec(psi: LaplaceExponent) -> dict:
    return psi.spec()
