"""The transforms E_beta, T_{delta,beta}, T_beta and their compositions.

All transforms are linear in the exponent, so they act on a subordinator
exponent phi exactly as on psi = -phi; results keep the convention of the
base exponent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .exponents import (
    ExpJumps,
    JumpMeasure,
    LaplaceExponent,
    LevyTriple,
    TiltedJumps,
    TiltedTailJumps,
    drift_at_zero,
    eval_lk_triple,
)

__all__ = [
    "TransformParams",
    "TDeltaBeta",
    "TComposed",
    "FormalT",
    "esscher",
    "t_transform",
    "t_beta",
    "t_composed",
    "t_formal",
    "transformed_triple",
    "semigroup_check",
]

_CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class TransformParams:
    delta: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("delta", "beta", "gamma"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be finite and >= 0, got {v}")


def _asarg(u):
    return np.asarray(u) if np.ndim(u) else u


class TDeltaBeta(LaplaceExponent):
    """u -> (u+b-d)/(u+b) f(u+b) - (b-d)/b f(b); for b = 0, f(u) - d f(u)/u."""

    def __init__(self, base: LaplaceExponent, delta: float, beta: float):
        TransformParams(delta, beta)
        self.base, self.delta, self.beta = base, float(delta), float(beta)
        self.convention = base.convention
        self.unbounded_variation = base.unbounded_variation
        self.floor = base.floor - self.beta
        if self.beta > 0:
            self._fb = base(self.beta)
        elif self.delta > 0:
            f0 = float(np.real(base(0.0)))
            d0 = drift_at_zero(base)
            if abs(f0) > _CONSTRAINT_TOL or abs(d0) > _CONSTRAINT_TOL:
                raise ValidationError(
                    "T_{delta,0} needs an exponent with value and derivative 0 at 0")
        self.family = f"T[{self.delta:g},{self.beta:g}]"

    @property
    def is_identity(self) -> bool:
        return self.beta == 0 and self.delta == 0

    def _value(self, u):
        u = _asarg(u)
        f = self.base._value
        b, d = self.beta, self.delta
        if b > 0:
            return (u + b - d) / (u + b) * f(u + b) - (b - d) / b * self._fb
        if d == 0:
            return f(u)
        if np.ndim(u):
            with np.errstate(invalid="ignore", divide="ignore"):
                out = f(u) - d * f(u) / u
            return np.where(u == 0, 0.0, out)
        if u == 0:
            return 0.0
        return f(u) - d * f(u) / u

    def _derivative(self, u):
        b, d = self.beta, self.delta
        if b > 0:
            fd = self.base._derivative(u + b)
            if fd is None:
                return None
            z = u + b
            return d / (z * z) * self.base._value(z) + (z - d) / z * fd
        if d == 0:
            return self.base._derivative(u)
        if u == 0:
            return None
        fd = self.base._derivative(u)
        if fd is None:
            return None
        fu = self.base._value(u)
        return fd - d * (fd * u - fu) / (u * u)

    @property
    def kappa(self):
        return self.base.kappa if self.is_identity else 0.0

    def triple(self):
        return transformed_triple(self.base.triple(), self.delta, self.beta)

    def spec(self):
        return {"transform": {"delta": self.delta, "beta": self.beta},
                "base": self.base.spec()}

    def describe(self):
        if self.delta == 0:
            return f"E_{self.beta:g}({self.base.describe()})"
        if self.delta == self.beta:
            return f"T_{self.beta:g}({self.base.describe()})"
        return f"T_{{{self.delta:g},{self.beta:g}}}({self.base.describe()})"


class TComposed(LaplaceExponent):
    """u/(u+g) [(u+g+b-d)/(u+g+b) f(u+g+b) - (b-d)/b f(b)], i.e. T_g o T_{d,b}."""

    def __init__(self, base: LaplaceExponent, gamma: float, delta: float, beta: float):
        TransformParams(delta, beta, gamma)
        if not gamma > 0:
            raise ValidationError("composed transform needs gamma > 0")
        self.inner = TDeltaBeta(base, delta, beta)
        self.base, self.gamma, self.delta, self.beta = base, float(gamma), float(delta), float(beta)
        self.convention = base.convention
        self.unbounded_variation = base.unbounded_variation
        self.floor = self.inner.floor - self.gamma
        self.family = f"T^{self.gamma:g}[{self.delta:g},{self.beta:g}]"

    def _value(self, u):
        u = _asarg(u)
        g, b, d = self.gamma, self.beta, self.delta
        f = self.base._value
        if b > 0:
            z = u + g + b
            inner = (z - d) / z * f(z) - (b - d) / b * self.inner._fb
        else:
            inner = self.inner._value(u + g)
        if np.ndim(u):
            with np.errstate(invalid="ignore", divide="ignore"):
                out = u / (u + g) * inner
            if np.any(u == -g):
                out = np.where(u == -g, -g * self.inner.derivative(0.0), out)
            return out
        if u == -g:
            return -g * self.inner.derivative(0.0)
        return u / (u + g) * inner

    @property
    def kappa(self):
        return 0.0

    def triple(self):
        return transformed_triple(self.inner.triple(), self.gamma, self.gamma)

    def spec(self):
        return {"transform": {"delta": self.delta, "beta": self.beta, "gamma": self.gamma},
                "base": self.base.spec()}

    def describe(self):
        return f"T^{self.gamma:g}_{{{self.delta:g},{self.beta:g}}}({self.base.describe()})"


class FormalT(LaplaceExponent):
    """u -> u f(u+b)/(u+b) for any real b, no validity constraint.

    Used for formal maps such as T_{-theta}; the result need not be a Laplace
    exponent. At u = -b the removable singularity is filled with -b f'(0).
    """

    def __init__(self, base: LaplaceExponent, beta: float):
        self.base, self.beta = base, float(beta)
        self.convention = base.convention
        self.unbounded_variation = base.unbounded_variation
        self.floor = base.floor - self.beta
        self.family = f"T[{self.beta:g}]"

    def _value(self, u):
        u = _asarg(u)
        b = self.beta
        f = self.base._value
        if np.ndim(u):
            with np.errstate(invalid="ignore", divide="ignore"):
                out = u * f(u + b) / (u + b)
            if np.any(u == -b):
                out = np.where(u == -b, -b * self.base.derivative(0.0), out)
            return out
        if u + b == 0:
            return -b * self.base.derivative(0.0)
        return u * f(u + b) / (u + b)

    @property
    def kappa(self):
        return 0.0

    def describe(self):
        return f"T_{self.beta:g}({self.base.describe()})"


def esscher(psi: LaplaceExponent, beta: float) -> LaplaceExponent:
    """E_beta psi(u) = psi(u+beta) - psi(beta)."""
    if beta < 0:
        raise DomainError("Esscher parameter must be >= 0")
    return TDeltaBeta(psi, 0.0, beta)


def t_transform(psi: LaplaceExponent, delta: float, beta: float) -> LaplaceExponent:
    return TDeltaBeta(psi, delta, beta)


def t_beta(psi: LaplaceExponent, beta: float) -> LaplaceExponent:
    return TDeltaBeta(psi, beta, beta)


def t_composed(psi: LaplaceExponent, gamma: float, delta: float, beta: float) -> LaplaceExponent:
    return TComposed(psi, gamma, delta, beta)


def t_formal(psi: LaplaceExponent, beta: float) -> LaplaceExponent:
    return FormalT(psi, beta)


def transformed_triple(t: LevyTriple, delta: float, beta: float,
                       tol: float = 1e-10) -> LevyTriple:
    """Triple of T_{delta,beta} psi from the triple of psi.

    The jump measure is e^{beta x} Pi(dx) + delta e^{beta x} Pi-bar(-x) dx
    + delta kappa e^{beta x} dx. The linear coefficient is calibrated
    so the triple reproduces the transform at u = 1.
    """
    TransformParams(delta, beta)
    if beta == 0 and t.kappa > 0 and delta > 0:
        raise ValidationError("beta = 0 needs an unkilled exponent")
    comps = []
    if not t.jumps.is_zero:
        if beta > 0:
            comps.append(TiltedJumps(beta, t.jumps))
        else:
            comps.extend(t.jumps.components)
        if delta > 0:
            comps.append(TiltedTailJumps(delta, beta, t.jumps))
    if delta > 0 and t.kappa > 0:
        comps.append(ExpJumps(delta * t.kappa, beta))
    provisional = LevyTriple(0.0, 0.0, t.sigma2, JumpMeasure(tuple(comps)))
    psi = lambda u: eval_lk_triple(t, u, tol)
    if beta > 0:
        target = (1 + beta - delta) / (1 + beta) * psi(1 + beta) - (beta - delta) / beta * psi(beta)
    else:
        target = psi(1.0) * (1.0 - delta)
    a = target - eval_lk_triple(provisional, 1.0, tol)
    return LevyTriple(0.0, a, t.sigma2, provisional.jumps)


@dataclass
class SemigroupReport:
    beta: float
    gamma: float
    grid: list = field(default_factory=list)
    max_abs_diff: float = 0.0

    def to_json(self):
        return {"beta": self.beta, "gamma": self.gamma, "grid": list(self.grid),
                "max_abs_diff": self.max_abs_diff}


def semigroup_check(psi: LaplaceExponent, beta: float, gamma: float, grid) -> SemigroupReport:
    """max over the grid of |T_gamma(T_beta psi)(u) - T_{gamma+beta} psi(u)|."""
    lhs = t_beta(t_beta(psi, beta), gamma)
    rhs = t_beta(psi, beta + gamma)
    diffs = [abs(float(np.real(lhs(u))) - float(np.real(rhs(u)))) for u in grid]
    return SemigroupReport(beta, gamma, list(map(float, grid)), max(diffs) if diffs else 0.0)
