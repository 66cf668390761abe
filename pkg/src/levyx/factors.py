"""Products of independent primitive random factors.

A DistributionFactor is X = prod_i Y_i^{p_i} with independent Y_i, each
Beta(a, b), Gamma(a) (unit exponential is Gamma(1)), a constant, or a law
known only through its Mellin transform. Moments multiply factorwise:
E[X^s] = prod_i E[Y_i^{p_i s}].
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import specfun
from .errors import DomainError, ValidationError

__all__ = ["Factor", "BetaFactor", "GammaFactor", "ConstantFactor", "MellinFactor",
           "DistributionFactor"]


def _lgam(z) -> complex:
    z = complex(z)
    if z.imag == 0 and z.real > 0:
        return complex(specfun.lgamma(z.real))
    return specfun.loggamma(z)


class Factor:
    power: float = 1.0

    def log_mellin(self, s: complex) -> complex:
        """log E[Y^{s}] for the primitive variable Y (before the power)."""
        raise NotImplementedError

    def sample_base(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise ValidationError(f"{self.label()} cannot be sampled")

    def label(self) -> str:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    @property
    def degenerate(self) -> bool:
        return False


@dataclass(frozen=True)
class BetaFactor(Factor):
    """B(a, b); b = 0 is the point mass at 1."""
    a: float
    b: float
    power: float = 1.0

    def __post_init__(self):
        if not self.a > 0 or self.b < 0:
            raise ValidationError(f"Beta factor needs a > 0, b >= 0 (got {self.a}, {self.b})")

    @property
    def degenerate(self):
        return self.b == 0

    def log_mellin(self, s):
        if self.b == 0:
            return 0j
        if complex(s).real + self.a <= 0:
            raise DomainError(f"E[B^s] infinite for s={s} <= -{self.a}")
        a, b = self.a, self.b
        return _lgam(a + s) + _lgam(a + b) - _lgam(a) - _lgam(a + b + s)

    def sample_base(self, rng, n):
        if self.b == 0:
            return np.ones(n)
        return rng.beta(self.a, self.b, n)

    def label(self):
        return f"B({self.a:g},{self.b:g})"

    def to_json(self):
        return {"type": "beta", "a": self.a, "b": self.b, "power": self.power}


@dataclass(frozen=True)
class GammaFactor(Factor):
    """G(a) with density x^{a-1}e^{-x}/Gamma(a); G(1) is the unit exponential."""
    a: float
    power: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValidationError("Gamma factor needs a > 0")

    def log_mellin(self, s):
        if complex(s).real + self.a <= 0:
            raise DomainError(f"E[G^s] infinite for s={s} <= -{self.a}")
        return _lgam(self.a + s) - _lgam(self.a)

    def sample_base(self, rng, n):
        return rng.gamma(self.a, 1.0, n)

    def label(self):
        return "e1" if self.a == 1 else f"G({self.a:g})"

    def to_json(self):
        return {"type": "gamma", "a": self.a, "power": self.power}


@dataclass(frozen=True)
class ConstantFactor(Factor):
    c: float
    power: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValidationError("constant factor must be positive")

    def log_mellin(self, s):
        return complex(s) * math.log(self.c)

    def sample_base(self, rng, n):
        return np.full(n, self.c)

    def label(self):
        return f"{self.c:.6g}"

    def to_json(self):
        return {"type": "constant", "c": self.c, "power": self.power}


@dataclass(frozen=True)
class MellinFactor(Factor):
    """A law given by s -> E[Y^s]; ``moment`` may raise DomainError where unknown."""
    name: str
    moment: Callable[[complex], complex] = field(compare=False)
    power: float = 1.0
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = field(default=None, compare=False)
    params: dict = field(default_factory=dict, compare=False)

    def log_mellin(self, s):
        v = self.moment(s)
        if v == 0:
            raise DomainError(f"{self.name}: zero moment at s={s}")
        return cmath.log(v)

    def sample_base(self, rng, n):
        if self.sampler is None:
            return super().sample_base(rng, n)
        return self.sampler(rng, n)

    def label(self):
        return self.name

    def to_json(self):
        return {"type": "mellin", "name": self.name, "power": self.power, "params": dict(self.params)}


def _with_power(f: Factor, p: float) -> Factor:
    d = dict(f.__dict__)
    d["power"] = f.power * p
    return type(f)(**d)


@dataclass(frozen=True)
class DistributionFactor:
    factors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(f for f in self.factors if not f.degenerate))

    def __mul__(self, other: "DistributionFactor") -> "DistributionFactor":
        return DistributionFactor(self.factors + other.factors)

    def power(self, p: float) -> "DistributionFactor":
        return DistributionFactor(tuple(_with_power(f, p) for f in self.factors))

    def log_mellin(self, s) -> complex:
        return sum((f.log_mellin(f.power * s) for f in self.factors), 0j)

    def mellin(self, s) -> complex:
        return cmath.exp(self.log_mellin(s))

    def moment(self, s: float) -> float:
        """E[X^s] for real s."""
        v = self.mellin(float(s))
        return float(v.real)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.ones(n)
        for f in self.factors:
            out *= f.sample_base(rng, n) ** f.power
        return out

    def labels(self) -> list[str]:
        out = []
        for f in self.factors:
            out.append(f.label() if f.power == 1 else f"{f.label()}^{f.power:g}")
        return out

    def describe(self) -> str:
        return " * ".join(self.labels()) or "1"

    def to_json(self) -> dict:
        return {"factors": [f.to_json() for f in self.factors], "label": self.describe()}
