import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyx.errors import DomainError, RegimeError, ValidationError
from levyx.exponents import Brownian, Stable, StableSub
from levyx.scale import (euler_inversion, invert_laplace, scale_closed_form, scale_function,
                         scale_inversion, scale_tbeta, scale_tdelta_theta, talbot,
                         verify_laplace_identity)
from levyx.transform import t_beta, t_transform


@pytest.mark.parametrize("inv", [talbot, euler_inversion])
def test_inversion_of_exponential(inv):
    F = lambda s: 1.0 / (s + 1.0)
    assert inv(F, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-8)


def test_invert_laplace_reports_error():
    r = invert_laplace(lambda s: 1.0 / (s * s), 2.0)
    assert r.value == pytest.approx(2.0, rel=1e-8)
    assert r.error < 1e-6


def test_brownian_closed_form():
    # psi(u) = u^2 - u has 1/psi(u) = 1/(u - 1) - 1/u
    W = scale_function(Brownian(2.0, -1.0))
    for x in (0.5, 1.0, 3.0):
        assert W(x) == pytest.approx(math.expm1(x), rel=1e-14)
    W = scale_function(Brownian(2.0, 1.0))
    assert W(1.0) == pytest.approx(-math.expm1(-1.0), rel=1e-14)


def test_stable_scale_at_one():
    W = scale_function(Stable(1.5))
    assert W(1.0) == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-12)


def test_stable_inversion_matches_closed_form():
    for x in (0.5, 1.0, 2.0):
        ref = scale_closed_form("stable", x, alpha=1.5)
        assert scale_inversion(Stable(1.5), x).value == pytest.approx(ref, rel=1e-7)


def test_tbeta_brownian():
    W = scale_function(Brownian(1.0, 0.0, 0.0))
    for x in (0.5, 1.0, 3.0):
        assert scale_tbeta(W, 2.0, x) == pytest.approx((1.0 - math.exp(-2.0 * x)), abs=1e-8)


def test_tbeta_stable_vs_inversion():
    W = scale_function(Stable(1.5))
    tb = t_beta(Stable(1.5), 1.0)
    for x in (0.5, 1.0, 2.0):
        assert scale_tbeta(W, 1.0, x) == pytest.approx(scale_inversion(tb, x).value, rel=1e-5)


def test_tdelta_theta_vs_inversion():
    psi = Brownian(2.0, -1.0)
    W = scale_function(psi)
    tp = t_transform(psi, 0.5, 1.0)
    for x in (0.5, 1.5):
        assert scale_tdelta_theta(W, 0.5, 1.0, x) == pytest.approx(scale_inversion(tp, x).value, rel=1e-6)


@pytest.mark.parametrize("u", [2.0, 3.0])
def test_laplace_identity(u):
    chk = verify_laplace_identity(scale_function(Brownian(2.0, -1.0)), u)
    assert chk.relative < 1e-8


def test_strategy_errors():
    with pytest.raises(RegimeError):
        scale_function(StableSub(0.5))
    with pytest.raises(ValidationError):
        scale_function(Stable(1.5), "magic")
    with pytest.raises(DomainError):
        scale_function(Stable(1.5)).evaluate(-1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 4.0))
def test_brownian_scale_nondecreasing(x):
    W = scale_function(Brownian(2.0, -1.0))
    assert W(x + 0.1) >= W(x)
