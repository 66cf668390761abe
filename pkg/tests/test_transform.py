import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyx.errors import DomainError, ValidationError
from levyx.exponents import Brownian, CPExpSub, Stable, StableSub, eval_lk_triple
from levyx.transform import (esscher, semigroup_check, t_beta, t_composed, t_formal,
                             t_transform, transformed_triple)

U = [0.25, 0.5, 1.0, 2.0, 5.0]


def test_tbeta_brownian_closed_form():
    psi = Brownian(1.0, 0.0, 0.0)
    tb = t_beta(psi, 2.0)
    for u in U:
        assert tb(u) == pytest.approx(u * (u + 2.0) / 2.0, rel=1e-15)


def test_t_delta_beta_formula():
    psi = Stable(1.5)
    d, b = 0.5, 2.0
    tp = t_transform(psi, d, b)
    for u in U:
        ref = (u + b - d) / (u + b) * psi(u + b) - (b - d) / b * psi(b)
        assert tp(u) == pytest.approx(ref, rel=1e-15)


def test_stable_t11_at_one():
    # T_{1,1} psi(1) = 1/2 psi(2) = 2^{alpha-1}
    assert t_transform(Stable(1.5), 1.0, 1.0)(1.0) == pytest.approx(math.sqrt(2.0), rel=1e-15)


def test_delta_equal_beta_is_tbeta():
    psi = Brownian(2.0, -1.0)
    a, b = t_transform(psi, 1.5, 1.5), t_beta(psi, 1.5)
    for u in U:
        assert a(u) == pytest.approx(b(u), rel=1e-15)


def test_transform_vanishes_at_zero():
    for psi in (Stable(1.5), StableSub(0.5)):
        assert t_transform(psi, 0.5, 2.0)(0.0) == pytest.approx(0.0, abs=1e-15)


def test_esscher():
    psi = Brownian(2.0, -1.0)
    e = esscher(psi, 1.0)
    for u in U:
        assert e(u) == pytest.approx(psi(u + 1.0) - psi(1.0))


def test_formal_t_is_not_validated():
    f = t_formal(Brownian(2.0, -0.5), -0.5)
    # u psi(u - 0.5)/(u - 0.5)
    assert f(2.0) == pytest.approx(2.0 * (1.5 ** 2 - 0.75) / 1.5)


def test_derivative_matches_finite_difference():
    tp = t_transform(Stable(1.5), 0.5, 1.0)
    h = 1e-6
    fd = (tp(1.0 + h) - tp(1.0 - h)) / (2 * h)
    assert tp.derivative(1.0) == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("psi", [Brownian(1.0, 0.0, 0.0), Stable(1.5), StableSub(0.5), CPExpSub(1.0, 1.0, 0.0)],
                         ids=lambda p: p.describe())
@pytest.mark.parametrize("beta,gamma", [(0.3, 0.7), (1.0, 2.0)])
def test_semigroup(psi, beta, gamma):
    rep = semigroup_check(psi, beta, gamma, U)
    assert rep.max_abs_diff <= 1e-12


@pytest.mark.parametrize("psi", [Stable(1.5), CPExpSub(1.0, 1.0, 0.0)], ids=lambda p: p.describe())
def test_transformed_triple_agrees(psi):
    t = transformed_triple(psi.triple(), 1.0, 1.0)
    tp = t_transform(psi, 1.0, 1.0)
    sign = -1.0 if psi.is_subordinator else 1.0
    for u in (0.5, 2.0):
        assert sign * eval_lk_triple(t, u) == pytest.approx(tp(u), abs=1e-7)


def test_composed_matches_nested():
    psi = Stable(1.5)
    c = t_composed(psi, 1.0, 0.5, 2.0)
    n = t_beta(t_transform(psi, 0.5, 2.0), 1.0)
    for u in U:
        assert c(u) == pytest.approx(n(u), rel=1e-13)


def test_bad_parameters():
    with pytest.raises((DomainError, ValidationError)):
        t_transform(Stable(1.5), -0.1, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(0.05, 5.0))
def test_semigroup_property(beta, gamma, u):
    psi = Stable(1.5)
    lhs = t_beta(t_beta(psi, beta), gamma)(u)
    rhs = t_beta(psi, beta + gamma)(u)
    assert lhs == pytest.approx(rhs, rel=1e-12)
