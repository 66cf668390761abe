import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sc

from levyx import specfun
from levyx.errors import DomainError


@pytest.mark.parametrize("x", [-3.0, -0.5, 0.0, 0.7, 4.0])
def test_mittag_leffler_exponential_and_cosh(x):
    assert specfun.mittag_leffler(1.0, 1.0, x).value == pytest.approx(math.exp(x), rel=1e-13)
    if x >= 0:
        assert specfun.mittag_leffler(2.0, 1.0, x).value == pytest.approx(math.cosh(math.sqrt(x)), rel=1e-13)


@pytest.mark.parametrize("x", [-1.5, 0.3, 1.2])
def test_mittag_leffler_half_is_erfcx(x):
    # E_{1/2,1}(z) = exp(z^2) erfc(-z)
    assert specfun.mittag_leffler(0.5, 1.0, x).value == pytest.approx(sc.erfcx(-x), rel=1e-12)


def test_mittag_leffler_rejects_nonpositive_alpha():
    with pytest.raises(DomainError):
        specfun.mittag_leffler(0.0, 1.0, 1.0)


def test_pochhammer_and_poles():
    assert specfun.pochhammer(3.0, 2.0) == pytest.approx(12.0)
    assert specfun.pochhammer(-2.0, 0.5) == 0.0
    with pytest.raises(DomainError):
        specfun.pochhammer(0.5, -1.5)


def test_q_pochhammer_finite_and_euler_identity():
    q = 0.5
    fin = specfun.q_pochhammer(0.3, q, 4).value
    assert fin == pytest.approx(np.prod([1 - 0.3 * q ** j for j in range(4)]), rel=1e-15)
    inf = specfun.q_pochhammer(q, q).value
    assert inf == pytest.approx(np.prod([1 - q ** j for j in range(1, 200)]), rel=1e-14)


def test_wright_2f2_delta_zero_is_mittag_leffler():
    a = 1.5
    for x in (0.5, 1.0, 2.0):
        lhs = specfun.wright_2f2(a, 0.0, x).value
        rhs = math.gamma(a) * specfun.mittag_leffler(a, a, x).value
        assert lhs == pytest.approx(rhs, rel=1e-13)


def test_incomplete_gamma_split():
    a, b = 2.5, 1.3
    assert specfun.inc_gamma(a, b) + specfun.lower_inc_gamma(a, b) == pytest.approx(math.gamma(a), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 30.0))
def test_loggamma_matches_lgamma(x):
    assert float(np.real(specfun.loggamma(x))) == pytest.approx(math.lgamma(x), rel=1e-13, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 1.9), st.floats(0.5, 3.0), st.floats(-2.0, 2.0))
def test_mittag_leffler_recurrence(alpha, beta_, x):
    # E_{a,b}(x) = 1/Gamma(b) + x E_{a,a+b}(x)
    lhs = specfun.mittag_leffler(alpha, beta_, x).value
    rhs = 1 / math.gamma(beta_) + x * specfun.mittag_leffler(alpha, alpha + beta_, x).value
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-12)
