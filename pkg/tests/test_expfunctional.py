import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyx import expfunctional as ef
from levyx.errors import DomainError
from levyx.exponents import Brownian, CPExpSub, LampertiStableSN, PoissonSub, StableSub


def test_stable_sub_moments():
    lad = ef.sub_moments(StableSub(0.5), 3)
    assert lad[1] == pytest.approx(1.0)
    assert lad[2] == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert lad[3] == pytest.approx(math.sqrt(6.0), rel=1e-15)


def test_cp_exp_killed_mean():
    assert ef.sub_moments(CPExpSub(1.0, 1.0, 1.0), 1)[1] == pytest.approx(2.0 / 3.0, rel=1e-15)


def test_length_bias_moments():
    phi = StableSub(0.5)
    base = ef.sub_moments(phi, 3)
    tb = ef.sub_tbeta_moments(phi, 1.0, 2)
    for n in (1, 2):
        assert tb[n] == pytest.approx(base[n + 1] / base[1], rel=1e-13)


def test_sub_mellin_integer_points():
    phi = StableSub(0.5)
    M = ef.sub_mellin(phi)
    if M is None:
        pytest.skip("no Mellin closed form")
    assert complex(M(2.0)).real == pytest.approx(math.sqrt(2.0), rel=1e-10)


def test_sn_negative_moments():
    lad = ef.sn_neg_moments(Brownian(2.0, 3.0), 2)
    assert lad[1] == pytest.approx(3.0, rel=1e-12)
    assert lad[2] == pytest.approx(12.0, rel=1e-12)


def test_sn_mellin_mean():
    M = ef.sn_mellin(Brownian(2.0, 3.0))
    assert complex(M(1.0)).real == pytest.approx(0.5, rel=1e-10)


def test_poisson_density():
    f = ef.poisson_qseries_density(0.5)
    assert f.mass() == pytest.approx(1.0, abs=1e-8)
    ref = ef.sub_moments(PoissonSub.unit_rate(0.5), 2)
    for n in (1, 2):
        assert f.moment(n)[0] == pytest.approx(ref[n], rel=1e-8)


def test_ek_eigenvalue_exact():
    assert ef.ek_eigenvalue(1.0, 0.5, 1) == pytest.approx(0.8, rel=1e-15)


def test_ek_constant_and_monomial():
    r = ef.ek_apply(lambda x: 1.0, 1.0, 0.5, 2.0)
    assert r.value == pytest.approx(1.0, abs=1e-8)
    r = ef.ek_apply(lambda x: x * x, 1.0, 0.5, 2.0)
    assert r.value == pytest.approx(4.0 * ef.ek_eigenvalue(1.0, 0.5, 2), rel=1e-8)
    assert r.discrepancy < 1e-8


def test_ek_domain():
    with pytest.raises(DomainError):
        ef.ek_apply(lambda x: 1.0, 1.0, 0.5, 0.0)


def test_tail_exponent():
    ta = ef.tail_asymptote(LampertiStableSN(1.5), 0.5)
    assert ta.exponent == pytest.approx(-1.5)
    with pytest.raises(DomainError):
        ef.tail_asymptote(Brownian(2.0, -1.0), 1.5)


def test_beta_factorization_moments():
    psi = Brownian(2.0, -1.0)
    fac = ef.beta_factorization(psi, 0.5)
    assert "Beta" in fac.describe() or "B(" in fac.describe()
    # first moment finite and positive
    assert fac.moment(-1.0) > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 0.9), st.integers(1, 6))
def test_moment_recursion(alpha, n):
    # E[I^n] = n/phi(n) E[I^{n-1}]
    phi = StableSub(alpha)
    lad = ef.sub_moments(phi, n)
    prev = 1.0 if n == 1 else lad[n - 1]
    assert lad[n] == pytest.approx(n / phi(n) * prev, rel=1e-13)
