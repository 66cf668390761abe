import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sc

from levyx import pssmp
from levyx.errors import DomainError, RegimeError
from levyx.exponents import Brownian, LampertiStableSN, Pochhammer, Stable, StableSub

EX = Pochhammer(1.5, 1.5, -1.0)  # theta = 2/3


def test_entrance_moments_brownian():
    law = pssmp.entrance_moments(Brownian(2.0, -0.5), 3)
    assert law.regime == "recurrent-extension"
    assert law.theta == pytest.approx(0.5)
    assert [law[n] for n in (1, 2, 3)] == pytest.approx([0.5, 0.75, 1.875], rel=1e-15)


def test_entrance_regime_drift():
    assert pssmp.entrance_moments(Stable(1.5), 2).regime == "drift>=0"


def test_entrance_rejects_subordinator():
    with pytest.raises((RegimeError, DomainError)):
        pssmp.entrance_moments(StableSub(0.5), 2)


def test_entrance_theta_one_out_of_regime():
    # Lamperti-stable with alpha = 1.5 has psi(1) = 0, so theta = 1
    with pytest.raises(RegimeError):
        pssmp.entrance_factorization(LampertiStableSN(1.5))


@pytest.mark.parametrize("psi", [Brownian(2.0, -0.5), EX], ids=lambda p: p.describe())
def test_entrance_factorization_moments(psi):
    fac = pssmp.entrance_factorization(psi)
    law = pssmp.entrance_moments(psi, 6)
    for n in range(1, 7):
        assert fac.moment(n) == pytest.approx(law[n], rel=1e-10)


@pytest.mark.parametrize("case,psi,delta", [(1, EX, 0.5), (1, Brownian(2.0, -0.5), 0.3),
                                            (2, EX, 0.0), (3, Stable(1.5), 0.5)])
def test_intertwining_cases(case, psi, delta):
    rep = pssmp.intertwining_factor(psi, delta, case, 6)
    assert rep.passed, rep.to_json()


def test_intertwining_band_is_flagged():
    rep = pssmp.intertwining_factor(EX, 1.2, 1, 6)
    assert rep.flags


def test_beta_moment():
    assert pssmp.beta_moment(2.0, 3.0, 1) == pytest.approx(0.4)


def test_eigen_series_bessel():
    # psi(k) = k^2 gives sum x^n/(n!)^2 = I_0(2 sqrt x)
    p = pssmp.eigen_series(Brownian(2.0, 0.0), 200)
    for x in (0.5, 1.0, 4.0):
        assert p(x) == pytest.approx(sc.i0(2 * math.sqrt(x)), rel=1e-14)


def test_eigen_series_zero_of_psi():
    with pytest.raises(DomainError):
        pssmp.eigen_series(Brownian(2.0, -1.0), 10)


def test_ek_on_series_matches_quadrature():
    from levyx.expfunctional import ek_apply
    p = pssmp.eigen_series(EX, 300)
    q = pssmp.ek_on_series(p, 1.5, 0.5)
    assert q(1.0) == pytest.approx(ek_apply(p, 1.5, 0.5, 1.0, 1e-10).value, rel=1e-10)


@pytest.mark.parametrize("case,psi,delta", [(1, LampertiStableSN(1.5), 0.5), (2, EX, None),
                                            (3, Stable(1.5), 0.5)])
def test_corrected_kernels(case, psi, delta):
    assert pssmp.kernel_check(psi, case, delta, "corrected", 30).passed()


def test_stated_kernel_differs():
    chk = pssmp.kernel_check(LampertiStableSN(1.5), 1, 0.5, "stated", 30)
    assert chk.max_rel_error > 0.5


@pytest.mark.parametrize("psi", [Brownian(2.0, 1.0), Stable(1.5), EX], ids=lambda p: p.describe())
def test_mellin_profile_nonvanishing(psi):
    prof = pssmp.mellin_profile(psi)
    assert prof.nonvanishing


@settings(max_examples=20, deadline=None)
@given(st.floats(1.1, 1.9), st.integers(1, 5))
def test_entrance_moment_recursion(alpha, n):
    psi = Stable(alpha)
    law = pssmp.entrance_moments(psi, n + 1)
    assert law[n + 1] == pytest.approx(law[n] * psi(n + 1.0) / (n + 1), rel=1e-13)
