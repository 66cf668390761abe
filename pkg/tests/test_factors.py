import math

import numpy as np
import pytest

from levyx.errors import DomainError, ValidationError
from levyx.factors import BetaFactor, ConstantFactor, DistributionFactor, GammaFactor


def test_beta_moments():
    f = DistributionFactor((BetaFactor(2.0, 3.0),))
    assert f.moment(1) == pytest.approx(0.4, rel=1e-14)
    assert f.moment(2) == pytest.approx(2 * 3 / (5 * 6), rel=1e-14)


def test_gamma_moments_and_pole():
    f = DistributionFactor((GammaFactor(2.5),))
    assert f.moment(1.5) == pytest.approx(math.gamma(4.0) / math.gamma(2.5), rel=1e-14)
    with pytest.raises(DomainError):
        f.moment(-3.0)


def test_product_is_multiplicative():
    a = DistributionFactor((BetaFactor(1.0, 2.0),))
    b = DistributionFactor((GammaFactor(3.0),))
    for s in (1.0, 2.0, 0.5):
        assert (a * b).moment(s) == pytest.approx(a.moment(s) * b.moment(s), rel=1e-13)


def test_power_and_constant():
    f = DistributionFactor((GammaFactor(3.0), ConstantFactor(2.0))).power(-1.0)
    # E[(2G)^{-1}] = 1/(2 (a-1))
    assert f.moment(1) == pytest.approx(0.25, rel=1e-14)


def test_invalid_parameters():
    with pytest.raises(ValidationError):
        GammaFactor(0.0)
    with pytest.raises(ValidationError):
        ConstantFactor(-1.0)


def test_sampling_matches_moments(rng):
    f = DistributionFactor((BetaFactor(1.5, 0.5), GammaFactor(2.0)))
    x = f.sample(rng, 200_000)
    se = x.std() / math.sqrt(x.size)
    assert abs(x.mean() - f.moment(1)) < 4 * se


def test_describe():
    f = DistributionFactor((BetaFactor(1.0, 2.0),)) * DistributionFactor((GammaFactor(3.0),)).power(-1)
    assert "^-1" in f.describe()
