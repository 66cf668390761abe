import math

import numpy as np
import pytest

from levyx import montecarlo as mc
from levyx.errors import DomainError, HorizonError, NumericalError, RegimeError, ValidationError
from levyx.exponents import Brownian, CPExpSub, Stable, StableSub
from levyx.expfunctional import sub_moments


def _within(x, target, k=4.0):
    se = x.std(ddof=1) / math.sqrt(x.size)
    return abs(x.mean() - target) <= k * se


def test_kanter_laplace(rng):
    s = mc.kanter_stable(0.5, 200_000, rng)
    for u in (0.5, 1.0, 2.0):
        assert _within(np.exp(-u * s), math.exp(-u ** 0.5))


def test_cms_exponential_moment(rng):
    x = mc.cms_spectrally_negative(1.5, 200_000, rng)
    for u in (0.3, 0.6):
        assert _within(np.exp(u * x), math.exp(u ** 1.5))


def test_kanter_domain(rng):
    with pytest.raises(DomainError):
        mc.kanter_stable(1.5, 10, rng)


def test_block_rng_reproducible():
    a = mc.block_rng(7, 3, "expfun").standard_normal(5)
    b = mc.block_rng(7, 3, "expfun").standard_normal(5)
    c = mc.block_rng(7, 4, "expfun").standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_worker_count_does_not_change_output():
    phi = StableSub(0.5)
    outs = [mc.sample_exp_functional(phi, mc.SimConfig(seed=3, paths=9000, workers=w, block=1000)).samples
            for w in (1, 2, 3)]
    assert np.array_equal(outs[0], outs[1]) and np.array_equal(outs[0], outs[2])


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("LEVYX_THREADS", "2")
    assert mc.SimConfig(workers=8).resolved_workers() == 2
    assert mc.SimConfig(workers=8).digest() == mc.SimConfig(workers=1).digest()


def test_config_validation():
    with pytest.raises(ValidationError):
        mc.SimConfig(paths=0)
    with pytest.raises(ValidationError):
        mc.SimConfig(eta=0.0)


def test_subordinator_expfun_mean():
    phi = CPExpSub(1.0, 1.0, 1.0)
    s = mc.sample_exp_functional(phi, mc.SimConfig(seed=1, paths=20_000))
    assert _within(s.samples, sub_moments(phi, 1)[1])


def test_sn_expfun_mean():
    # psi(u) = u^2 + 3u: E[I] = 1/2
    s = mc.sample_exp_functional(Brownian(2.0, 3.0), mc.SimConfig(seed=2, paths=4000, dt=0.01))
    assert _within(s.samples, 0.5)


def test_increments_stable_sub(rng):
    x = mc.sample_increments(StableSub(0.5), 1.0, 100_000, rng)
    assert _within(np.exp(-x), math.exp(-1.0))


def test_sliced_splitting_laplace():
    phi = CPExpSub(1.0, 1.0)
    ss = mc.sliced_splitting(phi, 1.0, 1.0, mc.SimConfig(seed=5, paths=20_000))
    from levyx.transform import t_beta
    tb = t_beta(phi, 1.0)
    rep = mc.mc_compare(ss.spliced, laplace={u: math.exp(-tb(u)) for u in (0.5, 1.0, 2.0)}, threshold=4.0)
    assert rep.passed
    assert np.all(ss.spliced <= ss.unspliced + 1e-12)


def test_sliced_splitting_edge_cases():
    z = mc.sliced_splitting(CPExpSub(1.0, 1.0), 1.0, 0.0, mc.SimConfig(paths=10))
    assert np.all(z.spliced == 0)
    with pytest.raises(RegimeError):
        mc.sliced_splitting(CPExpSub(1.0, 1.0, 1.0), 1.0, 1.0, mc.SimConfig(paths=10))


def test_lamperti_linear_path():
    # xi_s = mu s gives X_t = x0 (1 + alpha mu t x0^{-alpha})^{1/alpha}
    h, mu, x0, alpha = 0.01, 0.5, 2.0, 1.0
    xi = mu * h * np.arange(2001)
    X, ok = mc.lamperti_eval(xi, h, alpha, x0, 1.0)
    assert ok[0]
    assert X[0] == pytest.approx(x0 * (1 + alpha * mu * 1.0 / x0 ** alpha) ** (1 / alpha), rel=1e-12)


def test_lamperti_horizon():
    p = mc.PathSample(np.linspace(0, 1, 11), np.zeros(11))
    out = mc.lamperti(p, 1.0, 1.0, [0.5])
    assert out.values[0] == pytest.approx(1.0)
    with pytest.raises(HorizonError):
        mc.lamperti(p, 1.0, 1.0, [5.0])


def test_path_validation():
    with pytest.raises(ValidationError):
        mc.PathSample(np.array([0.0, 0.0]), np.zeros(2))


def test_simulate_path_is_increasing_for_subordinator():
    p = mc.simulate_path(StableSub(0.5), 2.0, mc.SimConfig(seed=1))
    assert np.all(np.diff(p.values) >= 0)


def test_mc_compare_zero_variance():
    with pytest.raises(NumericalError):
        mc.mc_compare(np.ones(10), moments={1: 2.0})
    assert mc.mc_compare(np.ones(10), moments={1: 1.0}).passed


def test_tail_slope_pareto(rng):
    x = rng.pareto(0.5, 200_000) + 1.0  # density ~ x^{-1.5}
    slope, se = mc.tail_slope(x)
    assert abs(slope + 1.5) < 4 * se + 0.02
    assert mc.hill_estimator(x) == pytest.approx(0.5, rel=0.05)


def test_sample_factor_deterministic():
    from levyx.factors import BetaFactor, DistributionFactor
    f = DistributionFactor((BetaFactor(1.0, 2.0),))
    cfg = mc.SimConfig(seed=9, paths=5000)
    assert np.array_equal(mc.sample_factor(f, cfg), mc.sample_factor(f, cfg))
