import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyx.errors import DomainError, ValidationError
from levyx.exponents import (Brownian, CPExpSub, ExpJumps, JumpMeasure, LampertiStableSN,
                             LevyTriple, PoissonSub, Stable, StableJumps, StableSub,
                             TableJumps, TripleExponent, cramer_root, eval_lk_triple,
                             from_spec, to_spec, validate)

FAMILIES = [Brownian(1.0, 0.0, 0.0), Brownian(2.0, -1.0), Stable(1.5), StableSub(0.5),
            CPExpSub(1.0, 1.0, 1.0), LampertiStableSN(1.5)]


def test_closed_values():
    assert Brownian(2.0, -1.0)(3.0) == pytest.approx(9.0 - 3.0)
    assert Stable(1.5)(4.0) == pytest.approx(8.0)
    assert StableSub(0.5)(4.0) == pytest.approx(2.0)
    assert CPExpSub(1.0, 1.0, 1.0)(1.0) == pytest.approx(1.5)


def test_subordinator_psi_is_minus_phi():
    phi = StableSub(0.5)
    assert phi.is_subordinator
    assert phi.psi(2.0) == pytest.approx(-phi(2.0))


def test_cramer_root_brownian():
    assert cramer_root(Brownian(2.0, -1.0)) == pytest.approx(1.0, abs=1e-12)
    assert cramer_root(Brownian(2.0, -0.5)) == pytest.approx(0.5, abs=1e-12)
    assert cramer_root(Stable(1.5)) == 0.0


def test_stable_alpha_range_error():
    with pytest.raises(ValidationError, match="alpha"):
        from_spec({"family": "stable", "params": {"alpha": 2.5}})


def test_spec_field_errors():
    with pytest.raises(ValidationError, match="unknown family"):
        from_spec({"family": "nope"})
    with pytest.raises(ValidationError, match="missing"):
        from_spec({"family": "StableSub", "params": {}})
    with pytest.raises(ValidationError, match="missing field"):
        from_spec({"triple": {"jumps": [{"type": "exp", "weight": 1.0}]}})


@pytest.mark.parametrize("psi", FAMILIES, ids=lambda p: p.describe())
def test_spec_round_trip(psi):
    back = from_spec(to_spec(psi))
    grid = np.array([0.25, 0.5, 1.0, 2.0, 5.0])
    assert np.max(np.abs(back(grid) - psi(grid))) <= 1e-15


def test_triple_matches_closed_form_stable():
    psi = Stable(1.5)
    t = psi.triple()
    for u in (0.5, 1.0, 2.0):
        assert eval_lk_triple(t, u) == pytest.approx(psi(u), rel=1e-9)


def test_triple_matches_compound_poisson_subordinator():
    phi = CPExpSub(1.0, 1.0, 0.0)
    t = phi.triple()
    for u in (0.5, 2.0):
        assert -eval_lk_triple(t, u) == pytest.approx(phi(u), rel=1e-9)


def test_table_jump_density_triple():
    spec = {"triple": {"sigma2": 0.5, "a": 0.1,
                       "jumps": [{"type": "table", "r": [0.5, 1.0, 2.0], "values": [1.0, 2.0, 0.0]}]}}
    psi = from_spec(spec)
    assert isinstance(psi, TripleExponent)
    # tail of a piecewise-linear density is a sum of trapezoids
    assert psi.triple().jumps.tail(0.7) == pytest.approx(1.51, rel=1e-14)
    assert from_spec(to_spec(psi))(1.3) == psi(1.3)


def test_table_jumps_reject_bad_grid():
    with pytest.raises(ValidationError):
        TableJumps((1.0, 0.5), (1.0, 1.0))


def test_triple_rejects_negative_killing():
    with pytest.raises(ValidationError):
        LevyTriple(-1.0, 0.0, 0.0)


def test_jump_measure_tail():
    m = JumpMeasure((ExpJumps(2.0, 3.0),))
    assert m.tail(0.5) == pytest.approx(2.0 / 3.0 * math.exp(-1.5))
    with pytest.raises(DomainError):
        m.tail(0.0)


@pytest.mark.parametrize("psi", FAMILIES, ids=lambda p: p.describe())
def test_validate_shape(psi):
    assert validate(psi, np.linspace(0, 5, 21)).passed


def test_poisson_sub_from_q():
    phi = PoissonSub.from_q(0.5)
    assert phi(0.0) == pytest.approx(0.0, abs=1e-15)
    assert phi(1.0) > 0


@settings(max_examples=40, deadline=None)
@given(st.floats(1.05, 1.95), st.floats(0.01, 10.0), st.floats(0.01, 10.0))
def test_stable_convexity(alpha, u, v):
    psi = Stable(alpha)
    m = 0.5 * (u + v)
    assert psi(m) <= 0.5 * (psi(u) + psi(v)) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_stable_sub_monotone(alpha, u, v):
    phi = StableSub(alpha)
    lo, hi = sorted((u, v))
    assert phi(lo) <= phi(hi)
