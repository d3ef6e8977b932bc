import numpy as np
import pytest

from coopest import closedform as cf
from coopest.estimation import cost_of, family_moments, min_cost
from coopest.quantum import ProbeState, phase_damp_family

PI = np.pi
GRID = np.round(np.linspace(0, 1, 11), 12)


def test_cb_min_values():
    assert np.isclose(cf.cb_min(0.0), PI ** 2 / 48, atol=1e-15)
    assert np.isclose(cf.cb_min(0.5), 0.17423205497490, atol=1e-13)
    for g in GRID:
        assert np.isclose(cf.cb_min(g), cf.cb_min(1 - g), atol=1e-15)
    assert np.argmin(cf.cb_min(GRID)) == 5


def test_cb_min_alt_matches_only_at_endpoints():
    assert np.isclose(cf.cb_min_alt(0.0), cf.cb_min(0.0)) and np.isclose(cf.cb_min_alt(1.0), cf.cb_min(1.0))
    assert np.isclose(cf.cb_min_alt(0.5), 0.15011, atol=1e-5)
    assert abs(cf.cb_min_alt(0.5) - cf.cb_min(0.5)) > 0.02


def test_cf_min_values_and_monotone():
    assert np.isclose(cf.cf_min(0.0), 0.104296, atol=1e-6)
    assert np.isclose(cf.cf_min(1.0), PI ** 2 / 48, atol=1e-15)
    fine = np.linspace(0, 1, 101)
    assert np.all(np.diff(cf.cf_min(fine)) >= 0)


@pytest.mark.parametrize("fn", [cf.cb_min, cf.cb_min_alt, cf.cf_min, cf.pe, cf.sb_opt])
def test_domain(fn):
    for bad in (-0.01, 1.01, np.nan):
        with pytest.raises(ValueError):
            fn(bad)


def test_numeric_agreement():
    f = phase_damp_family()
    for g in GRID:
        assert abs(min_cost(f, ProbeState(g), "B") - cf.cb_min(g)) <= 1e-9
        assert abs(min_cost(f, ProbeState(g), "F") - cf.cf_min(g)) <= 1e-9


def test_pe_consistency_and_support():
    fine = np.linspace(0, 1, 1001)
    diff = np.maximum(cf.cf_min(fine) - cf.cb_min(fine), 0)
    assert np.max(np.abs(diff - cf.pe(fine))) < 1e-12
    g0 = cf.gamma0()
    inner = fine[1:-1]
    assert np.all((cf.pe(inner) > 0) == (inner > g0))
    assert cf.pe(0.0) == 0 and cf.pe(1.0) == 0


def test_gamma0_gamma_star():
    g0, gs = cf.gamma0(), cf.gamma_star()
    assert round(g0, 2) == 0.54 and round(gs, 2) == 0.77
    assert abs(cf.cf_min(g0) - cf.cb_min(g0)) < 1e-9
    assert cf.pe(g0 + 1e-6) > 0
    fine = np.linspace(0, 1, 1001)
    assert abs(fine[np.argmax(cf.pe(fine))] - gs) < 1e-3
    a, b, c, d, th = cf.gamma_star_coefficients()
    # gamma* is a root of the cubic a g^3 + b g^2 + c g + d
    assert abs(((a * gs + b) * gs + c) * gs + d) < 1e-9 * abs(a)


def test_coop_min_at_zero():
    assert np.isclose(cf.coop_min_at_zero(), 0.104296, atol=1e-6)
    assert cf.coop_min_at_zero() == cf.cf_min(0.0) or np.isclose(cf.coop_min_at_zero(), cf.cf_min(0.0))


def test_sb_opt():
    m = cf.sb_opt(0.5)
    diag = (16 - 8 * PI + PI ** 3) / (4 * (PI ** 2 - 4))
    assert np.allclose(np.diag(m), [diag, diag], atol=1e-14)
    assert np.isclose(diag, 0.93165, atol=1e-5)
    assert np.isclose(m[0, 1].real, (PI - 4) * PI / (2 * (PI ** 2 - 4)), atol=1e-14)
    f = phase_damp_family()
    for g in (0.3, 0.5, 0.77):
        mB = family_moments(f, ProbeState(g), "B")
        assert abs(cost_of(cf.sb_opt(g), mB) - cf.cb_min(g)) <= 1e-9


def test_vectorised_inputs():
    out = cf.cb_min(GRID)
    assert out.shape == GRID.shape
    assert isinstance(cf.cb_min(0.3), float)
