import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rk4_orbit
from satflux.model import (
    F_MAX, SPINODAL, ModelParams, PhasePoint, ancillary_rhs, ancillary_rhs_array, bulk_force,
    bulk_force_deriv, bulk_primitive, energy_at_vertical, first_integral, flux, interface_energy,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_constants():
    assert bulk_force(SPINODAL) == pytest.approx(F_MAX, rel=1e-15)
    assert bulk_force_deriv(1, SPINODAL) == pytest.approx(0.0, abs=1e-15)


def test_oddness_and_evenness_on_random_sample():
    rng = np.random.default_rng(7)
    u = rng.uniform(-3, 3, 1000)
    s = rng.uniform(-50, 50, 1000)
    assert np.array_equal(bulk_force(-u), -bulk_force(u))
    assert np.array_equal(flux(-s), -flux(s))
    assert np.array_equal(bulk_primitive(-u), bulk_primitive(u))
    assert np.array_equal(interface_energy(-s), interface_energy(s))


@given(finite, finite)
def test_flux_saturates_and_increases(s1, s2):
    assert abs(flux(s1)) < 1.0
    if s2 > s1:
        assert flux(s2) >= flux(s1)


def test_flux_strictly_increasing_sampled():
    s = np.linspace(-30, 30, 100001)
    assert np.all(np.diff(flux(s)) > 0)


@given(st.floats(-5, 5))
def test_derivatives_match_finite_differences(u):
    h = 1e-5
    assert bulk_force_deriv(1, u) == pytest.approx((bulk_force(u + h) - bulk_force(u - h)) / (2 * h), abs=1e-6)
    assert bulk_primitive(u + h) - bulk_primitive(u - h) == pytest.approx(2 * h * bulk_force(u), abs=1e-8)


def test_bad_derivative_order():
    with pytest.raises(ValueError):
        bulk_force_deriv(4, 0.0)


def test_interface_energy_small_argument():
    assert interface_energy(1e-10) == pytest.approx(5e-21, rel=1e-12)


def test_first_integral_values():
    p = PhasePoint(0.0, 0.0)
    assert first_integral(p, 3.0, 0.1) == 1.0
    assert energy_at_vertical(1.0, 4.0, 0.0) == pytest.approx(-1.0)
    assert first_integral(PhasePoint(1.0, 1e8), 4.0, 0.0) == pytest.approx(-1.0, abs=2e-8)


def test_rhs_forms_agree():
    p = PhasePoint(0.3, -1.2)
    r = ancillary_rhs(p, 5.0, 0.05)
    arr = ancillary_rhs_array(0.0, np.array([0.3, -1.2]), 5.0, 0.05)
    assert (r.u, r.v) == pytest.approx(tuple(arr), rel=1e-15)


@pytest.mark.parametrize("bad", [dict(L=0.0, M=0.1, lam=1.0), dict(L=1.0, M=math.nan, lam=1.0),
                                 dict(L=1.0, M=0.1, lam=-2.0), dict(L=math.inf, M=0.0, lam=1.0)])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        ModelParams(**bad)


def test_phase_point_rejects_infinite():
    with pytest.raises(ValueError):
        PhasePoint(0.0, math.inf)
    assert ModelParams(2.0, 0.1, 4.0).epsilon == 0.25


@pytest.mark.parametrize("lam,a,u0,v0", [(2.0, 0.1, 0.3, 0.0), (4.0, 0.0, 0.5, 0.2), (6.0, -0.1, -0.2, 0.3)])
def test_first_integral_conserved_along_orbits(lam, a, u0, v0):
    u, v = rk4_orbit(lam, a, u0, v0, 1e-4, 10.0)
    h0 = first_integral(PhasePoint(u[0], v[0]), lam, a)
    h1 = first_integral(PhasePoint(u[-1], v[-1]), lam, a)
    assert abs(h1 - h0) <= 1e-8 * (1 + abs(h0))


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-3, 3), st.floats(0.5, 10), st.floats(-0.3, 0.3))
def test_first_integral_is_invariant_of_the_field(u, v, lam, a):
    # dH/dx = grad H . field vanishes identically
    p = PhasePoint(u, v)
    r = ancillary_rhs(p, lam, a)
    dH_du = lam * (a - bulk_force(u))
    dH_dv = -v / (1 + v * v) ** 1.5
    assert dH_du * r.u + dH_dv * r.v == pytest.approx(0.0, abs=1e-9 * (1 + abs(r.v)))
