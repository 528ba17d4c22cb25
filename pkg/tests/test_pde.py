import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import trapezoid_mass
from satflux.errors import NonFinite
from satflux.local_bifurcation import bifurcation_lambda
from satflux.model import ModelParams
from satflux.pde import (
    GridState, SchemeConfig, StopReason, count_interfaces, default_dt, discrete_mass, max_slope,
    nonlocal_term, preset_initial, run, step,
)
from satflux.presets import PRESETS, get_preset

LEFT = ModelParams(L=1.7, M=0.2, lam=4.0)


def test_discrete_mass_matches_trapezoid():
    u = np.random.default_rng(3).normal(size=101)
    assert discrete_mass(u, 0.01) == pytest.approx(trapezoid_mass(u, 0.01), rel=1e-14)


def test_mass_conserved_over_many_steps():
    state = get_preset("exp1-left")[0].initial_state(200)
    dt = default_dt(state.dx, LEFT.lam)
    res = run(state, SchemeConfig(N=200, t_end=1e5 * dt, equilibrium_tol=0.0, audit_every=5000))
    assert res.steps == 100000 and res.reason is StopReason.HORIZON
    assert res.max_mass_drift <= 1e-10 * (1 + abs(state.initial_mass))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(20, 120))
def test_mass_conserved_for_random_data(seed, N):
    u = 0.2 + 0.5 * np.random.default_rng(seed).uniform(-1, 1, N + 1)
    state = GridState.from_values(u, ModelParams(1.0, 0.2, 6.0))
    res = run(state, SchemeConfig(N=N, t_end=2000 * default_dt(state.dx, 6.0), equilibrium_tol=0.0))
    assert res.max_mass_drift <= 1e-10 * (1 + abs(state.initial_mass))


def test_equilibrium_is_discrete_stationary_point():
    state = get_preset("exp1-left")[0].initial_state(100)
    cfg = SchemeConfig(N=100)
    res = run(state, cfg)
    assert res.reason is StopReason.EQUILIBRIUM
    again = step(res.final, cfg)
    assert np.max(np.abs(again.values - res.final.values)) <= cfg.equilibrium_tol * res.dt


def test_reflection_equivariance():
    state = get_preset("fig11")[0].initial_state(160)
    mirrored = GridState.from_values(state.values[::-1], state.params)
    cfg = SchemeConfig(N=160, t_end=3000 * default_dt(state.dx, 8.0), equilibrium_tol=0.0)
    a, b = run(state, cfg).final.values, run(mirrored, cfg).final.values
    assert np.array_equal(a, b[::-1])


def test_nonlocal_term_is_reflection_invariant():
    u = np.random.default_rng(5).normal(size=257)
    p = ModelParams(1.0, 0.0, 1.0)
    assert nonlocal_term(GridState.from_values(u, p)) == nonlocal_term(GridState.from_values(u[::-1], p))


@pytest.mark.parametrize("factor,grows", [(0.8, False), (1.25, True)])
def test_linear_stability_of_constant_state(factor, grows):
    L, M, N = 1.7, 0.2, 200
    lam = factor * bifurcation_lambda(1, L, M)
    p = ModelParams(L, M, lam)
    state = preset_initial("cosine_perturbation", p, N, amplitude=1e-6)
    x = state.x
    mode = np.cos(np.pi * x / L)

    def amplitude(s):
        return discrete_mass((s.values - M) * mode, s.dx)

    cfg = SchemeConfig(N=N)
    after = state
    for _ in range(50):
        after = step(after, cfg)
    assert (amplitude(after) > amplitude(state)) == grows


def test_time_step_cap_and_nonfinite():
    p = ModelParams(1.0, 0.2, 1e6)
    state = preset_initial("cosine_perturbation", p, 10, amplitude=0.3)
    with pytest.raises(ValueError):
        SchemeConfig(N=10, dt=0.6 * state.dx**2).time_step(state.dx, p.lam)
    cfg = SchemeConfig(N=10, dt=0.5 * state.dx**2, t_end=1.0)
    with pytest.raises(NonFinite):
        run(state, cfg)
    res = run(state, cfg, raise_on_nonfinite=False)
    assert res.reason is StopReason.NONFINITE


def test_history_snapshots():
    state = get_preset("exp1-left")[0].initial_state(50)
    dt = default_dt(state.dx, 4.0)
    res = run(state, SchemeConfig(N=50, t_end=100 * dt, equilibrium_tol=0.0, history_every=25))
    assert [round(t / dt) for t, _ in res.history] == [0, 25, 50, 75, 100]


def test_grid_state_validation():
    with pytest.raises(ValueError):
        GridState(np.zeros(3), 0.5, 0.0, LEFT)
    with pytest.raises(ValueError):
        GridState(np.zeros(11), 0.1, 0.0, LEFT)
    with pytest.raises(NonFinite):
        GridState.from_values(np.array([0.0, 1.0, np.nan, 0.0, 0.0]), LEFT)
    with pytest.raises(ValueError):
        preset_initial("triangle", LEFT, 10)


def test_preset_initial_masses():
    for name, runs in PRESETS.items():
        for spec in runs:
            assert abs(spec.initial_state().mass - spec.params.M) <= 1e-3, (name, spec.label)


def test_interface_counting_and_slope():
    p = ModelParams(1.0, 0.0, 1.0)
    x = np.linspace(0, 1, 201)
    one = GridState.from_values(np.tanh(200 * (x - 0.5)), p)
    two = GridState.from_values(np.tanh(200 * (x - 0.25)) - np.tanh(200 * (x - 0.75)) - 1, p)
    smooth = GridState.from_values(np.cos(np.pi * x), p)
    assert count_interfaces(one) == 1 and count_interfaces(two) == 2 and count_interfaces(smooth) == 0
    assert max_slope(smooth) == pytest.approx(np.pi, rel=1e-3)
