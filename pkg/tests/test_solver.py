import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from resonantcl import kernels
from resonantcl.errors import ConfigurationError, DivergenceError, ResolutionError, StepError
from resonantcl.fields import Block, Grid2D, PiecewiseConstantCoeff, ScalarField2D, rasterize
from resonantcl.flux import FluxModel, make_flux
from resonantcl.solver import (SolverConfig, SolverRun, advance_to, face_coefficients, run_to_end,
                               stable_timestep, step, timestep_bound)

GRID = Grid2D.square(-1.0, 1.0, 12)
RESONANT = make_flux("resonant")
states = arrays(np.float64, (12, 12), elements=st.floats(0.0, 1.0))
coeffs = arrays(np.float64, (12, 12), elements=st.floats(0.5, 1.5))


def direct_run(u, k, l, model=RESONANT, eps=0.01, backend=""):
    cfg = SolverConfig.balanced(eps, 1.0, t_end=1.0)
    w = lambda v: ScalarField2D(GRID, v)  # noqa: E731
    return SolverRun(config=cfg, model=model, k_delta=w(k), l_delta=w(l), u=w(u), backend=backend)


def one_step(u, k, l, model=RESONANT, eps=0.01):
    run = direct_run(u, k, l, model, eps)
    step(run, stable_timestep(run))
    return run


@settings(max_examples=80, deadline=None)
@given(u=states, k=coeffs, l=coeffs, eps=st.floats(1e-4, 0.1))
def test_step_keeps_invariant_region(u, k, l, eps):
    new = one_step(u, k, l, eps=eps).u.values
    assert new.min() >= -1e-12 and new.max() <= 1.0 + 1e-12


@settings(max_examples=80, deadline=None)
@given(u=states, v=states, k=coeffs, l=coeffs)
def test_step_is_l1_contractive(u, v, k, l):
    du = one_step(u, k, l).u.values - one_step(v, k, l).u.values
    assert np.abs(du).sum() <= np.abs(u - v).sum() * (1 + 1e-12) + 1e-12


@settings(max_examples=60, deadline=None)
@given(u=states, bump=states, k=coeffs, l=coeffs)
def test_step_is_order_preserving(u, bump, k, l):
    v = np.minimum(u + bump, 1.0)
    diff = one_step(v, k, l).u.values - one_step(u, k, l).u.values
    assert diff.min() >= -1e-13


@settings(max_examples=40, deadline=None)
@given(u=states, k=coeffs, l=coeffs)
def test_mass_bookkeeping(u, k, l):
    run = direct_run(u, k, l)
    m0 = run.mass()
    step(run, stable_timestep(run))
    assert run.mass() + run.outflow == pytest.approx(m0, abs=1e-13)


def test_far_field_state_is_stationary():
    rng = np.random.default_rng(0)
    k, l = rng.uniform(0.5, 1.5, (2, 12, 12))
    run = direct_run(np.zeros((12, 12)), k, l)
    advance_to(run, 0.3)
    assert np.all(run.u.values == 0.0)


@pytest.mark.skipif(not kernels.HAVE_COMPILED, reason="compiled kernel not built")
def test_compiled_matches_python():
    rng = np.random.default_rng(1)
    u, k, l = rng.random((12, 12)), rng.uniform(0.5, 1.5, (12, 12)), rng.uniform(0.5, 1.5, (12, 12))
    a = direct_run(u, k, l, backend="compiled")
    b = direct_run(u, k, l, backend="python")
    for _ in range(5):
        dt = stable_timestep(a)
        step(a, dt)
        step(b, dt)
    np.testing.assert_allclose(a.u.values, b.u.values, rtol=0, atol=1e-14)
    assert a.outflow == pytest.approx(b.outflow, abs=1e-15)


def test_generic_kernel_matches_polynomial_kernel():
    rng = np.random.default_rng(2)
    u = rng.random((12, 12))
    kx, ly = rng.uniform(0.5, 1.5, (13, 12)), rng.uniform(0.5, 1.5, (12, 13))
    ax, ay = RESONANT.max_speed_f(kx), RESONANT.max_speed_g(ly)
    pf, pg = (np.array(c) for c in RESONANT.poly)
    args = (0.0, 0.01, 1 / 6, 0.003)
    new_p, out_p = kernels.llf_step_py(u, kx, ly, ax, ay, pf, pg, *args)
    new_g, out_g = kernels.llf_step_generic(u, RESONANT, kx, ly, ax, ay, *args)
    np.testing.assert_allclose(new_g, new_p, rtol=0, atol=1e-15)
    assert out_g == pytest.approx(out_p, abs=1e-16)


def test_generic_backend_is_used_without_polynomials():
    m = make_flux("sine")
    run = direct_run(np.full((12, 12), 0.5), np.ones((12, 12)), np.ones((12, 12)), model=m)
    assert run.backend == "generic"
    step(run, stable_timestep(run))
    assert 0.0 <= run.u.values.min() and run.u.values.max() <= 1.0


def test_pure_environment_selects_fallback():
    code = "from resonantcl import kernels; print(kernels.BACKEND)"
    env = {**os.environ, "RESONANTCL_PURE": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"


def test_step_rejects_large_dt():
    run = direct_run(np.full((12, 12), 0.5), np.ones((12, 12)), np.ones((12, 12)))
    with pytest.raises(StepError):
        step(run, 1.01 * stable_timestep(run))
    with pytest.raises(StepError):
        step(run, 0.0)


def test_divergence_is_reported():
    m = RESONANT
    bad = FluxModel(lambda k, u: np.where(u > 0.5, np.nan, 0.0) + 0 * k, m.g, m.f_u, m.g_u,
                    m.f_k, m.g_l, m.state_bounds, m.coeff_bounds)
    u = np.zeros((12, 12))
    u[5, 5] = 1.0
    run = direct_run(u, np.ones((12, 12)), np.ones((12, 12)), model=bad)
    with pytest.raises(DivergenceError, match="non-finite"):
        step(run, stable_timestep(run))


def test_timestep_rules():
    combined = timestep_bound(1.0, 0.5, 0.01, 0.001, 0.9, "combined")
    minimum = timestep_bound(1.0, 0.5, 0.01, 0.001, 0.9, "min")
    assert combined == pytest.approx(0.9 / (150 + 40))
    assert minimum == pytest.approx(0.9 * min(0.01 / 1.5, 1e-4 / 0.004))
    assert combined <= minimum
    with pytest.raises(ConfigurationError):
        timestep_bound(0.0, 0.0, 0.01, 0.0)
    with pytest.raises(ConfigurationError):
        timestep_bound(1.0, 1.0, 0.01, 0.01, rule="bogus")


@pytest.mark.parametrize("kwargs", [
    dict(epsilon=0.01, delta=0.03, balance_C=2.0),
    dict(epsilon=0.01, delta=0.01, cfl_safety=1.5),
    dict(epsilon=0.01, delta=0.01, output_times=(0.5, 0.2)),
    dict(epsilon=0.01, delta=0.01, output_times=(2.0,)),
    dict(epsilon=-1.0, delta=-1.0),
    dict(epsilon=0.01, delta=0.01, timestep_rule="cfl"),
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        SolverConfig(**kwargs)


def test_face_coefficients():
    c = np.arange(12.0 * 12).reshape(12, 12)
    fx = face_coefficients(c, 0)
    assert fx.shape == (13, 12)
    np.testing.assert_array_equal(fx[1:-1], 0.5 * (c[1:] + c[:-1]))
    np.testing.assert_array_equal(fx[0], c[0])
    assert face_coefficients(c, 1).shape == (12, 13)


def scenario_fields(nx=64):
    g = Grid2D.square(-2.0, 2.0, nx)
    k = rasterize(PiecewiseConstantCoeff(1.0, (Block(-2.0, 0.0, -2.0, 2.0, 1.5),)), g)
    l = rasterize(PiecewiseConstantCoeff(1.0, (Block(-2.0, 2.0, 0.0, 2.0, 0.5),)), g)
    u0 = rasterize(PiecewiseConstantCoeff(0.0, (Block(-0.5, 0.5, -0.5, 0.5, 1.0),)), g)
    return k, l, u0


def test_from_fields_and_run_to_end():
    k, l, u0 = scenario_fields()
    cfg = SolverConfig.balanced(0.01, 20.0, t_end=0.2, output_times=(0.0, 0.1))
    run = run_to_end(SolverRun.from_fields(cfg, RESONANT, k, l, u0))
    assert run.t == 0.2
    assert sorted(run.snapshots) == [0.0, 0.1, 0.2]
    assert run.monitors.times[0] < run.monitors.times[1]  # the t = 0+ sample comes first
    assert run.monitors.times[-1] == 0.2
    assert 0.0 <= run.state_min and run.state_max <= 1.0
    assert run.flag() is None
    assert run.mass() + run.outflow == pytest.approx(run.initial_mass, abs=1e-12)


def test_advance_to_lands_exactly_and_refuses_backwards():
    k, l, u0 = scenario_fields()
    run = SolverRun.from_fields(SolverConfig.balanced(0.01, 20.0), RESONANT, k, l, u0)
    advance_to(run, 0.0123)
    assert run.t == 0.0123
    with pytest.raises(ValueError):
        advance_to(run, 0.01)


def test_from_fields_rejects_underresolved_delta():
    k, l, u0 = scenario_fields()
    with pytest.raises(ResolutionError):
        SolverRun.from_fields(SolverConfig.balanced(0.01, 10.0), RESONANT, k, l, u0)


def test_from_fields_rejects_coefficients_outside_box():
    k, l, u0 = scenario_fields()
    with pytest.raises(ValueError, match="coefficient box"):
        SolverRun.from_fields(SolverConfig.balanced(0.01, 20.0), RESONANT,
                              k.with_values(k.values * 2), l, u0)


def test_flag_when_support_reaches_frame():
    g = Grid2D.square(-2.0, 2.0, 64)
    k = ScalarField2D.constant(g, 1.0)
    u0 = rasterize(PiecewiseConstantCoeff(0.0, (Block(-2.0, 0.0, -0.5, 0.5, 1.0),)), g)
    run = SolverRun.from_fields(SolverConfig.balanced(0.01, 20.0, t_end=0.01), RESONANT, k, k, u0)
    run_to_end(run)
    assert "support margin" in run.flag()


def burgers_row_gap(eps, balance_C, t_end, nx=128):
    """L¹ gap, in units of h, between the central row and the 4x-resolution 1D oracle."""
    from oracles import burgers_1d_reference
    from resonantcl.scenarios import load_scenario

    sc = load_scenario("burgers_1d")
    g = sc.grid(nx)
    k, l, u0 = sc.fields(g)
    run = SolverRun.from_fields(SolverConfig.balanced(eps, balance_C, t_end=t_end), sc.model,
                                k, l, u0, track_psi=False)
    j = g.ny // 2
    ref = burgers_1d_reference(np.repeat(run.u.values[:, j], 4), g.h / 4, eps, t_end)
    advance_to(run, t_end)
    return float(np.abs(run.u.values[:, j] - ref.reshape(-1, 4).mean(axis=1)).sum())


def test_burgers_reduction_at_shipped_viscosity():
    assert burgers_row_gap(0.03125, 2.0, 0.5) <= 2.0


def test_burgers_reduction_at_small_viscosity():
    # eps = 0.005 lies below the scheme's numerical viscosity on this grid
    assert burgers_row_gap(0.005, 8.0, 0.5) <= 2.0
