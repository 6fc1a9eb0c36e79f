import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prandtl_lab.baseflow import quadratic_flow
from prandtl_lab.errors import ConvergenceError, ResolutionError
from prandtl_lab.prandtl_sim import (
    ModeState,
    SimConfig,
    assemble,
    build_grid,
    cn_step,
    evolve,
    extract_mode,
    random_state,
    run_k,
    seed_for,
    sweep_k,
)


@pytest.fixture(scope="module")
def small(flow):
    grid = build_grid(1000, 10.0, flow.a, (2 / 1e4) ** 0.25 / abs(flow.curvature) ** 0.25)
    return grid, assemble(grid, flow, 1e-4)


def test_grid_properties(flow):
    w = 0.02
    g = build_grid(4000, 10.0, flow.a, w)
    dy = g.spacing
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 10.0
    assert np.all(dy > 0)
    assert dy.min() <= w / 16
    assert g.map_params["max_ratio"] <= 1.05
    frac = np.mean(np.abs(g.nodes - flow.a) <= 10 * w)
    assert frac == pytest.approx(0.4, abs=2e-3)


def test_grid_uniform_for_wide_layer(flow):
    g = build_grid(1000, 10.0, flow.a, 10.0)
    assert g.map_params["amplitude"] == 0.0
    np.testing.assert_allclose(g.spacing, 0.01, rtol=1e-9)


def test_grid_resolution_error(flow):
    with pytest.raises(ResolutionError):
        build_grid(500, 10.0, flow.a, 1e-5)


@pytest.mark.parametrize("args", [(100, 10.0, 0.7, 0.1), (1000, 5.0, 0.7, 0.1), (1000, 10.0, 12.0, 0.1)])
def test_grid_validation(args):
    with pytest.raises(ValueError):
        build_grid(*args)


def test_boundary_rows(small):
    grid, ops = small
    n = ops.n
    assert set(ops.bc_rows) == {0, 1, 2, n - 2, n - 1}
    y = grid.nodes
    cols, vals = ops.bc_rows[1]
    assert abs(vals @ (y[cols] ** 2 + 3 * y[cols])) == pytest.approx(3.0, rel=1e-9)


def _step(ops, V):
    return cn_step(ModeState(1e-4, 0.0, V), ops, 0.5).amplitude()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_cn_homogeneity(small, seed, c):
    grid, ops = small
    V = random_state(grid, 1e-4, seed).V
    ref = c * _step(ops, V)
    assert np.max(np.abs(_step(ops, c * V) - ref)) <= 1e-12 * np.max(np.abs(ref))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 2**31), st.complex_numbers(max_magnitude=5.0))
def test_cn_additivity(small, s1, s2, c):
    grid, ops = small
    a = random_state(grid, 1e-4, s1).V
    b = random_state(grid, 1e-4, s2).V
    sa, sb = _step(ops, a), _step(ops, b)
    err = np.max(np.abs(_step(ops, a + c * b) - sa - c * sb))
    assert err <= 1e-12 * (np.max(np.abs(sa)) + abs(c) * np.max(np.abs(sb)))


def test_refinement_improves_accuracy(small):
    grid, ops = small
    V = random_state(grid, 1e-4, 11).V
    plain = cn_step(ModeState(1e-4, 0.0, V), ops, 0.5, renormalize=False, refine=0).V
    fine = cn_step(ModeState(1e-4, 0.0, V), ops, 0.5, renormalize=False, refine=4).V
    refined = cn_step(ModeState(1e-4, 0.0, V), ops, 0.5, renormalize=False).V
    scale = np.max(np.abs(fine))
    assert np.max(np.abs(refined - fine)) < 1e-3 * max(np.max(np.abs(plain - fine)), 1e-16 * scale) + 1e-13 * scale


def test_uniform_second_difference_exact_on_quadratics(flow):
    g = build_grid(1000, 10.0, flow.a, 10.0)
    ops = assemble(g, quadratic_flow(-2.0, 2.0), 1e-3)
    y = g.nodes
    from prandtl_lab.fd import banded_matvec

    d2 = banded_matvec(ops.M, 2, 2, (y**2).astype(complex))
    np.testing.assert_allclose(d2[1:-1].real, 2.0, atol=1e-8)


@pytest.mark.parametrize("width, tol", [(10.0, 1e-2), (0.5, 1e-2)])
def test_fourth_difference_on_quartic(flow, width, tol):
    # remove the known U terms so that only eps D4 remains
    from prandtl_lab.fd import banded_matvec

    g = build_grid(1000, 10.0, flow.a, width)
    q = quadratic_flow(1e-3, 1.0)
    ops = assemble(g, q, 1.0, shift=0.0)
    y = g.nodes
    v = (y**4).astype(complex)
    d4 = banded_matvec(ops.A, 2, 2, v) - (-1j * q.U(y) * banded_matvec(ops.M, 2, 2, v) + 1j * q.d(y, 2) * v)
    assert np.max(np.abs(d4[3:-3] - 24.0)) < tol


def test_zero_state_stays_zero(small):
    grid, ops = small
    z = ModeState(1e-4, 0.0, np.zeros(ops.n, dtype=complex))
    out = cn_step(z, ops, 0.5)
    assert np.all(out.V == 0)


def test_boundary_conditions_hold_after_step(small):
    grid, ops = small
    s = cn_step(random_state(grid, 1e-4, 3), ops, 0.5)
    assert s.V[0] == 0
    for r, (cols, vals) in ops.bc_rows.items():
        assert abs(vals @ s.V[cols]) < 1e-12 * np.max(np.abs(vals))


def test_renormalization_keeps_amplitude(small):
    grid, ops = small
    s = random_state(grid, 1e-4, 5)
    a = cn_step(s, ops, 0.5, renormalize=True)
    b = cn_step(s, ops, 0.5, renormalize=False)
    np.testing.assert_allclose(a.amplitude(), b.amplitude(), rtol=1e-13, atol=1e-15)
    assert np.max(np.abs(a.V)) == pytest.approx(1.0)


def test_rejects_nonpositive_step(small):
    grid, ops = small
    with pytest.raises(ValueError):
        cn_step(random_state(grid, 1e-4, 0), ops, 0.0)


def test_quadratic_flow_neutral_without_viscosity_loss():
    # U = 1 - (y - a)^2 is Rayleigh-stable inviscidly; the mode must not blow up
    f = quadratic_flow(-2.0, 2.0)
    grid = build_grid(600, 8.0, 2.0, 1.0)
    ops = assemble(grid, f, 1e-2)
    s, est = evolve(random_state(grid, 1e-2, 0), ops, 0.2, 200)
    assert s.log_amp < 5.0


def test_seed_for_is_deterministic():
    assert seed_for(7, 1000) == 7 ^ 1000
    assert seed_for(0, 1000) != seed_for(0, 10000)


def test_run_k_deterministic():
    cfg = SimConfig(N=1000)
    a = run_k(1000, cfg)
    b = run_k(1000, cfg)
    assert a.omega == b.omega


def test_run_k_growth_rate():
    row = run_k(1000, SimConfig())
    assert row.converged
    assert row.omega.imag < 0
    assert abs(row.rescaled - (-0.81607 - 0.56429j)) < 5e-4


def test_sweep_order_and_parallel_equivalence():
    cfg = SimConfig(N=1000)
    serial = sweep_k([1000, 2000], cfg, threads=1)
    parallel = sweep_k([1000, 2000], cfg, threads=2)
    assert [r.k for r in serial] == [1000, 2000]
    assert [r.omega for r in serial] == [r.omega for r in parallel]


def test_sweep_requires_sorted_k():
    with pytest.raises(ValueError):
        sweep_k([2000, 1000])


def test_strict_estimator_raises(small):
    grid, ops = small
    with pytest.raises(ConvergenceError):
        evolve(random_state(grid, 1e-4, 0), ops, 0.5, 3, tol=1e-12, strict=True)


def test_extract_mode_normalization(small):
    grid, ops = small
    s, _ = evolve(random_state(grid, 1e-4, 0), ops, 0.5, 50)
    m = extract_mode(s)
    assert abs(np.mean(m[int(0.9 * len(m)) :]) - 1.0) < 1e-12


def test_seed_independence():
    cfg = SimConfig(N=1000)
    a = run_k(1000, cfg)
    b = run_k(1000, SimConfig(N=1000, base_seed=17))
    assert abs(a.omega - b.omega) < 1e-3 * abs(a.omega.imag)


def test_growth_law_matches_log_amplitude():
    from prandtl_lab.prandtl_sim import growth_fit

    row, state, ops, est = run_k(1000, SimConfig(N=1000), return_state=True)
    rate = growth_fit(est)
    assert rate == pytest.approx(-row.omega.imag, rel=0.01)


def test_k_equal_one_row_is_finite():
    row = sweep_k([1], SimConfig(N=1000))[0]
    assert row.error == ""
    assert np.isfinite(row.omega)


def test_time_step_second_order():
    # finer triples hit the estimator's spread floor (about 1e-7 in omega)
    w = [run_k(1000, SimConfig(N=1000, steps_per_efold=s)).omega for s in (25, 50, 100)]
    ratio = abs(w[0] - w[1]) / abs(w[1] - w[2])
    assert 3.0 <= ratio <= 6.0
