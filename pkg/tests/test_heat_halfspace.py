import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prandtl_lab.errors import ResolutionError
from prandtl_lab.heat_halfspace import (
    apply_kernel,
    base_flow_derivatives,
    evolve_mode_k,
    growth_table,
    interp_matrix,
    kernel,
    kernel_operator,
    manufactured_errors,
    simpson_weights,
    solve_duhamel,
)

pos = st.floats(0.01, 5.0)


@settings(max_examples=50)
@given(st.floats(0.01, 2.0), pos, pos)
def test_kernel_identities(t, y, z):
    assert kernel(t, y, z) == pytest.approx(kernel(t, z, y), rel=1e-12)
    assert kernel(t, y, z) > 0
    assert kernel(t, 0.0, z) == 0.0


def test_kernel_requires_positive_time():
    with pytest.raises(ValueError):
        kernel(0.0, 1.0, 1.0)


def test_simpson_weights_exact_on_cubics():
    for n in (9, 10):
        y = np.linspace(0, 2, n)
        w = simpson_weights(n, y[1] - y[0])
        assert abs(w @ y**3 - 4.0) < (1e-13 if n % 2 else 2e-2)


def test_interp_matrix_odd_reflection():
    y = np.linspace(0, 4, 81)
    pts = np.array([-1.234, 0.517, 2.02, 5.0])
    vals = interp_matrix(y, pts) @ (y**3 - y)
    np.testing.assert_allclose(vals[:3], pts[:3] ** 3 - pts[:3], atol=1e-12)
    assert vals[3] == 0.0


def test_uniform_grid_required():
    with pytest.raises(ValueError):
        kernel_operator(0.1, np.array([0.0, 0.1, 0.3, 0.4]))


@pytest.mark.parametrize("t", [1e-4, 0.05, 0.7])
def test_kernel_operator_on_sine(t):
    y = np.arange(0, 24.0001, 0.01)
    yo = np.linspace(0.0, 10.0, 201)
    out = apply_kernel(t, y, np.sin(y), yo)
    assert np.max(np.abs(out - np.exp(-t) * np.sin(yo))) < 1e-9


def test_semigroup():
    y = np.arange(0, 20.0001, 0.02)
    f = y * np.exp(-((y - 2) ** 2))
    yo = np.linspace(0, 6, 61)
    two = kernel_operator(0.2, y, yo) @ (kernel_operator(0.3, y) @ f)
    one = kernel_operator(0.5, y, yo) @ f
    assert np.max(np.abs(two - one)) < 1e-9


def test_positivity_preserved():
    y = np.arange(0, 10.0001, 0.02)
    f = np.exp(-((y - 3) ** 2) * 10)
    out = kernel_operator(0.3, y) @ f
    assert out.min() > -1e-14


def test_manufactured_solutions():
    free, forced = manufactured_errors()
    assert free < 1e-12
    assert forced < 1e-10


def test_sigma_quadrature_check():
    y = np.arange(0, 24.0001, 0.05)
    with pytest.raises(ResolutionError):
        solve_duhamel(0 * y, np.sin(y), 1.0, y, n_sigma=1, check=True, tol=1e-12)


def test_time_dependent_forcing():
    # u = t sin y solves u_t - u_yy = (1 + t) sin y
    y = np.arange(0, 24.0001, 0.01)
    yo = np.linspace(0, 10, 101)
    ts = np.linspace(0, 1, 401)
    F = (1 + ts)[:, None] * np.sin(y)[None, :]
    u = solve_duhamel(0 * y, F, 1.0, y, yo)
    assert np.max(np.abs(u - np.sin(yo))) < 1e-5


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_base_flow_derivatives_closed_form(flow, n):
    y = np.linspace(0.0, 5.0, 41)
    for t in (0.001, 0.03, 0.4):
        np.testing.assert_allclose(base_flow_derivatives(flow, t, y, n), flow.heat(t, y, n), atol=1e-12)


def test_mode_zero_is_pure_heat(flow):
    y = np.arange(0, 24.0001, 0.02)
    st_ = evolve_mode_k(np.sin(y), 0, flow, 0.5, 50, y, renormalize=False)
    sel = y < 10
    assert np.max(np.abs(st_.U[sel] - np.exp(-0.5) * np.sin(y[sel]))) < 2e-7


def test_renormalization_is_transparent(flow):
    y = np.arange(0, 6.0001, 0.02)
    U0 = np.exp(-((y - 1) ** 2)) * y
    a = evolve_mode_k(U0, 20, flow, 0.2, 40, y, renormalize=True)
    b = evolve_mode_k(U0, 20, flow, 0.2, 40, y, renormalize=False)
    np.testing.assert_allclose(a.U, b.U, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(a.log_norms, b.log_norms, atol=1e-12)


def test_negative_k_rejected(flow):
    y = np.linspace(0, 1, 11)
    with pytest.raises(ValueError):
        evolve_mode_k(y, -1, flow, 0.1, 1, y)


def test_growth_table_shape(flow):
    tab = growth_table((2, 4, 8), (0.1, 0.2), flow, L=4.0, h=0.1, dt=0.01)
    assert tab.log_growth.shape == (3, 2)
    assert np.all((0 <= tab.r_squared) & (tab.r_squared <= 1))
    assert np.all(tab.log_growth <= tab.rho * tab.k_list[:, None] * tab.times[None, :] + 1e-12)
