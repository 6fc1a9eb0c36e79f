import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prandtl_lab.complexode import (
    LAMBDA,
    TauRoot,
    evans_mismatch,
    find_tau,
    grid_scan,
    integral_X,
    integrate_backward,
    mismatch_field,
    newton_tau,
    seed_asymptotic,
)
from prandtl_lab.errors import ConvergenceError, SingularCoefficientError

from conftest import TAU_EXACT

lower = st.builds(complex, st.floats(-2.0, 0.5), st.floats(-2.0, -0.2))


def test_root_matches_closed_form(root):
    assert abs(root.tau - TAU_EXACT) < 1e-8
    assert abs(root.tau.real - root.tau.imag) < 1e-10
    assert root.tau.imag < 0


def test_trajectory_matches_closed_form_shape(traj):
    # X = exp(-LAMBDA z^2 / 2) / (LAMBDA z^2 + 1)^2 at the exact root, up to a constant
    z = traj.z_nodes
    sel = z <= 4.0
    exact = np.exp(-LAMBDA * z[sel] ** 2 / 2) / (LAMBDA * z[sel] ** 2 + 1) ** 2
    X = traj.X[sel] / traj.X[-1]
    assert np.max(np.abs(X - exact)) < 2e-3


def test_rk4_richardson_ratio():
    tau = -2j
    g = [evans_mismatch(tau, 6.0, n) for n in (1000, 2000, 4000)]
    ratio = abs(g[0] - g[1]) / abs(g[1] - g[2])
    assert 12 <= ratio <= 20


def test_cauchy_riemann():
    tau = -0.5 - 0.9j
    h = 1e-5
    gx = (evans_mismatch(tau + h) - evans_mismatch(tau - h)) / (2 * h)
    gy = (evans_mismatch(tau + 1j * h) - evans_mismatch(tau - 1j * h)) / (2 * h)
    assert abs(gy - 1j * gx) < 1e-6 * abs(gx)


def test_root_independent_of_seed_abscissa(root):
    r8 = newton_tau(-0.75 - 0.65j, z0=8.0, steps=8000)
    assert abs(r8.tau - root.tau) < 1e-6


@settings(max_examples=20, deadline=None)
@given(lower, st.complex_numbers(min_magnitude=0.1, max_magnitude=10.0))
def test_trajectory_linear_in_seed(tau, c):
    X0, dX0 = seed_asymptotic(tau, 6.0)
    a = integrate_backward(tau, 6.0, 1000, seed=(X0, dX0))
    b = integrate_backward(tau, 6.0, 1000, seed=(c * X0, c * dX0))
    np.testing.assert_allclose(b.X, c * a.X, rtol=1e-12, atol=0)


@settings(max_examples=10, deadline=None)
@given(st.lists(lower, min_size=1, max_size=4))
def test_vectorized_field_matches_scalar(taus):
    field = mismatch_field(np.array(taus), 6.0, 1000)
    scalar = [abs(evans_mismatch(t, 6.0, 1000)) for t in taus]
    np.testing.assert_allclose(field, scalar, rtol=1e-12)


def test_scan_lands_near_root():
    guess = grid_scan(n=20)
    assert abs(guess - TAU_EXACT) < 0.15


def test_find_tau_pipeline():
    r = find_tau(n=10)
    assert abs(r.tau - TAU_EXACT) < 1e-8


def test_singular_path_rejected():
    with pytest.raises(SingularCoefficientError) as info:
        integrate_backward(4.0)
    assert info.value.record["z"] == pytest.approx(2.0)
    assert mismatch_field(np.array([4.0 + 0j]))[0] == np.inf


def test_unreachable_tolerance_reports_trace():
    with pytest.raises(ConvergenceError) as info:
        newton_tau(-0.7 - 0.7j, tol=1e-30, maxit=5)
    assert len(info.value.record["trace"]) == 6


def test_newton_rejects_upper_half_plane_start():
    with pytest.raises(ValueError):
        newton_tau(0.5 + 0.5j)


def test_root_type_requires_lower_half_plane():
    with pytest.raises(ValueError):
        TauRoot(0.1 + 0.1j, 0.0, 0, 6.0, 6000, 1e-10, ())


def test_too_few_steps_rejected():
    with pytest.raises(ValueError):
        integrate_backward(-1j, steps=999)


def test_integral_nonvanishing_at_root(traj):
    rep = integral_X(traj)
    assert not rep.alarm
    trap = integral_X(traj, method="trapezoid")
    assert abs(rep.value - trap.value) < 1e-6 * rep.modulus


def test_integral_alarm_with_strict_floor(traj):
    assert integral_X(traj, floor=0.9).alarm
