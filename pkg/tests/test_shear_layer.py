import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prandtl_lab.errors import SCViolation
from prandtl_lab.shear_layer import (
    build_heteroclinic,
    decay_rate,
    layer_residual,
    normalize_profile,
    rescale_physical,
)

curvatures = st.one_of(st.floats(-8.0, -0.1), st.floats(0.1, 8.0))


def test_jump_conditions(profile, root):
    jv, jd1, jd2 = profile.jumps
    assert abs(jv + root.tau) < 1e-6
    assert abs(jd1) < 1e-6
    assert abs(jd2 - 2.0) < 1e-6


def test_heteroclinic_limits(heteroclinic):
    W = heteroclinic.W
    z = heteroclinic.z_nodes
    assert abs(W[np.argmin(np.abs(z))] - 0.5) < 1e-12
    assert abs(W[0]) < 1e-8
    assert abs(W[-1] - 1.0) < 1e-8
    assert heteroclinic.continuity_mismatch < 1e-10


def test_gaussian_decay_of_X(traj):
    fit = decay_rate(traj.z_nodes, traj.X)
    assert fit.rate >= 0.2
    # |X| ~ exp(-z^2 / (2 sqrt 2)) at the root, so the fitted rate sits near 0.354 plus a log correction
    assert 0.3 < fit.rate < 0.6
    assert not fit.poor


def test_decay_rate_of_pure_gaussian():
    z = np.linspace(0, 8, 400)
    fit = decay_rate(z, 3.0 * np.exp(-0.7 * z**2))
    assert fit.rate == pytest.approx(0.7, rel=1e-10)
    assert fit.rms_residual < 1e-10


def test_decay_rate_errors():
    z = np.linspace(0, 8, 400)
    with pytest.raises(ValueError, match="floor"):
        decay_rate(z, np.zeros_like(z))
    with pytest.raises(ValueError, match="20"):
        decay_rate(z[:10], np.exp(-z[:10] ** 2), zmin=0.0)


def test_layer_ode_normalized(profile):
    z = np.concatenate([np.linspace(-5, -0.05, 60), np.linspace(0.05, 5, 60)])
    r = layer_residual(profile, z)
    assert np.max(np.abs(r)) < 1e-8


@settings(max_examples=15, deadline=None)
@given(curvatures)
def test_layer_ode_any_curvature(profile, c):
    Vp = rescale_physical(profile, profile.tau, c)
    assert Vp.tau.imag < 0
    z = np.linspace(0.05, 4, 40) * Vp.scale_z
    z = np.concatenate([-z, z])
    r = layer_residual(Vp, z)
    scale = np.max(np.abs(Vp.evaluate(z, 1))) * (abs(Vp.tau) + abs(c) * np.max(z) ** 2)
    assert np.max(np.abs(r)) < 1e-9 * scale


@settings(max_examples=15, deadline=None)
@given(curvatures)
def test_rescale_roundtrip(profile, c):
    back = normalize_profile(rescale_physical(profile, profile.tau, c))
    np.testing.assert_allclose(back.V, profile.V, rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(back.z_nodes, profile.z_nodes, rtol=1e-13)
    assert abs(back.tau - profile.tau) < 1e-13
    for a, b in zip(back.jumps, profile.jumps):
        assert abs(a - b) < 1e-12


def test_rescale_frozen_example(profile):
    c = -4 * np.sqrt(2) * np.exp(-0.5)
    Vp = rescale_physical(profile, profile.tau, c)
    assert Vp.tau == pytest.approx(-0.92615 - 0.92615j, abs=1e-4)
    assert Vp.jumps[0] == pytest.approx(-Vp.tau, abs=1e-6)


def test_positive_curvature_conjugates(profile):
    Vp = rescale_physical(profile, profile.tau, 2.0)
    assert Vp.conjugated
    assert Vp.tau == pytest.approx(-np.conj(profile.tau), abs=1e-14)


def test_rescale_rejects_degenerate(profile):
    with pytest.raises(ValueError):
        rescale_physical(profile, profile.tau, 0.0)


def test_sc_alarm(root, traj):
    with pytest.raises(SCViolation) as info:
        build_heteroclinic(root, traj, floor=0.9)
    assert info.value.record["kind"] == "SCViolation"


def test_tau_mismatch_rejected(root, traj):
    other = dataclasses.replace(traj, tau=traj.tau + 1e-3)
    with pytest.raises(ValueError, match="disagree"):
        build_heteroclinic(root, other)
