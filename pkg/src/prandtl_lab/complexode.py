"""Backward shooting for the reduced complex ODE and Newton search for tau.

The ODE is

    i (tau - z^2) X'' - 6 i z X' + ((tau - z^2)^2 - 6 i) X = 0,

integrated from ``z0`` down to 0 starting on the branch that decays like
``z^p exp(-LAMBDA z^2 / 2)``.  The Evans mismatch is ``G(tau) = X'(0)``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, SingularCoefficientError

LAMBDA = (1 - 1j) / np.sqrt(2.0)

OVERFLOW = 1e300


@dataclass(frozen=True)
class ShootingTrajectory:
    """Solution of the reduced ODE on ``z0 = z_nodes[0] > ... > z_nodes[-1] = 0``."""

    tau: complex
    z_nodes: np.ndarray
    X: np.ndarray
    dX: np.ndarray
    normalization: str = "X(z0)=1"

    @property
    def z0(self):
        return float(self.z_nodes[0])

    @property
    def steps(self):
        return len(self.z_nodes) - 1


@dataclass(frozen=True)
class TauRoot:
    """Converged zero of the Evans mismatch."""

    tau: complex
    residual: float
    iterations: int
    z0: float
    steps: int
    tol: float = 0.0
    trace: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not self.tau.imag < 0:
            raise ValueError("root must lie in the lower half-plane")


@dataclass(frozen=True)
class IntegralReport:
    """Quadrature of ``X`` over the shooting nodes."""

    value: complex
    modulus: float
    floor: float
    alarm: bool


def seed_asymptotic(tau, z0):
    """Unit-normalized seed ``(X, X')`` of the decaying branch at ``z0``.

    Returns ``X = 1`` and the logarithmic derivative of
    ``z^p exp(-LAMBDA z^2 / 2)`` with ``p = -i tau / (2 LAMBDA) - 7/2``.
    """
    if not z0 > 0:
        raise ValueError("z0 must be positive")
    tau = np.asarray(tau, dtype=complex)
    p = -1j * tau / (2 * LAMBDA) - 3.5
    dX = -LAMBDA * z0 + p / z0
    return np.ones_like(tau), dX


def second_derivative(tau, z, X, dX):
    """``X''`` from the ODE."""
    q = tau - z * z
    return (6j * z * dX - (q * q - 6j) * X) / (1j * q)


def third_derivative(tau, z, X, dX, d2X):
    """``X'''`` from the differentiated ODE."""
    q = tau - z * z
    return (8j * z * d2X + 6j * dX + 4 * z * q * X - (q * q - 6j) * dX) / (1j * q)


def _check_path(tau, z0):
    tau = complex(tau)
    if tau.imag == 0.0 and 0.0 <= tau.real <= z0 * z0:
        zc = np.sqrt(tau.real)
        raise SingularCoefficientError(
            f"tau - z^2 vanishes at z = {zc:.6g} on the path", z=float(zc), tau=str(tau)
        )


def _rk4(tau, z0, steps, X, dX, store=False, strict=True):
    """Classic RK4 from ``z0`` to 0; vectorized over ``tau``."""
    h = -z0 / steps

    def f(z, x, dx):
        return dx, second_derivative(tau, z, x, dx)

    if store:
        Xs = np.empty(steps + 1, dtype=complex)
        dXs = np.empty(steps + 1, dtype=complex)
        Xs[0], dXs[0] = X, dX
    for n in range(steps):
        z = z0 + n * h
        k1 = f(z, X, dX)
        k2 = f(z + h / 2, X + h / 2 * k1[0], dX + h / 2 * k1[1])
        k3 = f(z + h / 2, X + h / 2 * k2[0], dX + h / 2 * k2[1])
        k4 = f(z + h, X + h * k3[0], dX + h * k3[1])
        X = X + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dX = dX + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if store:
            Xs[n + 1], dXs[n + 1] = X, dX
        if strict and n % 50 == 49 and not (np.all(np.isfinite(X)) and np.max(np.abs(X)) < OVERFLOW):
            raise OverflowError(f"|X| exceeded {OVERFLOW:g} near z = {z + h:.4g}")
    if strict and not (np.all(np.isfinite(X)) and np.max(np.abs(X)) < OVERFLOW):
        raise OverflowError(f"|X| exceeded {OVERFLOW:g}")
    if store:
        return Xs, dXs
    return X, dX


def integrate_backward(tau, z0=6.0, steps=6000, seed=None):
    """Integrate from ``z0`` down to 0 with ``steps`` fixed RK4 steps.

    Parameters
    ----------
    tau : complex
    z0 : float
        Seeding abscissa; should be at least 4.
    steps : int
        Number of RK4 steps (>= 1000).
    seed : tuple of complex, optional
        Override ``(X, X')`` at ``z0``; defaults to :func:`seed_asymptotic`.

    Raises
    ------
    SingularCoefficientError
        If ``tau = z^2`` for some ``z`` in ``[0, z0]``.
    OverflowError
        If ``|X|`` exceeds 1e300.
    """
    if steps < 1000:
        raise ValueError("steps must be at least 1000")
    tau = complex(tau)
    _check_path(tau, z0)
    X0, dX0 = seed if seed is not None else seed_asymptotic(tau, z0)
    X, dX = _rk4(tau, z0, steps, complex(X0), complex(dX0), store=True)
    z = z0 - z0 * np.arange(steps + 1) / steps
    return ShootingTrajectory(tau, z, X, dX)


def evans_mismatch(tau, z0=6.0, steps=6000):
    """``G(tau) = X'(0)`` for the unit-normalized decaying branch."""
    tau = complex(tau)
    _check_path(tau, z0)
    X0, dX0 = seed_asymptotic(tau, z0)
    return complex(_rk4(tau, z0, steps, complex(X0), complex(dX0))[1])


def mismatch_field(taus, z0=6.0, steps=6000):
    """Vectorized ``|G|`` over an array of ``tau``; singular or overflowing entries give ``inf``."""
    taus = np.asarray(taus, dtype=complex)
    X0, dX0 = seed_asymptotic(taus, z0)
    with np.errstate(all="ignore"):
        _, G = _rk4(taus, z0, steps, X0, dX0, strict=False)
        out = np.abs(G)
    out[~np.isfinite(out)] = np.inf
    return out


def scan_lattice(re_range, im_range, n):
    """``n x n`` lattice of ``tau`` values (row index = real part)."""
    re = np.linspace(re_range[0], re_range[1], n)
    im = np.linspace(im_range[0], im_range[1], n)
    return re[:, None] + 1j * im[None, :]


def grid_scan(re_range=(-2.0, 0.0), im_range=(-2.0, 0.0), n=20, z0=6.0, steps=6000):
    """Lattice point minimizing ``|G|``; a coarse starting guess for Newton."""
    lattice = scan_lattice(re_range, im_range, n)
    mags = mismatch_field(lattice, z0, steps)
    return complex(lattice.flat[np.argmin(mags)])


def newton_tau(tau0, tol=1e-10, maxit=30, z0=6.0, steps=6000, scale=None):
    """Complex Newton iteration on ``G``.

    The derivative is a central difference along the real axis with step
    ``1e-6 (1 + |tau|)``; holomorphy makes one direction enough.  Iteration
    stops when ``|G| <= tol * scale`` where ``scale`` defaults to
    ``|G(tau0)|``.

    Raises
    ------
    ConvergenceError
        After ``maxit`` iterations, or if an iterate leaves ``Im tau < 0``.
    """
    tau = complex(tau0)
    if not tau.imag < 0:
        raise ValueError("tau0 must lie in the open lower half-plane")
    g = evans_mismatch(tau, z0, steps)
    if scale is None:
        scale = abs(g)
    target = tol * scale
    trace = [(tau, abs(g))]
    for it in range(maxit + 1):
        if abs(g) <= target:
            return TauRoot(tau, abs(g), it, z0, steps, target, tuple(trace))
        if it == maxit:
            break
        h = 1e-6 * (1 + abs(tau))
        dg = (evans_mismatch(tau + h, z0, steps) - evans_mismatch(tau - h, z0, steps)) / (2 * h)
        tau = tau - g / dg
        if not tau.imag < 0 or not np.isfinite(tau):
            raise ConvergenceError("Newton iterate left the lower half-plane", tau=str(tau), trace=_fmt(trace))
        try:
            g = evans_mismatch(tau, z0, steps)
        except (OverflowError, SingularCoefficientError) as exc:
            raise ConvergenceError(f"Newton iterate invalid: {exc}", tau=str(tau), trace=_fmt(trace)) from exc
        trace.append((tau, abs(g)))
    raise ConvergenceError(
        f"no convergence in {maxit} iterations (|G| = {abs(g):.3e}, target {target:.3e})",
        tau=str(tau),
        trace=_fmt(trace),
    )


def _fmt(trace):
    return [(str(t), float(r)) for t, r in trace]


def find_tau(re_range=(-2.0, 0.0), im_range=(-2.0, 0.0), n=20, tol=1e-10, maxit=30, z0=6.0, steps=6000):
    """Scan then Newton, with the scan minimum's ``|G|`` as the tolerance scale."""
    lattice = scan_lattice(re_range, im_range, n)
    mags = mismatch_field(lattice, z0, steps)
    i = np.argmin(mags)
    return newton_tau(lattice.flat[i], tol, maxit, z0, steps, scale=float(mags.flat[i]))


@lru_cache(maxsize=8)
def default_root(z0=6.0, steps=6000):
    """Cached root from the default pipeline."""
    return find_tau(z0=z0, steps=steps)


def integral_X(traj, floor=1e-3, method="simpson"):
    """Quadrature of ``X`` from 0 to ``z0``.

    ``alarm`` is set when ``|value| <= floor * max|X| * z0``.
    """
    z = traj.z_nodes[::-1]
    X = traj.X[::-1]
    if method == "simpson":
        value = integrate.simpson(X.real, x=z) + 1j * integrate.simpson(X.imag, x=z)
    elif method == "trapezoid":
        value = complex(np.trapezoid(X, z))
    else:
        raise ValueError(f"unknown method {method!r}")
    bound = floor * float(np.max(np.abs(X), initial=0.0)) * traj.z0
    return IntegralReport(complex(value), abs(value), bound, not abs(value) > bound)
