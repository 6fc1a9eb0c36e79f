"""Heteroclinic profile ``W`` and shear-layer corrector ``V``.

With ``X`` the decaying shooting solution and ``W_-(s) = int_s^inf X``,
the profile is built from the even reflection

    W(z) = 1 - P(z)  (z >= 0),    W(z) = P(-z)  (z < 0),    P = W_- / (2 W_-(0)),

and ``V = (tau - z^2) W - 1_{z>0} (tau - z^2)``, i.e. ``V(z) = -sgn(z) Q(|z|)``
with ``Q(s) = (tau - s^2) P(s)``.  Derivatives of ``Q`` up to order four are
closed-form in ``X, X'`` through the ODE, which gives the jump triple at 0
without one-sided differencing.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .complexode import LAMBDA, integral_X, second_derivative, third_derivative
from .errors import SCViolation


@dataclass(frozen=True)
class _Branch:
    """Closed-form data of ``Q`` on ``0 <= s <= z0``."""

    tau: complex
    s: np.ndarray
    Q: tuple  # Q, Q', Q'', Q''', Q''''

    def __call__(self, s, n):
        """``Q^{(n)}(s)`` for ``s >= 0``, zero beyond the last node."""
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=complex)
        inside = s <= self.s[-1]
        if n < 4:
            spl = CubicHermiteSpline(self.s, self.Q[n], self.Q[n + 1])
            out[inside] = spl(s[inside])
        else:
            re = np.interp(s[inside], self.s, self.Q[4].real)
            im = np.interp(s[inside], self.s, self.Q[4].imag)
            out[inside] = re + 1j * im
        return out


@dataclass(frozen=True)
class HeteroclinicProfile:
    """``W`` on a symmetric grid containing 0 once."""

    z_nodes: np.ndarray
    W: np.ndarray
    tau: complex
    W_minus0: complex
    continuity_mismatch: float
    branch: _Branch = field(repr=False)


@dataclass(frozen=True)
class ShearLayerProfile:
    """Corrector ``V`` on a grid punctured at 0.

    ``V_left`` and ``V_right`` are the one-sided limits at 0 and ``jumps`` is
    ``([V], [V'], [V''])``.  The profile is ``scale_v * S(V_n)(z / scale_z)``
    in terms of the normalized corrector ``V_n``, where ``S`` is the identity
    or ``-conj`` (positive curvature).
    """

    z_nodes: np.ndarray
    V: np.ndarray
    V_left: complex
    V_right: complex
    jumps: tuple
    curvature: float
    tau: complex
    scale_z: float = 1.0
    scale_v: float = 1.0
    conjugated: bool = False
    branch: _Branch = field(default=None, repr=False)

    def evaluate(self, z, n=0):
        """``d^n V / dz^n`` at arbitrary nonzero ``z`` (right limit at 0)."""
        z = np.asarray(z, dtype=float)
        zn = z / self.scale_z
        Qn = self.branch(np.abs(zn), n)
        # V_n(z) = -Q(z) for z >= 0 and Q(-z) for z < 0
        vals = np.where(zn >= 0, -Qn, (-1) ** n * Qn)
        vals = vals * self.scale_v / self.scale_z**n
        return -np.conj(vals) if self.conjugated else vals


def _q_derivatives(tau, s, P, Xh, dXh):
    d2 = second_derivative(tau, s, Xh, dXh)
    d3 = third_derivative(tau, s, Xh, dXh, d2)
    q = tau - s * s
    Q0 = q * P
    Q1 = -2 * s * P - q * Xh
    Q2 = -2 * P + 4 * s * Xh - q * dXh
    Q3 = 6 * Xh + 6 * s * dXh - q * d2
    Q4 = 12 * dXh + 8 * s * d2 - q * d3
    return Q0, Q1, Q2, Q3, Q4


def tail_integral(tau, z0, X0):
    """Leading asymptotic value of ``int_{z0}^inf X`` given ``X(z0) = X0``."""
    p = -1j * tau / (2 * LAMBDA) - 3.5
    return X0 / (LAMBDA * z0 - p / z0)


def build_heteroclinic(root, traj, floor=1e-3):
    """Two-branch even reflection of ``W_-``.

    Raises
    ------
    SCViolation
        When ``|int X|`` is below ``floor * max|X| * z0``.
    ValueError
        If ``traj`` was computed at a different ``tau`` than ``root``.
    """
    if abs(complex(traj.tau) - complex(root.tau)) > 1e-12 * (1 + abs(root.tau)):
        raise ValueError("trajectory and root disagree on tau")
    report = integral_X(traj, floor)
    if report.alarm:
        raise SCViolation("integral of X below floor", value=str(report.value), floor=report.floor)
    tau = complex(traj.tau)
    s = traj.z_nodes[::-1].copy()
    X = traj.X[::-1]
    dX = traj.dX[::-1]
    h = np.diff(s)
    # trapezoid with the Hermite end correction: fourth order on a uniform grid
    pieces = h / 2 * (X[1:] + X[:-1]) + h * h / 12 * (dX[:-1] - dX[1:])
    Wm = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + tail_integral(tau, s[-1], X[-1])
    norm = 2 * Wm[0]
    P = Wm / norm
    Xh = X / norm
    dXh = dX / norm
    branch = _Branch(tau, s, _q_derivatives(tau, s, P, Xh, dXh))
    z = np.concatenate([-s[:0:-1], s])
    W = np.concatenate([P[:0:-1], 1 - P])
    # [W''] = 2 X^'(0); compare with the largest second derivative on the grid
    mismatch = float(2 * abs(dXh[0]) / np.max(np.abs(dXh)))
    return HeteroclinicProfile(z, W, tau, complex(Wm[0]), mismatch, branch)


def build_V(profile):
    """Corrector in normalized variables (curvature -2)."""
    b = profile.branch
    s = b.s
    Q = b.Q
    z = np.concatenate([-s[:0:-1], s[1:]])
    V = np.concatenate([Q[0][:0:-1], -Q[0][1:]])
    left = (Q[0][0], -Q[1][0], Q[2][0])
    right = (-Q[0][0], -Q[1][0], -Q[2][0])
    jumps = tuple(complex(r - l) for r, l in zip(right, left))
    return ShearLayerProfile(z, V, complex(left[0]), complex(right[0]), jumps, -2.0, profile.tau, branch=b)


def rescale_physical(V, tau, curvature):
    """Map a normalized profile to shear-layer variables for ``U''(a) = curvature``.

    ``tau_phys = k tau`` and ``z_phys = s z`` with ``k = |c|^{1/2}/sqrt(2)``
    and ``s = 2^{1/4} |c|^{-1/4}``.  For ``c > 0`` the profile is replaced by
    ``-conj`` and ``tau`` by ``-conj(tau)`` first so that ``Im tau_phys < 0``.
    """
    if curvature == 0:
        raise ValueError("degenerate critical point (curvature = 0)")
    if V.curvature != -2.0 or V.scale_z != 1.0:
        raise ValueError("expected a normalized profile")
    k = np.sqrt(abs(curvature)) / np.sqrt(2.0)
    sz = 2**0.25 * abs(curvature) ** -0.25
    flip = curvature > 0
    tau_n = -np.conj(tau) if flip else complex(tau)
    vals = k * (-np.conj(V.V) if flip else V.V)
    left = k * (-np.conj(V.V_left) if flip else V.V_left)
    right = k * (-np.conj(V.V_right) if flip else V.V_right)
    jumps = tuple(
        complex(k * (-np.conj(j) if flip else j) / sz**n) for n, j in enumerate(V.jumps)
    )
    return ShearLayerProfile(
        V.z_nodes * sz,
        vals,
        complex(left),
        complex(right),
        jumps,
        float(curvature),
        complex(k * tau_n),
        sz,
        k,
        flip,
        V.branch,
    )


def normalize_profile(Vp):
    """Inverse of :func:`rescale_physical`."""
    k = Vp.scale_v
    sz = Vp.scale_z

    def back(x):
        x = np.asarray(x) / k
        return -np.conj(x) if Vp.conjugated else x

    jumps = tuple(complex(back(j) * sz**n) for n, j in enumerate(Vp.jumps))
    return ShearLayerProfile(
        Vp.z_nodes / sz,
        back(Vp.V),
        complex(back(Vp.V_left)),
        complex(back(Vp.V_right)),
        jumps,
        -2.0,
        complex(back(Vp.tau)),
        branch=Vp.branch,
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit ``log|v| ~ b - rate z^2``."""

    rate: float
    intercept: float
    rms_residual: float
    poor: bool


def decay_rate(z, values, zmin=2.0, zmax=None, poor_threshold=0.05):
    """Gaussian decay rate of ``|values|`` over ``zmin <= |z| <= zmax``.

    ``poor`` is set when the RMS residual of the log fit exceeds
    ``poor_threshold`` times the spread of ``log|values|``.
    """
    z = np.abs(np.asarray(z, dtype=float))
    v = np.abs(np.asarray(values))
    sel = z >= zmin
    if zmax is not None:
        sel &= z <= zmax
    sel &= v > np.finfo(float).tiny
    if sel.sum() < 20:
        if not np.any(v[z >= zmin] > np.finfo(float).tiny):
            raise ValueError("all samples below the floating-point floor")
        raise ValueError("need at least 20 usable samples")
    zz = z[sel] ** 2
    lv = np.log(v[sel])
    slope, icpt = np.polyfit(zz, lv, 1)
    resid = lv - (slope * zz + icpt)
    rms = float(np.sqrt(np.mean(resid**2)))
    spread = float(np.ptp(lv)) or 1.0
    return DecayFit(float(-slope), float(icpt), rms, rms > poor_threshold * spread)


def layer_residual(Vp, z):
    """Pointwise residual of ``(tau + c z^2/2) V' - c z V + i V'''`` (physical form)."""
    c = Vp.curvature
    v0 = Vp.evaluate(z, 0)
    v1 = Vp.evaluate(z, 1)
    v3 = Vp.evaluate(z, 3)
    return (Vp.tau + 0.5 * c * z * z) * v1 - c * z * v0 + 1j * v3
