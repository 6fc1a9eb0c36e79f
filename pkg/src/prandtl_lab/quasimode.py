"""First-order quasimode around a non-degenerate critical point.

For a heat-evolving base flow ``u_s(t, y)`` with critical point ``a(t)`` and
curvature ``c(t) = d_y^2 u_s(t, a(t))``, set ``k(t) = |c|^{1/2} / sqrt(2)`` and

    omega(eps, t) = -u_s(t, a) + sqrt(eps) k tau,
    v_reg = H(y - a) (u_s(t, y) - u_s(t, a) + sqrt(eps) k tau),
    v_sl  = sqrt(eps) phi(y - a) V_c((y - a) / eps^{1/4}),

where ``V_c`` is the shear-layer profile rescaled to curvature ``c``.  The
velocity is ``U_eps = i d_y (v_reg + v_sl)`` times the phase
``exp(i (x + int_0^t omega) / eps)``; only its modulus
``exp(|Im int_0^t omega| / eps)`` enters norms, so it is applied analytically.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ResolutionError
from .heat_halfspace import base_flow_derivatives
from .shear_layer import rescale_physical


def _f(x, n):
    # derivatives of exp(-1/x) for x > 0, zero otherwise
    out = np.zeros_like(x)
    m = x > 0
    xm = x[m]
    e = np.exp(-1.0 / xm)
    poly = {0: 1.0, 1: 1.0 / xm**2, 2: (1 - 2 * xm) / xm**4, 3: (6 * xm**2 - 6 * xm + 1) / xm**6}[n]
    out[m] = e * poly
    return out


def _smoothstep(x, nmax=3):
    """``psi(x) = f(x) / (f(x) + f(1-x))`` and its derivatives up to ``nmax``."""
    fx = [_f(x, n) for n in range(nmax + 1)]
    fy = [_f(1 - x, n) for n in range(nmax + 1)]
    g = [fx[n] + (-1) ** n * fy[n] for n in range(nmax + 1)]
    psi = [fx[0] / g[0]]
    if nmax >= 1:
        psi.append((fx[1] - psi[0] * g[1]) / g[0])
    if nmax >= 2:
        psi.append((fx[2] - 2 * psi[1] * g[1] - psi[0] * g[2]) / g[0])
    if nmax >= 3:
        psi.append((fx[3] - 3 * psi[2] * g[1] - 3 * psi[1] * g[2] - psi[0] * g[3]) / g[0])
    return psi


@dataclass(frozen=True)
class Cutoff:
    """C-infinity bump: 1 on ``|s| <= inner``, 0 on ``|s| >= outer``."""

    inner: float = 0.45
    outer: float = 0.65

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError("need 0 < inner < outer")

    def __call__(self, s, n=0):
        s = np.asarray(s, dtype=float)
        w = self.outer - self.inner
        x = np.clip((np.abs(s) - self.inner) / w, -1.0, 2.0)
        psi = _smoothstep(x, n)[n]
        if n == 0:
            return 1.0 - psi
        return -psi * np.sign(s) ** n / w**n


@dataclass(frozen=True)
class FlowState:
    """Critical-point data of ``u_s(t, .)``."""

    t: float
    a: float
    U_a: float
    curvature: float
    k_integral: float  # int_0^t k(s) ds

    @property
    def k(self):
        return np.sqrt(abs(self.curvature)) / np.sqrt(2.0)


def _derivs(flow, t, y, n, frozen):
    return flow.d(y, n) if frozen or t == 0 else base_flow_derivatives(flow, t, y, n)


def flow_state(flow, t, nsteps=None, frozen=False, floor=0.2):
    """Track ``a(t)`` with RK4 on ``a' = -d_y^3 u_s / d_y^2 u_s`` and integrate ``k``.

    ``d_t d_y u_s`` equals ``d_y^3 u_s`` by the heat equation.  Raises
    :class:`ResolutionError` when ``|d_y^2 u_s(t, a(t))|`` drops below
    ``floor`` times its initial value.
    """
    c0 = flow.curvature
    if t == 0 or frozen:
        c = c0
        return FlowState(float(t), flow.a, flow.U_a, c, float(t) * np.sqrt(abs(c)) / np.sqrt(2.0))
    # a fixed step count keeps a(t) smooth in t, which the time differences rely on
    nsteps = nsteps or 64
    h = t / nsteps

    def rhs(s, state):
        a = np.array(state[0])
        u2 = float(_derivs(flow, s, a, 2, False))
        if abs(u2) < floor * abs(c0):
            raise ResolutionError("critical point degenerates", t=s, curvature=u2)
        u3 = float(_derivs(flow, s, a, 3, False))
        return np.array([-u3 / u2, np.sqrt(abs(u2)) / np.sqrt(2.0)])

    st = np.array([flow.a, 0.0])
    s = 0.0
    for _ in range(nsteps):
        k1 = rhs(s, st)
        k2 = rhs(s + h / 2, st + h / 2 * k1)
        k3 = rhs(s + h / 2, st + h / 2 * k2)
        k4 = rhs(s + h, st + h * k3)
        st = st + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    a = float(st[0])
    aa = np.array(a)
    return FlowState(float(t), a, float(_derivs(flow, t, aa, 0, False)), float(_derivs(flow, t, aa, 2, False)), float(st[1]))


def track_critical_point(flow, t, nsteps=None, frozen=False, floor=0.2):
    """``a(t)`` for the heat-evolved base flow."""
    return flow_state(flow, t, nsteps, frozen, floor).a


def _tau_for(tau, curvature):
    return -np.conj(tau) if curvature > 0 else complex(tau)


def omega_eps(flow, tau, epsilon, t=0.0, frozen=False):
    """``-u_s(t, a(t)) + sqrt(eps) k(t) tau`` with ``tau`` the normalized root."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    fs = flow_state(flow, t, frozen=frozen)
    return complex(-fs.U_a + np.sqrt(epsilon) * fs.k * _tau_for(tau, fs.curvature))


def layer_width(epsilon, curvature):
    """``(2 eps)^{1/4} |c|^{-1/4}``."""
    return (2 * epsilon) ** 0.25 / abs(curvature) ** 0.25


@dataclass(frozen=True)
class QuasimodeFields:
    """Profiles at one ``(eps, t)``; ``derivs[name][n]`` holds y-derivatives."""

    epsilon: float
    t: float
    omega: complex
    y: np.ndarray
    v_reg: np.ndarray
    v_sl: np.ndarray
    U_eps: np.ndarray
    cutoff_radius: float
    state: FlowState
    growth_log: float  # |Im int_0^t omega| / eps
    derivs: dict = field(default_factory=dict, repr=False)

    @property
    def a(self):
        return self.state.a

    def weighted_norm(self, values, alpha_w):
        return float(np.max(np.exp(alpha_w * self.y) * np.abs(values)))


def build_fields(flow, profile, epsilon, t, y, cutoff=Cutoff(), frozen=False, min_nodes=16, nderiv=3):
    """Quasimode fields on ``y`` with derivatives up to ``nderiv``.

    Parameters
    ----------
    flow : BaseFlow
    profile : ShearLayerProfile
        Normalized corrector from :func:`shear_layer.build_V`.
    epsilon, t : float
    y : array
        Grid; its spacing near ``a`` must resolve the layer width with at
        least ``min_nodes`` nodes.
    frozen : bool
        Keep ``u_s = U`` instead of evolving it by the heat equation.
    """
    y = np.asarray(y, dtype=float)
    fs = flow_state(flow, t, frozen=frozen)
    a, c = fs.a, fs.curvature
    delta = layer_width(epsilon, c)
    if not 1 <= nderiv <= 3:
        raise ValueError("nderiv must be 1, 2 or 3")
    if np.count_nonzero(np.abs(y - a) <= delta) < min_nodes:
        raise ResolutionError(f"layer width {delta:.3g} under-resolved", width=delta)
    tau = complex(profile.tau)
    Vc = rescale_physical(profile, tau, c)
    sq = np.sqrt(epsilon)
    e4 = epsilon**0.25
    s = y - a
    H = (s > 0).astype(float)
    omega = complex(-fs.U_a + sq * Vc.tau)
    u = [_derivs(flow, t, y, n, frozen) for n in range(nderiv + 1)]
    vreg = [H * (u[0] - fs.U_a + sq * Vc.tau)] + [H * u[n] for n in range(1, nderiv + 1)]
    # d^n/dy^n V_c(s / eps^{1/4}) = eps^{-n/4} V_c^{(n)}
    g = [sq * Vc.evaluate(s / e4, n) / e4**n for n in range(nderiv + 1)]
    ph = [cutoff(s, n) for n in range(nderiv + 1)]
    binom = [[1], [1, 1], [1, 2, 1], [1, 3, 3, 1]]
    vsl = [sum(binom[n][j] * ph[n - j] * g[j] for j in range(n + 1)) for n in range(nderiv + 1)]
    U_eps = 1j * (vreg[1] + vsl[1])
    growth = abs(tau.imag) * fs.k_integral / sq
    return QuasimodeFields(
        float(epsilon),
        float(t),
        omega,
        y,
        vreg[0],
        vsl[0],
        U_eps,
        cutoff.outer,
        fs,
        float(growth),
        {"v_reg": vreg, "v_sl": vsl, "u": u, "g": g, "phi": ph},
    )


def sigma0(flow, tau):
    """Initial growth rate ``k(0) |Im tau|`` in ``exp(sigma0 t / sqrt(eps))``."""
    return float(np.sqrt(abs(flow.curvature)) / np.sqrt(2.0) * abs(complex(tau).imag))


def quasimode_grid(flow, epsilon, L=8.0, nodes_per_width=24):
    """Uniform grid resolving the layer at ``eps``."""
    h = layer_width(epsilon, flow.curvature) / nodes_per_width
    n = int(np.ceil(L / h))
    return np.linspace(0.0, L, n + 1)


def residual_terms(flow, profile, epsilon, t, y, cutoff=Cutoff(), frozen=False, dt=None):
    """Phase-stripped remainder terms at ``(eps, t)``.

    Returns a dict of arrays:

    ``taylor_slope``  ``-eps^{-1} (u_s - u_s(a) - c s^2/2) d_y v_sl``
    ``taylor_value``  ``eps^{-1} (d_y u_s - c s) v_sl``
    ``viscous_reg``   ``-i d_y^3 v_reg``
    ``time``          ``i d_t d_y (v_reg + v_sl)`` (finite differences in t)
    ``cutoff``        terms carrying derivatives of ``phi``
    ``total``         direct evaluation of the full remainder
    ``layer_defect``  ``total`` minus the sum of the terms above

    Each term is computed from the true ``u_s`` and its derivatives, not a
    Taylor expansion.
    """
    F = build_fields(flow, profile, epsilon, t, y, cutoff, frozen)
    d = F.derivs
    fs = F.state
    a, c = fs.a, fs.curvature
    s = y - a
    H = (s > 0).astype(float)
    u = d["u"]
    vsl = d["v_sl"]
    g = d["g"]
    ph = d["phi"]
    inv = 1.0 / epsilon
    om = F.omega
    rem = u[0] - fs.U_a - 0.5 * c * s * s
    rem1 = u[1] - c * s
    terms = {}
    terms["taylor_slope"] = -inv * rem * vsl[1]
    terms["taylor_value"] = inv * rem1 * vsl[0]
    terms["viscous_reg"] = -1j * H * u[3]
    lin = om + fs.U_a + 0.5 * c * s * s  # sqrt(eps) k tau + c s^2 / 2
    terms["cutoff"] = -inv * (
        lin * g[0] * ph[1] + 1j * epsilon * (3 * g[2] * ph[1] + 3 * g[1] * ph[2] + g[0] * ph[3])
    )
    # i d_t d_y v by finite differences at fixed y
    dt = dt or 1e-3 * layer_width(epsilon, c)
    if frozen:
        terms["time"] = np.zeros_like(y, dtype=complex)
    else:

        def dy_v(tt):
            G = build_fields(flow, profile, epsilon, tt, y, cutoff, frozen)
            return G.derivs["v_reg"][1] + G.derivs["v_sl"][1]

        if t - dt < 0:
            d0, d1, d2 = dy_v(t), dy_v(t + dt), dy_v(t + 2 * dt)
            dtv = (-3 * d0 + 4 * d1 - d2) / (2 * dt)
        else:
            dtv = (dy_v(t + dt) - dy_v(t - dt)) / (2 * dt)
        terms["time"] = 1j * dtv
    # direct remainder: -eps^{-1} L(v) + i d_t d_y v with L(v) = (omega + u_s) v' - u_s' v + i eps v'''
    # v_reg solves the inviscid part exactly; subtract its closed-form contribution to avoid
    # cancelling O(1/eps) quantities
    Lreg_inv = (om + u[0]) * d["v_reg"][1] - u[1] * d["v_reg"][0]
    Lsl = (om + u[0]) * vsl[1] - u[1] * vsl[0] + 1j * epsilon * vsl[3]
    total = -inv * Lreg_inv - 1j * H * u[3] - inv * Lsl + terms["time"]
    named = sum(terms[k] for k in ("taylor_slope", "taylor_value", "viscous_reg", "time", "cutoff"))
    terms["total"] = total
    terms["layer_defect"] = total - named
    terms["_fields"] = F
    return terms


@dataclass(frozen=True)
class ResidualReport:
    """Remainder norms over time at one ``eps``.

    ``residual_norm`` is the phase-restored weighted sup norm,
    ``stripped_norm`` the same without the phase modulus, and
    ``envelope_ratio = residual_norm * exp(-sigma0 t / sqrt(eps))``.
    """

    epsilon: float
    times: np.ndarray
    residual_norm: np.ndarray
    stripped_norm: np.ndarray
    sigma0: float
    envelope_ratio: np.ndarray
    term_norms: dict = field(default_factory=dict, repr=False)

    @property
    def constant(self):
        return float(np.max(self.envelope_ratio))


def residual(flow, profile, epsilon, t_samples, y=None, cutoff=Cutoff(), frozen=False, alpha_w=None):
    """Evaluate the remainder at each ``t`` in ``t_samples``."""
    y = quasimode_grid(flow, epsilon) if y is None else np.asarray(y, dtype=float)
    alpha_w = flow.decay_weight if alpha_w is None else alpha_w
    s0 = sigma0(flow, profile.tau)
    names = ("taylor_slope", "taylor_value", "viscous_reg", "time", "cutoff", "layer_defect")
    stripped, restored = [], []
    tn = {k: [] for k in names}
    wgt = np.exp(alpha_w * y)
    for t in t_samples:
        T = residual_terms(flow, profile, epsilon, t, y, cutoff, frozen)
        F = T["_fields"]
        nrm = float(np.max(wgt * np.abs(T["total"])))
        stripped.append(nrm)
        restored.append(nrm * np.exp(F.growth_log))
        for k in names:
            tn[k].append(float(np.max(wgt * np.abs(T[k]))))
    times = np.asarray(t_samples, dtype=float)
    restored = np.array(restored)
    env = restored * np.exp(-s0 * times / np.sqrt(epsilon))
    return ResidualReport(float(epsilon), times, restored, np.array(stripped), s0, env, {k: np.array(v) for k, v in tn.items()})


@dataclass(frozen=True)
class EnvelopeReport:
    """``||U_eps(t)|| exp(-sigma0 t / sqrt(eps))`` over time: the growth sandwich."""

    epsilon: float
    times: np.ndarray
    norms: np.ndarray
    ratio: np.ndarray
    sigma0: float

    @property
    def lower(self):
        return float(np.min(self.ratio))

    @property
    def upper(self):
        return float(np.max(self.ratio))


def growth_envelope(flow, profile, epsilon, t_samples, y=None, cutoff=Cutoff(), frozen=False, alpha_w=None):
    """Weighted norms of ``U_eps`` with the phase modulus restored."""
    y = quasimode_grid(flow, epsilon) if y is None else np.asarray(y, dtype=float)
    alpha_w = flow.decay_weight if alpha_w is None else alpha_w
    s0 = sigma0(flow, profile.tau)
    norms = []
    for t in t_samples:
        F = build_fields(flow, profile, epsilon, t, y, cutoff, frozen, nderiv=1)
        norms.append(F.weighted_norm(F.U_eps, alpha_w) * np.exp(F.growth_log))
    times = np.asarray(t_samples, dtype=float)
    norms = np.array(norms)
    return EnvelopeReport(float(epsilon), times, norms, norms * np.exp(-s0 * times / np.sqrt(epsilon)), s0)
