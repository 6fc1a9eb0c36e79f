"""Dirichlet heat kernel on the half line, Duhamel solver and mode-k evolution.

    S(t, y, z) = G(t, y - z) - G(t, y + z),    G(t, y) = exp(-y^2 / 4t) / sqrt(4 pi t).

Applying ``S(t)`` to data on a uniform grid is done two ways.  Wide kernels
(``2 sqrt(t) >= wide_factor * h``) use composite Simpson in ``z``.  Narrow
kernels, where Simpson cannot resolve the Gaussian, use Gauss-Hermite nodes
``y + 2 sqrt(t) xi_q`` on the odd extension of the data with local cubic
interpolation.  Data beyond the last grid node is taken as zero.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.integrate import cumulative_simpson

from .errors import ConvergenceError, ResolutionError


def kernel(t, y, z):
    """Image-charge kernel ``S(t, y, z)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    c = 1.0 / np.sqrt(4 * np.pi * t)
    return c * (np.exp(-((y - z) ** 2) / (4 * t)) - np.exp(-((y + z) ** 2) / (4 * t)))


def simpson_weights(n, h):
    """Composite Simpson weights for ``n`` uniform nodes (trapezoid on a leftover interval)."""
    if n < 3:
        return np.full(n, h / 2) if n == 2 else np.zeros(n)
    m = n if n % 2 else n - 1
    w = np.zeros(n)
    w[:m] = 2.0
    w[1:m:2] = 4.0
    w[0] = w[m - 1] = 1.0
    w *= h / 3
    if m < n:
        w[-2] += h / 2
        w[-1] += h / 2
    return w


def _uniform_step(y):
    y = np.asarray(y, dtype=float)
    h = y[1] - y[0]
    if y[0] != 0.0 or not np.allclose(np.diff(y), h, rtol=1e-9, atol=0):
        raise ValueError("source grid must be uniform and start at 0")
    return h


def interp_matrix(y, pts):
    """Sparse cubic Lagrange interpolation from uniform ``y`` to ``pts``.

    Negative points use the odd reflection; points beyond ``y[-1]`` map to 0.
    """
    h = _uniform_step(y)
    n = len(y)
    pts = np.asarray(pts, dtype=float)
    sgn = np.where(pts < 0, -1.0, 1.0)
    p = np.abs(pts)
    j = np.clip(np.floor(p / h).astype(int) - 1, 0, n - 4)
    s = (p - y[j]) / h
    w = np.stack(
        [
            -(s - 1) * (s - 2) * (s - 3) / 6,
            s * (s - 2) * (s - 3) / 2,
            -s * (s - 1) * (s - 3) / 2,
            s * (s - 1) * (s - 2) / 6,
        ],
        axis=1,
    )
    w *= sgn[:, None]
    w[p > y[-1] * (1 + 1e-12)] = 0.0
    rows = np.repeat(np.arange(len(pts)), 4)
    cols = (j[:, None] + np.arange(4)).ravel()
    return sparse.csr_matrix((w.ravel(), (rows, cols)), shape=(len(pts), n))


@lru_cache(maxsize=16)
def _hermgauss(nq):
    return np.polynomial.hermite.hermgauss(nq)


def kernel_operator(t, y_src, y_out=None, nq=24, wide_factor=16.0):
    """Matrix of ``f -> S(t) f`` from ``y_src`` samples to ``y_out`` points.

    Returns a sparse matrix for narrow kernels and a dense one for wide kernels.
    """
    y_src = np.asarray(y_src, dtype=float)
    y_out = y_src if y_out is None else np.asarray(y_out, dtype=float)
    h = _uniform_step(y_src)
    if t == 0:
        return interp_matrix(y_src, y_out)
    if not t > 0:
        raise ValueError("t must be non-negative")
    width = 2 * np.sqrt(t)
    if width >= wide_factor * h:
        return kernel(t, y_out[:, None], y_src[None, :]) * simpson_weights(len(y_src), h)[None, :]
    xi, wq = _hermgauss(nq)
    pts = (y_out[:, None] + width * xi[None, :]).ravel()
    B = interp_matrix(y_src, pts)
    wts = sparse.kron(sparse.identity(len(y_out)), sparse.csr_matrix(wq[None, :] / np.sqrt(np.pi)))
    return (wts @ B).tocsr()


def apply_kernel(t, y_src, f, y_out=None, **kw):
    """``S(t) f`` evaluated at ``y_out``."""
    return kernel_operator(t, y_src, y_out, **kw) @ np.asarray(f)


def solve_duhamel(U0, F, t, y_src, y_out=None, n_sigma=24, check=False, tol=1e-6):
    """Representation formula ``S(t) U0 + int_0^t S(t-s) F(s) ds``.

    Parameters
    ----------
    U0 : array
        Initial data on ``y_src``.
    F : array or None
        Forcing samples of shape ``(m + 1, len(y_src))`` on the uniform
        times ``s_j = j t / m``; a single row means constant in time.
    t : float
    y_src, y_out : arrays
        Uniform source grid from 0 and output points.
    n_sigma : int
        Gauss-Legendre nodes in ``sigma`` after the substitution ``s = t - sigma^2``.
    check : bool
        Repeat with ``2 n_sigma`` and raise if the results differ by more than ``tol``.
    """
    y_src = np.asarray(y_src, dtype=float)
    y_out = y_src if y_out is None else np.asarray(y_out, dtype=float)
    U0 = np.asarray(U0)
    out = apply_kernel(t, y_src, U0, y_out) if t > 0 else interp_matrix(y_src, y_out) @ U0
    if F is None or t == 0:
        return out
    F = np.atleast_2d(np.asarray(F))
    out = out + _duhamel_term(F, t, y_src, y_out, n_sigma)
    if check:
        fine = _duhamel_term(F, t, y_src, y_out, 2 * n_sigma)
        coarse = out - apply_kernel(t, y_src, U0, y_out)
        err = float(np.max(np.abs(fine - coarse)))
        if err > tol:
            raise ResolutionError(f"sigma quadrature not resolved (doubling gap {err:.2e})", gap=err)
    return out


def _duhamel_term(F, t, y_src, y_out, n_sigma):
    # Gauss-Legendre in sigma: the integrand 2 sigma S(sigma^2) F(t - sigma^2) is smooth
    x, w = np.polynomial.legendre.leggauss(n_sigma)
    sig = 0.5 * np.sqrt(t) * (x + 1)
    w = 0.5 * np.sqrt(t) * w
    m = F.shape[0] - 1
    acc = np.zeros(len(y_out), dtype=np.result_type(F, float))
    for sg, wt in zip(sig, w):
        s = t - sg * sg
        if m == 0:
            Fs = F[0]
        else:
            x = s / t * m
            j = min(int(np.floor(x)), m - 1)
            th = x - j
            Fs = (1 - th) * F[j] + th * F[j + 1]
        acc = acc + wt * 2 * sg * (kernel_operator(sg * sg, y_src, y_out) @ Fs)
    return acc


def weighted_sup(y, values, alpha_w):
    """``sup_y exp(alpha_w y) |values|``."""
    return float(np.max(np.exp(alpha_w * np.asarray(y)) * np.abs(values)))


def estimate_constant(U0, F, t, y, alpha_w=0.5, n_sigma=24):
    """Measured ``C`` in ``||U(t)|| <= C (||U0|| + int_0^t ||F||)`` for constant-in-time ``F``."""
    U = solve_duhamel(U0, F, t, y, n_sigma=n_sigma)
    F = np.atleast_2d(F)
    denom = weighted_sup(y, U0, alpha_w) + t * weighted_sup(y, F[0], alpha_w)
    return weighted_sup(y, U, alpha_w) / denom


def evolve_base_flow(Us0, t, y):
    """Dirichlet heat evolution of samples ``Us0`` on the uniform grid ``y``."""
    Us0 = np.asarray(Us0)
    if abs(Us0[0]) > 1e-12 * max(1.0, float(np.max(np.abs(Us0)))):
        raise ValueError("base flow must vanish at y = 0")
    if t == 0:
        return Us0.copy()
    return apply_kernel(t, y, Us0)


def base_flow_derivatives(flow, t, y, n, nq=48):
    """``d^n/dy^n`` of the heat-evolved base flow at ``y``.

    Uses ``d^n u(t, y) = pi^{-1/2} sum_q w_q U~^{(n)}(y + 2 sqrt(t) xi_q)`` where
    ``U~`` is the odd extension of ``U``, so derivatives fall on the data.
    """
    y = np.asarray(y, dtype=float)
    if t == 0:
        return flow.d(y, n)
    xi, wq = _hermgauss(nq)
    p = y[..., None] + 2 * np.sqrt(t) * xi
    vals = np.where(p >= 0, flow.d(np.abs(p), n), (-1) ** (n + 1) * flow.d(np.abs(p), n))
    return (vals * wq).sum(-1) / np.sqrt(np.pi)


@dataclass
class HeatModeState:
    """Mode-k field ``U^k(t, .)`` with the running weighted norm history."""

    k: int
    t: float
    U: np.ndarray
    alpha_w: float
    y: np.ndarray = field(repr=False)
    times: np.ndarray = field(default=None, repr=False)
    log_norms: np.ndarray = field(default=None, repr=False)

    def growth_exponent(self, fraction=0.5):
        """Slope of ``log ||U||`` over the final ``fraction`` of the run."""
        sel = self.times >= self.times[-1] * (1 - fraction)
        return float(np.polyfit(self.times[sel], self.log_norms[sel], 1)[0])


def _cumint(y, V):
    if np.iscomplexobj(V):
        return cumulative_simpson(V.real, x=y, initial=0, axis=0) + 1j * cumulative_simpson(
            V.imag, x=y, initial=0, axis=0
        )
    return cumulative_simpson(V, x=y, initial=0, axis=0)


def mode_k_forcing(k, flow, y):
    """``V -> i k (U' int_0^y V - U V)`` on the grid ``y``."""
    Us = flow.U(y)
    Us1 = flow.d(y, 1)
    def F(V):
        if V.ndim == 2:
            return 1j * k * (Us1[:, None] * _cumint(y, V) - Us[:, None] * V)
        return 1j * k * (Us1 * _cumint(y, V) - Us * V)

    return F


def evolve_mode_k(U0k, k, flow, T, nsteps, y, alpha_w=None, renormalize=True):
    """Midpoint-Picard Duhamel stepping of the mode-k equation.

    Each step of size ``dt`` computes ``U_half = S(dt/2)(U + dt/2 F(U))`` and
    ``U <- S(dt) U + dt S(dt/2) F(U_half)``, second order in ``dt``.

    Returns a :class:`HeatModeState`; ``log_norms`` holds the weighted sup
    norm of the true (un-renormalized) field after every step.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    y = np.asarray(y, dtype=float)
    alpha_w = flow.decay_weight if alpha_w is None else alpha_w
    dt = T / nsteps
    S1 = kernel_operator(dt, y)
    S2 = kernel_operator(dt / 2, y)
    F = mode_k_forcing(k, flow, y)
    U = np.array(U0k, dtype=complex)
    U[0] = 0
    wgt = np.exp(alpha_w * y)
    log_amp = 0.0
    logs = np.empty(nsteps + 1)
    logs[0] = np.log(np.max(wgt * np.abs(U)))
    for i in range(nsteps):
        Uh = S2 @ (U + dt / 2 * F(U))
        U = S1 @ U + dt * (S2 @ F(Uh))
        nrm = float(np.max(wgt * np.abs(U)))
        if not np.isfinite(nrm) or nrm == 0.0:
            raise ConvergenceError("mode-k evolution lost finiteness", k=k, step=i)
        logs[i + 1] = log_amp + np.log(nrm)
        if renormalize:
            U /= nrm
            log_amp += np.log(nrm)
    if renormalize:
        U *= np.exp(log_amp)
    times = dt * np.arange(nsteps + 1)
    return HeatModeState(k, T, U, alpha_w, y, times, logs)


def growth_exponent(k, flow, T=2.0, dt=5e-4, L=8.0, h=0.004, seed=0, fraction=0.5):
    """Dominant growth exponent of mode ``k`` from seeded random data."""
    y = np.arange(0.0, L + h / 2, h)
    rng = np.random.default_rng(seed)
    U0 = rng.random(len(y)) + 1j * rng.random(len(y))
    st = evolve_mode_k(U0, k, flow, T, int(round(T / dt)), y)
    return st.growth_exponent(fraction)


def doubling_check(k, flow, T=2.0, dt=5e-4, rtol=0.01, **kw):
    """Compare growth exponents at ``dt`` and ``dt / 2``; raise on disagreement."""
    g1 = growth_exponent(k, flow, T, dt, **kw)
    g2 = growth_exponent(k, flow, T, dt / 2, **kw)
    if abs(g1 - g2) > rtol * max(abs(g2), 1e-12):
        raise ConvergenceError("time step not resolved", k=k, coarse=g1, fine=g2)
    return g2


def propagator_log_norms(k, flow, times, L=8.0, h=0.04, dt=2e-3, alpha_w=None):
    """``log ||P_k(t)||`` in the weighted sup norm at each of ``times``.

    ``P_k`` is the midpoint-Picard propagator of the mode-k equation; the
    induced norm is the largest weighted absolute row sum of
    ``W P_k W^{-1}`` with ``W = exp(alpha_w y)``.
    """
    alpha_w = flow.decay_weight if alpha_w is None else alpha_w
    y = np.arange(0.0, L + h / 2, h)
    wgt = np.exp(alpha_w * y)
    S1 = kernel_operator(dt, y)
    S2 = kernel_operator(dt / 2, y)
    F = mode_k_forcing(k, flow, y)
    P = np.diag(1.0 / wgt).astype(complex)
    P[0, 0] = 0.0
    marks = {int(round(t / dt)): t for t in times}
    out = {}
    for i in range(1, max(marks) + 1):
        Ph = S2 @ (P + dt / 2 * F(P))
        P = S1 @ P + dt * (S2 @ F(Ph))
        if i in marks:
            out[marks[i]] = float(np.log(np.max(np.sum(np.abs(wgt[:, None] * P), axis=1))))
    return np.array([out[t] for t in times])


@dataclass(frozen=True)
class GrowthTable:
    """Operator-norm log-growth ``g[k, t]`` with per-time linear fits in ``k``."""

    k_list: np.ndarray
    times: np.ndarray
    log_growth: np.ndarray  # shape (len(k_list), len(times))
    r_squared: np.ndarray
    slopes: np.ndarray
    rho: float  # smallest rho with g <= rho k t for all entries (C = 1)


def growth_table(k_list=(10, 30, 100), times=(0.25, 0.5, 1.0), flow=None, **kw):
    """Tabulate ``log ||P_k(t)||`` and test linearity in ``k`` at each fixed ``t``."""
    from .baseflow import gaussian_shear_flow

    flow = flow or gaussian_shear_flow()
    ks = np.asarray(k_list, dtype=float)
    ts = np.asarray(times, dtype=float)
    g = np.array([propagator_log_norms(int(k), flow, list(ts), **kw) for k in ks])
    r2, slopes = [], []
    for j in range(len(ts)):
        slope, icpt = np.polyfit(ks, g[:, j], 1)
        r2.append(float(np.corrcoef(ks, g[:, j])[0, 1] ** 2))
        slopes.append(float(slope))
    rho = float(np.max(g / (ks[:, None] * ts[None, :])))
    return GrowthTable(ks, ts, g, np.array(r2), np.array(slopes), rho)


def manufactured_errors(t=1.0, L_src=24.0, h=0.01, L_out=10.0, n_sigma=24):
    """Sup errors for ``exp(-t) sin y`` (free) and ``(1 - exp(-t)) sin y`` (forcing ``sin y``).

    The source grid extends to ``L_src`` so that truncation is invisible on
    ``[0, L_out]``.
    """
    y = np.arange(0.0, L_src + h / 2, h)
    yo = np.linspace(0.0, L_out, 1001)
    free = solve_duhamel(np.sin(y), None, t, y, yo)
    forced = solve_duhamel(0 * y, np.sin(y), t, y, yo, n_sigma=n_sigma)
    e_free = float(np.max(np.abs(free - np.exp(-t) * np.sin(yo))))
    e_forced = float(np.max(np.abs(forced - (1 - np.exp(-t)) * np.sin(yo))))
    return e_free, e_forced
