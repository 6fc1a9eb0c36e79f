"""Outer and inner comparisons between simulated and asymptotic eigenmodes.

With ``T = sqrt(eps) k tau`` (``k = |U''(a)|^{1/2} / sqrt(2)``),

    v_a   = H(y - a) (U - U(a)),                 v_a(inf)   = -U(a),
    v_reg = H(y - a) (U - U(a) + T),             v_reg(inf) = -U(a) + T,

and the outer corrections are

    v_out_th  = (v_reg / v_reg(inf) - v_a / v_a(inf)) / sqrt(eps),
    v_out_num = (v_num / v_num(inf) - v_a / v_a(inf)) / sqrt(eps).

Inside the layer, at ``y = a + eps^{1/4} z``, the theory curve is
``v_sl / (sqrt(eps) v_reg(inf))`` and the numerical one is the simulated
mode minus the regular part, ``(v_num / v_num(inf) - v_reg / v_reg(inf)) / sqrt(eps)``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .shear_layer import rescale_physical


def _t_phys(flow, tau, epsilon):
    c = flow.curvature
    tau = -np.conj(tau) if c > 0 else complex(tau)
    return np.sqrt(epsilon) * np.sqrt(abs(c)) / np.sqrt(2.0) * tau


def inviscid_mode(flow, y):
    """``v_a = H(y - a) (U - U(a))`` and ``v_a(inf) = -U(a)``."""
    y = np.asarray(y, dtype=float)
    return np.where(y > flow.a, flow.U(y) - flow.U_a, 0.0), -flow.U_a


def regular_mode(flow, tau, epsilon, y):
    """``v_reg`` and its far-field value."""
    y = np.asarray(y, dtype=float)
    T = _t_phys(flow, tau, epsilon)
    return np.where(y > flow.a, flow.U(y) - flow.U_a + T, 0.0), -flow.U_a + T


def outer_correction_theory(flow, tau, epsilon, y):
    """``(v_reg / v_reg(inf) - v_a / v_a(inf)) / sqrt(eps)``."""
    vr, vr_inf = regular_mode(flow, tau, epsilon, y)
    va, va_inf = inviscid_mode(flow, y)
    return (vr / vr_inf - va / va_inf) / np.sqrt(epsilon)


def outer_limit(flow, tau, y):
    """Pointwise ``eps -> 0`` limit of the theory outer correction.

    ``(T1 / U(a)) (v_a / v_a(inf) - H(y - a))`` with ``T1 = k tau``.
    """
    T1 = _t_phys(flow, tau, 1.0)
    va, va_inf = inviscid_mode(flow, y)
    H = (np.asarray(y) > flow.a).astype(float)
    return T1 / flow.U_a * (va / va_inf - H)


def interpolate_mode(y_src, mode, y):
    """Monotone cubic interpolation of a complex profile."""
    y = np.asarray(y, dtype=float)
    if y.min() < y_src[0] - 1e-12 or y.max() > y_src[-1] + 1e-12:
        raise ValueError("requested points outside the simulation grid")
    re = PchipInterpolator(y_src, np.real(mode))(y)
    im = PchipInterpolator(y_src, np.imag(mode))(y)
    return re + 1j * im


def outer_correction_numeric(mode, y_src, flow, epsilon, y):
    """``(v_num / v_num(inf) - v_a / v_a(inf)) / sqrt(eps)`` on ``y``.

    ``mode`` must already be normalized to unit far-field value.
    """
    vn = interpolate_mode(y_src, mode, y)
    va, va_inf = inviscid_mode(flow, y)
    return (vn - va / va_inf) / np.sqrt(epsilon)


def _layer(flow, profile, tau, epsilon):
    return rescale_physical(profile, tau, flow.curvature)


def inner_theory(flow, profile, epsilon, z):
    """``v_sl(a + eps^{1/4} z) / (sqrt(eps) v_reg(inf))`` (cutoff equal to 1 on the layer)."""
    tau = complex(profile.tau)
    Vc = _layer(flow, profile, tau, epsilon)
    _, vr_inf = regular_mode(flow, tau, epsilon, [flow.a])
    return Vc.evaluate(np.asarray(z, dtype=float), 0) / vr_inf


def inner_numeric(mode, y_src, flow, tau, epsilon, z, variant="layer"):
    """Numerical inner curve at ``y = a + eps^{1/4} z``.

    ``variant``:
      ``layer``    ``(v_num / v_num(inf) - v_reg / v_reg(inf)) / sqrt(eps)``
      ``literal``  ``v_num / (sqrt(eps) v_num(inf)) - v_out_num``
      ``theory_outer``  ``v_num / (sqrt(eps) v_num(inf)) - v_out_th``
    """
    y = flow.a + epsilon**0.25 * np.asarray(z, dtype=float)
    vn = interpolate_mode(y_src, mode, y)
    sq = np.sqrt(epsilon)
    if variant == "layer":
        vr, vr_inf = regular_mode(flow, tau, epsilon, y)
        return (vn - vr / vr_inf) / sq
    if variant == "literal":
        return vn / sq - outer_correction_numeric(mode, y_src, flow, epsilon, y)
    if variant == "theory_outer":
        return vn / sq - outer_correction_theory(flow, tau, epsilon, y)
    raise ValueError(f"unknown variant {variant!r}")


def relative_sup(a, b):
    """``sup|a - b| / sup|b|``."""
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


@dataclass(frozen=True)
class ComparisonReport:
    epsilon: float
    outer_sup_err: float
    inner_sup_err: float
    exclusion_radius: float
    layer_width: float
    curves: dict = field(default_factory=dict, repr=False)
    variants: dict = field(default_factory=dict)


def layer_width(flow, epsilon):
    return (2 * epsilon) ** 0.25 / abs(flow.curvature) ** 0.25


def compare(mode, y_src, flow, profile, epsilon, exclusion_widths=5.0, inner_radius=5.0, y_max=None, n_out=2000, n_in=801):
    """Outer and inner relative sup mismatches for a normalized simulated mode."""
    tau = complex(profile.tau)
    w = layer_width(flow, epsilon)
    excl = exclusion_widths * w
    if exclusion_widths < 3:
        raise ValueError("exclusion radius must be at least 3 layer widths")
    y_max = y_max or 0.9 * y_src[-1]
    y = np.linspace(y_src[1], y_max, n_out)
    y_cmp = y[np.abs(y - flow.a) > excl]
    th = outer_correction_theory(flow, tau, epsilon, y_cmp)
    nu = outer_correction_numeric(mode, y_src, flow, epsilon, y_cmp)
    z = np.linspace(-inner_radius, inner_radius, n_in)
    z = z[z != 0]
    ith = inner_theory(flow, profile, epsilon, z)
    inu = inner_numeric(mode, y_src, flow, tau, epsilon, z)
    variants = {
        v: relative_sup(inner_numeric(mode, y_src, flow, tau, epsilon, z, v), ith) for v in ("literal", "theory_outer")
    }
    curves = {
        "outer": (y, outer_correction_theory(flow, tau, epsilon, y), outer_correction_numeric(mode, y_src, flow, epsilon, y)),
        "inner": (z, ith, inu),
    }
    return ComparisonReport(float(epsilon), relative_sup(nu, th), relative_sup(inu, ith), excl, w, curves, variants)
