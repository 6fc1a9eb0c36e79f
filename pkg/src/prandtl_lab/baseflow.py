"""Shear profiles with analytic derivatives."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import hermite

Derivs = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class BaseFlow:
    """Shear flow ``U(y)`` on the half line with derivatives to order 4.

    Parameters
    ----------
    derivs : callable
        ``derivs(y, n)`` returns the n-th derivative of ``U`` at ``y``.
    a : float
        Non-degenerate critical point, ``U'(a) = 0``.
    decay_weight : float
        Exponent of the weight ``exp(decay_weight * y)`` used in sup norms.
    heat : callable, optional
        ``heat(t, y, n)``: closed-form n-th derivative of the Dirichlet heat
        evolution of ``U``.  Used as an oracle when available.
    """

    derivs: Derivs
    a: float
    decay_weight: float = 0.5
    heat: Optional[Callable[[float, np.ndarray, int], np.ndarray]] = field(default=None, repr=False)
    name: str = "custom"

    def __post_init__(self):
        if abs(float(self.derivs(np.array(self.a), 1))) > 1e-12:
            raise ValueError("a is not a critical point of U")
        if self.curvature == 0.0:
            raise ValueError("degenerate critical point (U''(a) = 0)")

    def U(self, y):
        return self.derivs(np.asarray(y, dtype=float), 0)

    def d(self, y, n):
        return self.derivs(np.asarray(y, dtype=float), n)

    @property
    def U_a(self):
        return float(self.derivs(np.array(self.a), 0))

    @property
    def curvature(self):
        return float(self.derivs(np.array(self.a), 2))

    def weighted_sup(self, y, values):
        """``sup_y exp(decay_weight * y) |values|``."""
        return float(np.max(np.exp(self.decay_weight * np.asarray(y)) * np.abs(values)))


def _gaussian_derivs(y, n):
    # d^n/dy^n [2y e^{-y^2}] = (-1)^n H_{n+1}(y) e^{-y^2}
    coef = np.zeros(n + 2)
    coef[n + 1] = 1.0
    return (-1) ** n * hermite.hermval(y, coef) * np.exp(-y * y)


def _gaussian_heat(t, y, n):
    # odd data on the half line: the free-space solution already vanishes at 0
    # u(t, y) = U(y / r) / s with s = 1 + 4t, r = sqrt(s)
    s = 1.0 + 4.0 * t
    r = np.sqrt(s)
    return _gaussian_derivs(np.asarray(y, dtype=float) / r, n) / (s * r**n)


def gaussian_shear_flow(decay_weight=0.5):
    """``U(y) = 2 y exp(-y^2)`` with critical point ``1/sqrt(2)``."""
    return BaseFlow(_gaussian_derivs, 1.0 / np.sqrt(2.0), decay_weight, _gaussian_heat, "2y exp(-y^2)")


def quadratic_flow(curvature, a, U_a=1.0, decay_weight=0.5):
    """``U(y) = U_a + curvature (y - a)^2 / 2``; locally exact Taylor test case."""

    def derivs(y, n):
        y = np.asarray(y, dtype=float)
        if n == 0:
            return U_a + 0.5 * curvature * (y - a) ** 2
        if n == 1:
            return curvature * (y - a)
        if n == 2:
            return np.full_like(y, curvature)
        return np.zeros_like(y)

    return BaseFlow(derivs, a, decay_weight, None, "quadratic")
