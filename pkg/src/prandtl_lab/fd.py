"""Finite-difference weights on arbitrary nodes."""

import numpy as np


def fornberg(x0, x, m):
    """Weights for derivatives 0..m at ``x0`` from nodes ``x``.

    Returns an array ``c`` of shape ``(m + 1, len(x))`` such that
    ``c[k] @ f(x)`` approximates ``f^{(k)}(x0)``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def to_banded(rows, kl, ku, n):
    """Pack ``{row: (cols, vals)}`` into LAPACK general band storage.

    The result has ``2*kl + ku + 1`` rows so it can be handed straight to
    ``gbtrf`` (the top ``kl`` rows are workspace).
    """
    ab = np.zeros((2 * kl + ku + 1, n), dtype=complex)
    for i, (cols, vals) in rows.items():
        for j, v in zip(cols, vals):
            if abs(j - i) > max(kl, ku) or j - i > ku or i - j > kl:
                raise ValueError(f"entry ({i}, {j}) outside band")
            ab[kl + ku + i - j, j] += v
    return ab


def banded_matvec(ab, kl, ku, x):
    """Multiply a matrix in ``gbtrf`` layout by ``x``."""
    n = ab.shape[1]
    out = np.zeros(n, dtype=np.result_type(ab, x))
    for d in range(-kl, ku + 1):
        row = ab[kl + ku - d]
        if d >= 0:
            out[: n - d] += row[d:] * x[d:]
        else:
            out[-d:] += row[: n + d] * x[: n + d]
    return out
