import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from prandtl_lab.fd import banded_matvec, fornberg, to_banded


def test_fornberg_central_second_derivative():
    c = fornberg(0.0, np.array([-1.0, 0.0, 1.0]), 2)
    np.testing.assert_allclose(c[2], [1.0, -2.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(c[1], [-0.5, 0.0, 0.5], atol=1e-14)
    np.testing.assert_allclose(c[0], [0.0, 1.0, 0.0], atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 1.0), min_size=4, max_size=4), st.floats(-0.5, 0.5))
def test_fornberg_exact_on_cubics(gaps, x0):
    x = np.cumsum([0.0] + gaps) - 1.0
    c = fornberg(x0, x, 3)
    p = np.polynomial.Polynomial([0.3, -1.2, 0.7, 2.0])
    for m in range(4):
        assert abs(c[m] @ p(x) - p.deriv(m)(x0)) < 1e-8 * (1 + abs(p.deriv(m)(x0))) / min(gaps) ** m


def test_banded_matvec_matches_dense():
    rng = np.random.default_rng(1)
    n, kl, ku = 9, 2, 1
    dense = np.zeros((n, n), dtype=complex)
    rows = {}
    for i in range(n):
        cols = list(range(max(0, i - kl), min(n, i + ku + 1)))
        vals = rng.normal(size=len(cols)) + 1j * rng.normal(size=len(cols))
        dense[i, cols] = vals
        rows[i] = (cols, vals)
    ab = to_banded(rows, kl, ku, n)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    np.testing.assert_allclose(banded_matvec(ab, kl, ku, x), dense @ x, atol=1e-13)
