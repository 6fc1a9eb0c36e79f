import numpy as np
import pytest

from prandtl_lab.baseflow import gaussian_shear_flow
from prandtl_lab.complexode import default_root, integrate_backward
from prandtl_lab.shear_layer import build_heteroclinic, build_V

# exact root of the shooting problem: tau = -exp(i pi / 4)
TAU_EXACT = -np.exp(1j * np.pi / 4)


@pytest.fixture(scope="session")
def root():
    return default_root()


@pytest.fixture(scope="session")
def traj(root):
    return integrate_backward(root.tau, root.z0, root.steps)


@pytest.fixture(scope="session")
def heteroclinic(root, traj):
    return build_heteroclinic(root, traj)


@pytest.fixture(scope="session")
def profile(heteroclinic):
    return build_V(heteroclinic)


@pytest.fixture(scope="session")
def flow():
    return gaussian_shear_flow()


_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def record():
    """Store one PASS/FAIL verdict per acceptance criterion."""

    def _record(n, ok, detail):
        prev = _ACCEPTANCE.get(n)
        if prev is not None:
            ok, detail = prev[0] and ok, f"{prev[1]}; {detail}"
        _ACCEPTANCE[n] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:>2d}: {detail}")
