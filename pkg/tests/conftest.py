import numpy as np
import pytest

from polariton_vg.greens import ThermalState
from polariton_vg.model import BathSpec, ModelParams, discretize_bath


@pytest.fixture
def params():
    return ModelParams()


@pytest.fixture
def room():
    return ThermalState(300.0)


@pytest.fixture
def theory_bath():
    return discretize_bath(BathSpec(lam=0.006, omega_f=0.006, n_modes=10_000))


@pytest.fixture
def small_params():
    # N = 40, M = 5 lattice; L chosen so the window spans a useful k range
    return ModelParams(N=40, M=5, L=600.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    report = getattr(mod, "REPORT", None)
    if not report:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(report):
        terminalreporter.write_line(report[n])
