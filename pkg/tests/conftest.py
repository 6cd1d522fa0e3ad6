import sys
import numpy as np
import pytest

from lmarch import _accel
from lmarch.covariance import ReturnPanel
from lmarch.simulate import SimulationConfig, equicorrelation, simulate_dgp

BACKENDS = ["numpy"] + (["numba"] if _accel.HAS_NUMBA else [])


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def random_psd(rng, n, rank=None, scale=1.0):
    a = rng.standard_normal((n, rank or n + 2))
    return scale * a @ a.T / a.shape[1]


def panel_from(r):
    return ReturnPanel.from_array(np.asarray(r, dtype=float))


@pytest.fixture
def structured_panel():
    """Ten equicorrelated assets, long enough for a 60-day window."""
    cfg = SimulationConfig(10, 400, equicorrelation(10, 0.5, 1e-4), dof=5.0, seed=11)
    return simulate_dgp(cfg)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and getattr(mod, "RESULTS", None):
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
