import math

import pytest
from hypothesis import HealthCheck, settings

from dpensemble.readout import CavityParams

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile("default")

TWO_PI = 2.0 * math.pi


@pytest.fixture
def fig2_cavity():
    """Readout cavity with kappa = 5e-5 w0, g = 0.01 w0, w_eg = 1.5 w0 at w0 = 2 pi 5 GHz."""
    w0 = TWO_PI * 5e9
    return CavityParams(omega0=w0, g=0.01 * w0, transition=1.5 * w0, gamma=2 * 5e-5 * w0)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.format_line(n))
