import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from niopt import RandomStream, make_problem

settings.register_profile(
    "niopt", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("niopt")


class PinnedStream:
    """Stand-in stream returning fixed values, for checking update arithmetic."""

    def __init__(self, uniform=0.5, normal=0.0):
        self.u = uniform
        self.z = normal

    def random(self, size=None):
        return self.u if size is None else np.full(size, self.u)

    def normal(self, size=None):
        return self.z if size is None else np.full(size, self.z)

    def uniform(self, low=0.0, high=1.0, size=None):
        return low + (np.asarray(high) - low) * self.random(size)

    def integers(self, low, high=None, size=None):
        return np.full(size, low) if size is not None else low


@pytest.fixture
def pinned():
    return PinnedStream


@pytest.fixture
def stream():
    return RandomStream(12345)


@pytest.fixture
def sphere2():
    return make_problem("sphere", 2)


@pytest.fixture
def sphere5():
    return make_problem("sphere", 5)


# ---- acceptance summary: one PASS/FAIL line per criterion after the run ----

_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _ACCEPTANCE.append((props["criterion"], report.outcome, props.get("measured", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, measured in sorted(_ACCEPTANCE):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {measured}")
