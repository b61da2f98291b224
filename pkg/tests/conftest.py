import numpy as np
import pytest

from hsplus.priors import PriorSpec

ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion; returns the verdict."""
    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
        request.config.stash[ACCEPTANCE_LINES].append(line)
        print(line)
        return passed

    return record


@pytest.fixture(params=["hs", "hs+"])
def family(request):
    return request.param


@pytest.fixture
def unit_hs():
    return PriorSpec("hs", 1.0)


@pytest.fixture
def unit_hsp():
    return PriorSpec("hs+", 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
