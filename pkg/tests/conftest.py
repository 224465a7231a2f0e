import numpy as np
import pytest

from shockshift import make_system


@pytest.fixture(scope="session")
def burgers_sys():
    return make_system("burgers")


@pytest.fixture(scope="session")
def isen_sys():
    return make_system("isentropic")


@pytest.fixture(scope="session")
def euler_sys():
    return make_system("euler")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS.values():
        terminalreporter.write_line(line)
