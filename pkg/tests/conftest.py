import numpy as np
import pytest

from spinboson_fba import BoundarySide, ModelParams, OpenChain, ReflectionParams, TwistConfig, TwistedChain

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def model():
    return ModelParams(0.7, 0.31, 0.23, 1.1, 0.8, dim_boson=24, margin=4)


@pytest.fixture(scope="session")
def twist():
    return TwistConfig(np.array([[1.2, 0.3], [0.1 + 0.2j, 0.9]]))


@pytest.fixture(scope="session")
def reflection():
    return ReflectionParams(BoundarySide(0.9, 0.35, 0.2), BoundarySide(0.65, 0.4, -0.15))


@pytest.fixture(scope="session")
def diag_reflection():
    return ReflectionParams(BoundarySide.diagonal(0.9), BoundarySide.diagonal(0.65))


@pytest.fixture(scope="session")
def twisted_chain(model, twist):
    return TwistedChain(model, twist)


@pytest.fixture(scope="session")
def open_chain(model, reflection):
    return OpenChain(model, reflection)


@pytest.fixture(scope="session")
def diag_chain(model, diag_reflection):
    return OpenChain(model, diag_reflection)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
