import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fracpow import EllipticCoeffs, EllipticOperator, GridSpec  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def grid8():
    return GridSpec.square(8)


@pytest.fixture(scope="session")
def laplace8(grid8):
    return EllipticOperator(grid8)


@pytest.fixture(scope="session")
def variable_op():
    grid = GridSpec(9, 7, 1.3, 0.8)
    coeffs = EllipticCoeffs(
        a=lambda x1, x2: 1.0 + 0.5 * np.sin(3 * x1) * np.cos(2 * x2) ** 2,
        c=lambda x1, x2: x1 * x2,
    )
    return EllipticOperator(grid, coeffs)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
