import numpy as np
import pytest

from hybridqubit.hubbard import DotParameters, silicon_parameters

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def silicon():
    return silicon_parameters(1.0, 1.0)


def random_parameters(rng, scale=1.0):
    names = DotParameters.field_names()
    vals = {n: float(rng.uniform(0, 2 * scale) if n.startswith("U") else rng.uniform(-scale, scale))
            for n in names}
    return DotParameters(**vals)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
