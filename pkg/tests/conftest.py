import numpy as np
import pytest

from benlab.grid import SpectralGrid
from benlab.spectral import SymbolParams

# One pass/fail line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return SymbolParams(alpha=1.0, beta=1.0)


@pytest.fixture
def small_grid():
    return SpectralGrid(modes=16, length=2.0 * np.pi)


def random_hyperplane_tuples(rng, k, samples, lo=1.0, hi=256.0):
    """(k, samples) array of signed log-uniform frequencies summing to zero."""
    mag = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(k - 1, samples)))
    sgn = rng.choice([-1.0, 1.0], size=(k - 1, samples))
    xs = mag * sgn
    return np.vstack([xs, -xs.sum(axis=0)])
