import numpy as np
import pytest

from jsta import spdc
from jsta.core.grids import ComplexField2D, FrequencyGrid


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grids():
    return spdc.default_grids()


@pytest.fixture(scope="session")
def small_grids():
    return spdc.default_grids(128, 6.4e-4)


def gaussian_field(n=64, spacing=0.05, width=0.25, seed=0, chirp=0.0):
    """Band-limited Gaussian test field on a square grid."""
    g = FrequencyGrid(n, spacing)
    a, b = np.meshgrid(g.values, g.values, indexing="ij")
    rng = np.random.default_rng(seed)
    ph = chirp * a * b + rng.normal() * a ** 2 + rng.normal() * b
    v = np.exp(-(a ** 2 + b ** 2) / (2 * width ** 2)) * np.exp(1j * ph)
    return ComplexField2D(g, g, v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def analytic_gradient(phi, grid_s, grid_i, axis, shear, mask):
    """GradientField with values ``phi(nu) - phi(nu + shear)`` from a callable phase."""
    from jsta.retrieval.gradient import GradientField
    s, i = np.meshgrid(grid_s.values, grid_i.values, indexing="ij")
    if axis == "signal":
        v = phi(s, i) - phi(s + shear, i)
    else:
        v = phi(s, i) - phi(s, i + shear)
    return GradientField(axis, v, mask, shear, grid_s, grid_i)


def disc_mask(grid_s, grid_i, radius):
    s, i = np.meshgrid(grid_s.values, grid_i.values, indexing="ij")
    return s ** 2 + i ** 2 <= radius ** 2
