import numpy as np
import pytest

from specrecon.grids import Potential, grid_2pi
from specrecon.halfinv import full_dirichlet_spectrum

PI = np.pi


@pytest.fixture(scope="session")
def g2pi():
    return grid_2pi(4096)


@pytest.fixture(scope="session")
def cos_composite(g2pi):
    """cos x on (0, pi), zero on (pi, 2 pi), with its Dirichlet spectrum."""
    q = Potential.from_callable(lambda x: np.cos(x) if x < PI else 0.0, g2pi,
                                tag="cos|zero")
    return q, full_dirichlet_spectrum(q, 44)


@pytest.fixture(scope="session")
def ramp_composite(g2pi):
    """(1+i) x/pi on (0, pi), zero on (pi, 2 pi), with its spectrum."""
    q = Potential.from_callable(
        lambda x: (1 + 1j) * x / PI if x < PI else 0.0, g2pi, tag="ramp|zero")
    return q, full_dirichlet_spectrum(q, 44)


@pytest.fixture(scope="session")
def one_2pi_spectrum(g2pi):
    q = Potential.constant(1.0, g2pi)
    return q, full_dirichlet_spectrum(q, 44)
