import numpy as np
import pytest

import metamervol as mv


@pytest.fixture(scope="session")
def grid():
    return mv.CANONICAL_GRID


@pytest.fixture(scope="session")
def phi_d65(grid):
    return mv.colour_system("D65", grid)


@pytest.fixture(scope="session")
def psi_a(grid):
    return mv.colour_system("A", grid)


@pytest.fixture(scope="session")
def problem_d65_a(phi_d65, psi_a):
    return mv.grey_problem(phi_d65, psi_a, 0.5)


def toy_system(q=12, n=3, seed=0, grid_step=10.0):
    """Small random colour system with smooth positive-ish columns."""
    rng = np.random.default_rng(seed)
    g = mv.WavelengthGrid(400.0, 400.0 + grid_step * (q - 1), grid_step)
    lam = np.linspace(0.0, 1.0, q)
    cols = []
    for i in range(n):
        centre = rng.uniform(0.2, 0.8)
        width = rng.uniform(0.08, 0.3)
        amp = rng.uniform(0.5, 2.0)
        cols.append(amp * np.exp(-((lam - centre) ** 2) / (2 * width**2)))
    return mv.ColourSystem(g, np.stack(cols, axis=1))


@pytest.fixture
def toy():
    return toy_system()
