import numpy as np
import pytest

from diriter import Domain, build_grid


@pytest.fixture
def unit_square():
    return Domain.rectangle(1.0, 1.0)


@pytest.fixture
def unit_grid_16(unit_square):
    return build_grid(unit_square, 1.0 / 16)


@pytest.fixture
def unit_grid_32(unit_square):
    return build_grid(unit_square, 1.0 / 32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_conforming(grid, rng, modes=3):
    """Random smooth field with exactly zero boundary values."""
    X, Y = grid.meshgrid()
    sx = (X - grid.x[0]) / grid.extent_x
    sy = (Y - grid.y[0]) / grid.extent_y
    vals = np.zeros(grid.shape)
    coeffs = rng.uniform(-1.0, 1.0, size=(modes, modes))
    for p in range(1, modes + 1):
        for q in range(1, modes + 1):
            vals += coeffs[p - 1, q - 1] * np.sin(p * np.pi * sx) * np.sin(q * np.pi * sy)
    return grid.field(vals)


def random_smooth(grid, rng, modes=3):
    """Random smooth field, nonzero on the boundary."""
    X, Y = grid.meshgrid()
    sx = (X - grid.x[0]) / grid.extent_x
    sy = (Y - grid.y[0]) / grid.extent_y
    vals = np.zeros(grid.shape)
    for _ in range(modes):
        ax, ay, ph1, ph2 = rng.uniform(-1, 1, 4)
        vals += ax * np.cos(np.pi * (sx + ph1)) * np.cos(2 * np.pi * (sy + ph2)) + ay * np.sin(
            2 * np.pi * sx + ph1
        )
    return grid.field(vals)
