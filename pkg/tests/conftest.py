import numpy as np
import pytest

from plbounds.domains import (
    boundary_polyline,
    make_epicycloid,
    make_unit_disc,
    unit_square,
)
from plbounds.meshing import triangulate


@pytest.fixture(scope="session")
def disc():
    return make_unit_disc()


@pytest.fixture(scope="session")
def epi3():
    return make_epicycloid(3)


@pytest.fixture(scope="session")
def square_curve():
    return unit_square()


@pytest.fixture(scope="session")
def disc_curve():
    return boundary_polyline(make_unit_disc(), 128)


@pytest.fixture(scope="session")
def square_mesh(square_curve):
    return triangulate(square_curve, 0.2)


@pytest.fixture(scope="session")
def tiny_square_mesh(square_curve):
    # a handful of nodes; cheap enough for per-coordinate finite differences
    return triangulate(square_curve, 0.35)


@pytest.fixture(scope="session")
def disc_mesh(disc_curve):
    return triangulate(disc_curve, 0.12)


def regular_ngon(n, radius=1.0):
    th = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([radius * np.cos(th), radius * np.sin(th)])
