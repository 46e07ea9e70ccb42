"""Shared test fixtures: canonical scenes, carriers, panels."""

import numpy as np
import pytest

from risray import (
    AreaSpec,
    CarrierSpec,
    Material,
    RisPanel,
    Scene,
    Surface,
    build_factory,
)

BIG = 200.0  # wall half-extent for the two-wall oracle scene


@pytest.fixture(scope="session")
def factory() -> Scene:
    return build_factory()


@pytest.fixture(scope="session")
def carrier37() -> CarrierSpec:
    return CarrierSpec(frequency=3.7e9)


@pytest.fixture(scope="session")
def carrier27() -> CarrierSpec:
    return CarrierSpec(frequency=27.0e9)


@pytest.fixture(scope="session")
def lossless() -> Material:
    return Material("glass", eps_r=5.0)


def make_two_wall() -> Scene:
    """Two large parallel walls at x=0 and x=5, normals along +-x.

    With tx=(1,0,1), rx=(4,0,1) the image method gives exactly five paths
    up to order 2 with unfolded lengths 3, 5, 5, 7, 13.
    """
    mats = {"glass": Material("glass", eps_r=5.0, trans_loss_db=10.0)}
    walls = [
        Surface((0.0, -BIG, -BIG), (0.0, 2 * BIG, 0.0), (0.0, 0.0, 2 * BIG),
                "glass"),
        Surface((5.0, -BIG, -BIG), (0.0, 2 * BIG, 0.0), (0.0, 0.0, 2 * BIG),
                "glass"),
    ]
    return Scene(surfaces=walls, materials=mats)


@pytest.fixture(scope="session")
def two_wall() -> Scene:
    return make_two_wall()


@pytest.fixture(scope="session")
def empty_scene() -> Scene:
    return Scene(surfaces=[], materials={})


@pytest.fixture
def panel_3g7(carrier37) -> RisPanel:
    lam = carrier37.wavelength
    return RisPanel(center=np.array([25.0, 39.95, 4.3]),
                    normal=np.array([0.0, -1.0, 0.0]),
                    x_axis=np.array([1.0, 0.0, 0.0]),
                    nx=32, ny=32, dx=lam / 2.0, dy=lam / 2.0)


@pytest.fixture
def small_area() -> AreaSpec:
    return AreaSpec(origin=(15.0, 29.0), extent_x=8.0, extent_y=4.0,
                    resolution=2.0, ms_height=1.5)


def random_unit(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def perp_unit(rng, n) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        v -= np.dot(v, n) * n
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            return v / nv


def front_direction(rng, normal, x_axis, y_axis, max_theta=1.2):
    """Unit vector on the illuminated half-space, within max_theta of the
    normal."""
    theta = rng.uniform(0.0, max_theta)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return (np.cos(theta) * normal
            + np.sin(theta) * (np.cos(phi) * x_axis + np.sin(phi) * y_axis))
