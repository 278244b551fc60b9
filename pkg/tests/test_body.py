"""Disk state, mass scaling, prescribed paths."""

import math

import numpy as np
import pytest

from diskflow.body import (BodyState, CirclePath, LinePath, StaticPath,
                           co_moving_circle, disk_mass, disk_inertia,
                           grazing_line)
from diskflow.grid import GridSpec
from diskflow.initial import initial_velocity


def test_disk_mass_scaling():
    # density rho_bar * eps^-(2+kappa) over area pi*eps^2
    assert disk_mass(1.0, 0.1, 0.5) == pytest.approx(math.pi * 0.1 ** -0.5)
    assert disk_mass(2.0, 1.0, 0.5) == pytest.approx(2.0 * math.pi)
    # mass grows without bound as the disk shrinks when kappa > 0
    assert disk_mass(1.0, 0.01, 0.5) > disk_mass(1.0, 0.1, 0.5)


def test_disk_inertia():
    m = disk_mass(1.0, 0.1, 0.5)
    assert disk_inertia(m, 0.1) == pytest.approx(0.5 * m * 0.01)


def test_body_state_copy_isolated():
    b = BodyState(center=np.array([0.5, 0.5]), velocity=np.array([1.0, 0.0]),
                  angle=0.1, spin=2.0, radius=0.1, mass=1.0, inertia=0.005)
    c = b.copy()
    c.center[0] = 9.0
    c.spin = -1.0
    assert b.center[0] == 0.5
    assert b.spin == 2.0


def test_static_path():
    p = StaticPath(point=(0.3, 0.7), angle0=1.2)
    np.testing.assert_array_equal(p.position(5.0), [0.3, 0.7])
    np.testing.assert_array_equal(p.velocity(5.0), [0.0, 0.0])
    assert p.angle(5.0) == 1.2
    assert p.spin(5.0) == 0.0


def test_circle_path_kinematics():
    p = CirclePath(center=(0.5, 0.5), radius=0.25, angular_rate=2.0, phase=0.0)
    np.testing.assert_allclose(p.position(0.0), [0.75, 0.5])
    # velocity is the time derivative of position (finite-difference check)
    dt = 1e-6
    for t in (0.0, 0.3, 1.7):
        fd = (p.position(t + dt) - p.position(t - dt)) / (2.0 * dt)
        np.testing.assert_allclose(p.velocity(t), fd, atol=1e-6)
    # speed is |rate| * radius at all times
    assert np.hypot(*p.velocity(0.42)) == pytest.approx(0.5)


def test_circle_path_spin():
    p = CirclePath(spin_rate=3.0)
    assert p.spin(2.0) == 3.0
    assert p.angle(2.0) == pytest.approx(6.0)


def test_line_path():
    p = LinePath(start=(0.5, 0.9), direction=(0.0, -1.0), speed=0.4)
    np.testing.assert_allclose(p.position(1.0), [0.5, 0.5])
    np.testing.assert_allclose(p.velocity(123.0), [0.0, -0.4])


def test_co_moving_circle_rides_the_vortex():
    # the path should start where the ambient bump flow points the same way:
    # at (3L/4, L/2) the start velocity is straight down for amplitude > 0
    side, t_end = 1.0, 0.5
    path = co_moving_circle(side, t_end)
    np.testing.assert_allclose(path.position(0.0), [0.75, 0.5])
    v0 = path.velocity(0.0)
    assert v0[1] < 0.0 and abs(v0[0]) < 1e-12
    assert np.hypot(*v0) == pytest.approx(2.0 * math.pi * 0.25 / t_end)

    grid = GridSpec(nx=256, ny=256)
    vel = initial_velocity(grid, 1.0)
    i = int(round(0.75 / grid.h))
    j = int(0.5 / grid.h)
    ambient_v = 0.5 * (vel.v[i, j] + vel.v[i - 1, j])
    # same sign and same order of magnitude as the path start velocity
    assert ambient_v < 0.0
    # one revolution per run
    np.testing.assert_allclose(path.position(t_end), path.position(0.0), atol=1e-12)


def test_grazing_line_geometry():
    side, t_end, eps = 1.0, 0.5, 0.1
    path = grazing_line(side, t_end, eps)
    end = path.position(t_end)
    # disk surface ends eps/2 above the bottom wall
    assert end[1] - eps == pytest.approx(0.5 * eps)
    assert end[0] == 0.5
    with pytest.raises(ValueError):
        grazing_line(1.0, 0.5, 0.4)
