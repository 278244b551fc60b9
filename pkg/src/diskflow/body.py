"""Rigid disk state and prescribed motion paths.

The disk has radius eps and, in coupled mode, density rho_bar * eps^-(2+kappa)
so that mass/eps^2 diverges as the body shrinks; a disk's moment of inertia is
mass * radius^2 / 2. The rigid velocity field at a point x is
velocity + spin * (x - center)^perp with (x1, x2)^perp = (-x2, x1).

Prescribed paths are analytic in t. The default sweep path is a circle of
radius L/4 about the domain center traversed once per run, oriented to ride
the initial vortex (the stream-function bump spins clockwise for positive
amplitude), which keeps the body nearly co-moving with the ambient flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class BodyState:
    center: np.ndarray
    velocity: np.ndarray
    angle: float
    spin: float
    radius: float
    mass: float
    inertia: float

    def copy(self) -> "BodyState":
        return BodyState(self.center.copy(), self.velocity.copy(),
                         self.angle, self.spin, self.radius, self.mass, self.inertia)


def disk_mass(rho_bar: float, eps: float, density_exponent: float) -> float:
    """Mass of a disk of radius eps with density rho_bar * eps^-(2+kappa)."""
    return math.pi * rho_bar * eps ** (-density_exponent)


def disk_inertia(mass: float, eps: float) -> float:
    return 0.5 * mass * eps ** 2


@dataclass(frozen=True)
class StaticPath:
    point: tuple = (0.5, 0.5)
    angle0: float = 0.0

    def position(self, t: float) -> np.ndarray:
        return np.array(self.point, dtype=np.float64)

    def velocity(self, t: float) -> np.ndarray:
        return np.zeros(2)

    def angle(self, t: float) -> float:
        return self.angle0

    def spin(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class CirclePath:
    """Circle about `center`, angular rate in rad/s (negative = clockwise)."""

    center: tuple = (0.5, 0.5)
    radius: float = 0.25
    angular_rate: float = -4.0 * math.pi
    phase: float = 0.0
    spin_rate: float = 0.0

    def position(self, t: float) -> np.ndarray:
        th = self.phase + self.angular_rate * t
        return np.array([self.center[0] + self.radius * math.cos(th),
                         self.center[1] + self.radius * math.sin(th)])

    def velocity(self, t: float) -> np.ndarray:
        th = self.phase + self.angular_rate * t
        w = self.angular_rate * self.radius
        return np.array([-w * math.sin(th), w * math.cos(th)])

    def angle(self, t: float) -> float:
        return self.spin_rate * t

    def spin(self, t: float) -> float:
        return self.spin_rate


@dataclass(frozen=True)
class LinePath:
    start: tuple = (0.5, 0.5)
    direction: tuple = (0.0, -1.0)
    speed: float = 1.0

    def position(self, t: float) -> np.ndarray:
        d = np.array(self.direction, dtype=np.float64)
        return np.array(self.start, dtype=np.float64) + self.speed * t * d

    def velocity(self, t: float) -> np.ndarray:
        return self.speed * np.array(self.direction, dtype=np.float64)

    def angle(self, t: float) -> float:
        return 0.0

    def spin(self, t: float) -> float:
        return 0.0


def co_moving_circle(side: float, t_end: float, amplitude_sign: float = 1.0) -> CirclePath:
    """Default sweep path: radius L/4, one revolution over the run.

    For a positive stream-function amplitude the bump vortex circulates
    clockwise, so the path starts at (3L/4, L/2) heading in -y with speed
    2*pi*(L/4)/t_end, matching the ambient velocity there at t = 0.
    """
    rate = -2.0 * math.pi / t_end if amplitude_sign >= 0 else 2.0 * math.pi / t_end
    return CirclePath(center=(0.5 * side, 0.5 * side), radius=0.25 * side,
                      angular_rate=rate, phase=0.0)


def grazing_line(side: float, t_end: float, eps: float) -> LinePath:
    """Descend from the domain center until the disk surface sits eps/2 above
    the bottom wall at t_end; stresses the wall-adjacent penalization."""
    travel = 0.5 * side - 1.5 * eps
    if travel <= 0.0:
        raise ValueError(f"eps {eps} too large for a grazing descent in side {side}")
    return LinePath(start=(0.5 * side, 0.5 * side), direction=(0.0, -1.0),
                    speed=travel / t_end)
