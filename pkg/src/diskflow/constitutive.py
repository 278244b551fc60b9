"""Isentropic gas law, Bregman-style relative energy, and viscous stress.

Pressure p = a*rho^gamma with gamma > 1. The pressure potential
P(rho) = a/(gamma-1)*rho^gamma satisfies rho*P'(rho) - P(rho) = p(rho), and the
relative energy P(rho) - P'(rho_bar)(rho - rho_bar) - P(rho_bar) is the
nonnegative convexity gap used to weigh density deviations; it is scaled by
1/eps^(2m) in the energy budget. The stress is the 2D trace-free split
S = mu*(grad u + grad u^T - div u I) + lam*div u I, so the dissipation density
splits into (mu/2)|grad u + grad u^T - div u I|^2 + lam*(div u)^2 >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FluidParams:
    """Gas and scaling parameters; eps is the body radius, m the Mach exponent."""

    a: float = 0.5
    gamma: float = 2.0
    mu: float = 0.02
    lam: float = 0.0
    rho_bar: float = 1.0
    eps: float = 0.1
    m: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"pressure coefficient a must be positive, got {self.a}")
        if not self.gamma > 1:
            raise ValueError(f"adiabatic exponent must exceed 1, got {self.gamma}")
        if not self.mu > 0:
            raise ValueError(f"shear viscosity must be positive, got {self.mu}")
        if self.lam < 0:
            raise ValueError(f"bulk viscosity must be nonnegative, got {self.lam}")
        if not self.rho_bar > 0:
            raise ValueError(f"reference density must be positive, got {self.rho_bar}")
        if not 0 < self.eps:
            raise ValueError(f"body radius must be positive, got {self.eps}")
        if not self.m > 0:
            raise ValueError(f"Mach exponent must be positive, got {self.m}")

    @property
    def theorem_regime(self) -> bool:
        """True when min(m, 2m/gamma) > 3, the asymptotic-statement regime."""
        return min(self.m, 2.0 * self.m / self.gamma) > 3.0

    @property
    def mach_scale(self) -> float:
        """eps^m, the factor by which the sound speed is inflated (1/this)."""
        return self.eps ** self.m

    def sound_speed(self, rho) -> np.ndarray:
        """Scaled sound speed sqrt(a*gamma*rho^(gamma-1)) / eps^m."""
        rho = np.asarray(rho)
        return np.sqrt(self.a * self.gamma * rho ** (self.gamma - 1.0)) / self.mach_scale


def _values(f):
    return np.asarray(getattr(f, "values", f), dtype=np.float64)


def pressure(params: FluidParams, rho) -> np.ndarray:
    return params.a * _values(rho) ** params.gamma


def pressure_potential(params: FluidParams, rho) -> np.ndarray:
    return params.a / (params.gamma - 1.0) * _values(rho) ** params.gamma


def relative_energy(params: FluidParams, rho) -> np.ndarray:
    """Convexity gap of the pressure potential around rho_bar; >= 0, = 0 at rho_bar."""
    rho = _values(rho)
    rb = params.rho_bar
    dP_rb = params.a * params.gamma / (params.gamma - 1.0) * rb ** (params.gamma - 1.0)
    return (pressure_potential(params, rho)
            - dP_rb * (rho - rb)
            - params.a / (params.gamma - 1.0) * rb ** params.gamma)


def stress(params: FluidParams, g11, g12, g21, g22):
    """Viscous stress from the velocity gradient components g_ij = d_j u_i.

    Returns (S11, S12, S22); the tensor is symmetric. Works pointwise on
    arrays of any matching shape.
    """
    g11 = np.asarray(g11, dtype=np.float64)
    g12 = np.asarray(g12, dtype=np.float64)
    g21 = np.asarray(g21, dtype=np.float64)
    g22 = np.asarray(g22, dtype=np.float64)
    div = g11 + g22
    s11 = params.mu * (2.0 * g11 - div) + params.lam * div
    s22 = params.mu * (2.0 * g22 - div) + params.lam * div
    s12 = params.mu * (g12 + g21)
    return s11, s12, s22


def dissipation_density(params: FluidParams, g11, g12, g21, g22) -> np.ndarray:
    """S(grad u):grad u in the manifestly nonnegative split form.

    With D = grad u + grad u^T - div u I (trace-free in 2D, D11 = -D22),
    the contraction equals (mu/2)|D|^2 + lam*(div u)^2.
    """
    g11 = np.asarray(g11, dtype=np.float64)
    g12 = np.asarray(g12, dtype=np.float64)
    g21 = np.asarray(g21, dtype=np.float64)
    g22 = np.asarray(g22, dtype=np.float64)
    div = g11 + g22
    d11 = g11 - g22
    d12 = g12 + g21
    return params.mu * (d11 ** 2 + d12 ** 2) + params.lam * div ** 2


def essential_residual_split(f, rho, params: FluidParams):
    """Split f into the part carried where rho sits in [rho_bar/2, 2 rho_bar].

    The window is closed on both ends. ess + res == f exactly and the two
    parts have disjoint supports, so ess * res == 0 pointwise.
    """
    f = np.asarray(f, dtype=np.float64)
    rho = _values(rho)
    window = (rho >= 0.5 * params.rho_bar) & (rho <= 2.0 * params.rho_bar)
    ess = np.where(window, f, 0.0)
    res = np.where(window, 0.0, f)
    return ess, res


def clamp_density(rho: np.ndarray):
    """Clamp negative densities to zero in place; returns (count, most_negative)."""
    neg = rho < 0.0
    count = int(np.count_nonzero(neg))
    worst = float(rho.min()) if count else 0.0
    if count:
        np.maximum(rho, 0.0, out=rho)
    return count, worst
