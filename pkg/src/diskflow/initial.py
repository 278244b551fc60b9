"""Shared initial data: a wall-flat stream function and its rotated gradient.

The base profile is sin^2(pi x/L) sin^2(pi y/L), so the stream function and
its gradient both vanish on the walls and the induced velocity is tangential
to (in fact zero at) the boundary. Optional perturbation modes keep the same
wall-flat structure, so every perturbed sample stays admissible no-slip data.
"""

import numpy as np

from .grid import GridSpec, ScalarField, VectorField, perp_gradient

# Extra stream modes mixed in when a perturbation amplitude is requested.
_PERTURBATION_MODES = ((2, 1), (1, 2), (2, 2))


def stream_bump(grid: GridSpec, amplitude: float, perturbation: float = 0.0,
                seed: int = 0) -> ScalarField:
    """Cell-centered stream function, amplitude-scaled, optionally perturbed."""
    x = grid.cell_x()
    y = grid.cell_y()
    sx = np.sin(np.pi * x / grid.side)
    sy = np.sin(np.pi * y / grid.side)
    psi = amplitude * (sx * sx) * (sy * sy)
    if perturbation != 0.0:
        rng = np.random.default_rng(seed)
        for kx, ky in _PERTURBATION_MODES:
            coeff = perturbation * amplitude * rng.uniform(-1.0, 1.0)
            mx = np.sin(kx * np.pi * x / grid.side)
            my = np.sin(ky * np.pi * y / grid.side)
            psi = psi + coeff * (mx * mx) * (my * my)
    return ScalarField(grid, psi)


def initial_velocity(grid: GridSpec, amplitude: float, perturbation: float = 0.0,
                     seed: int = 0) -> VectorField:
    """Divergence-free no-slip start field: rotated gradient of the bump."""
    return perp_gradient(stream_bump(grid, amplitude, perturbation, seed))
