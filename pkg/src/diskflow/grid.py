"""Uniform staggered (MAC) grid: cell-centered scalars, face-centered vectors.

The square domain [0, L]^2 is split into nx x ny square cells of side h = L/nx.
Scalar samples sit at cell centers ((i+1/2)h, (j+1/2)h). The x velocity
component u sits on vertical faces (i*h, (j+1/2)h), including the two wall
columns; the y component v sits on horizontal faces ((i+1/2)h, j*h). Arrays
are indexed [i, j] with i along x.

gradient/divergence form the compact two-point pair, adjoint up to sign for
fields supported away from the walls. perp_gradient routes a cell scalar
through node averages so that divergence(perp_gradient(psi)) cancels exactly,
face by face, in any arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Square uniform grid; nx == ny >= 8 cells, domain side `side`."""

    nx: int
    ny: int
    side: float = 1.0

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ValueError(f"grid must have at least 8 cells per side, got {self.nx}x{self.ny}")
        if self.nx != self.ny:
            raise ValueError(f"grid cells must be square on a square domain, got {self.nx}x{self.ny}")
        if not self.side > 0:
            raise ValueError(f"domain side must be positive, got {self.side}")

    @property
    def h(self) -> float:
        return self.side / self.nx

    # Coordinate arrays, all shaped for broadcasting against field values.
    def cell_x(self) -> np.ndarray:
        return (np.arange(self.nx)[:, None] + 0.5) * self.h

    def cell_y(self) -> np.ndarray:
        return (np.arange(self.ny)[None, :] + 0.5) * self.h

    def xface_x(self) -> np.ndarray:
        return np.arange(self.nx + 1)[:, None] * self.h

    def xface_y(self) -> np.ndarray:
        return (np.arange(self.ny)[None, :] + 0.5) * self.h

    def yface_x(self) -> np.ndarray:
        return (np.arange(self.nx)[:, None] + 0.5) * self.h

    def yface_y(self) -> np.ndarray:
        return np.arange(self.ny + 1)[None, :] * self.h


class ScalarField:
    """Cell-centered scalar samples, shape (nx, ny)."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.nx, grid.ny):
            raise ValueError(f"scalar values shape {values.shape} does not match grid {(grid.nx, grid.ny)}")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid, np.zeros((grid.nx, grid.ny)))

    @classmethod
    def full(cls, grid: GridSpec, value: float) -> "ScalarField":
        return cls(grid, np.full((grid.nx, grid.ny), float(value)))

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "ScalarField":
        return cls(grid, np.asarray(fn(grid.cell_x(), grid.cell_y()), dtype=np.float64)
                   * np.ones((grid.nx, grid.ny)))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


class VectorField:
    """Face-centered vector: u on vertical faces (nx+1, ny), v on horizontal (nx, ny+1)."""

    __slots__ = ("grid", "u", "v")

    def __init__(self, grid: GridSpec, u: np.ndarray, v: np.ndarray):
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        if u.shape != (grid.nx + 1, grid.ny):
            raise ValueError(f"u shape {u.shape} does not match x-face layout {(grid.nx + 1, grid.ny)}")
        if v.shape != (grid.nx, grid.ny + 1):
            raise ValueError(f"v shape {v.shape} does not match y-face layout {(grid.nx, grid.ny + 1)}")
        self.grid = grid
        self.u = u
        self.v = v

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1)))

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.u.copy(), self.v.copy())


class BodyMask:
    """Cell-centered weights in [0, 1]; 1 deep inside the body, 0 well outside."""

    __slots__ = ("grid", "weights", "center", "radius")

    def __init__(self, grid: GridSpec, weights: np.ndarray, center=None, radius: float = 0.0):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (grid.nx, grid.ny):
            raise ValueError(f"mask shape {weights.shape} does not match grid {(grid.nx, grid.ny)}")
        if weights.min() < 0.0 or weights.max() > 1.0:
            raise ValueError("mask weights must lie in [0, 1]")
        self.grid = grid
        self.weights = weights
        self.center = None if center is None else np.asarray(center, dtype=np.float64)
        self.radius = float(radius)

    def complement(self) -> np.ndarray:
        return 1.0 - self.weights


def body_mask(grid: GridSpec, center, radius: float) -> BodyMask:
    """Smoothed disk indicator: linear ramp of width h on the signed distance.

    Weight 1 for cell centers deeper than h/2 inside the disk, 0 farther than
    h/2 outside; cells outside the domain simply do not exist in the array, so
    a body overlapping the wall is clipped automatically.
    """
    cx, cy = float(center[0]), float(center[1])
    r = np.hypot(grid.cell_x() - cx, grid.cell_y() - cy)
    w = np.clip((radius + 0.5 * grid.h - r) / grid.h, 0.0, 1.0)
    return BodyMask(grid, w, center=(cx, cy), radius=radius)


def gradient(f: ScalarField) -> VectorField:
    """Two-point face gradient; wall faces get 0 (zero-flux ghost)."""
    g = f.grid
    u = np.zeros((g.nx + 1, g.ny))
    v = np.zeros((g.nx, g.ny + 1))
    u[1:-1, :] = np.diff(f.values, axis=0) / g.h
    v[:, 1:-1] = np.diff(f.values, axis=1) / g.h
    return VectorField(g, u, v)


def divergence(w: VectorField) -> ScalarField:
    g = w.grid
    d = np.diff(w.u, axis=0) / g.h + np.diff(w.v, axis=1) / g.h
    return ScalarField(g, d)


def perp_gradient(psi: ScalarField) -> VectorField:
    """Rotated gradient (-d_y psi, d_x psi) with exactly vanishing divergence.

    Cell samples are averaged to the four surrounding nodes (edge-replicated
    at the walls), then differenced along each face. The divergence of the
    result telescopes over the four node values of each cell and cancels
    identically, so stream-function fields are discretely solenoidal.
    """
    g = psi.grid
    pad = np.pad(psi.values, 1, mode="edge")
    nodes = 0.25 * (pad[:-1, :-1] + pad[1:, :-1] + pad[:-1, 1:] + pad[1:, 1:])
    u = -(nodes[:, 1:] - nodes[:, :-1]) / g.h
    v = (nodes[1:, :] - nodes[:-1, :]) / g.h
    return VectorField(g, u, v)


def laplacian(f: ScalarField) -> ScalarField:
    """5-point Laplacian; zero-flux (replicated) ghost cells at the walls."""
    g = f.grid
    pad = np.pad(f.values, 1, mode="edge")
    lap = (pad[:-2, 1:-1] + pad[2:, 1:-1] + pad[1:-1, :-2] + pad[1:-1, 2:]
           - 4.0 * pad[1:-1, 1:-1]) / g.h ** 2
    return ScalarField(g, lap)


def vector_laplacian(w: VectorField) -> VectorField:
    """Component-wise 5-point Laplacian on the face layouts.

    Tangential wall neighbors use odd reflection (no-slip wall value zero);
    normal components on the wall itself are returned as 0, since those faces
    are held by the boundary condition rather than evolved.
    """
    g = w.grid
    h2 = g.h ** 2

    up = np.empty((g.nx + 1, g.ny + 2))
    up[:, 1:-1] = w.u
    up[:, 0] = -w.u[:, 0]
    up[:, -1] = -w.u[:, -1]
    lu = np.zeros_like(w.u)
    lu[1:-1, :] = (up[:-2, 1:-1] + up[2:, 1:-1] + up[1:-1, :-2] + up[1:-1, 2:]
                   - 4.0 * up[1:-1, 1:-1])[:, :] / h2

    vp = np.empty((g.nx + 2, g.ny + 1))
    vp[1:-1, :] = w.v
    vp[0, :] = -w.v[0, :]
    vp[-1, :] = -w.v[-1, :]
    lv = np.zeros_like(w.v)
    lv[:, 1:-1] = (vp[:-2, 1:-1] + vp[2:, 1:-1] + vp[1:-1, :-2] + vp[1:-1, 2:]
                   - 4.0 * vp[1:-1, 1:-1])[:, :] / h2
    return VectorField(g, lu, lv)


def velocity_gradients(w: VectorField):
    """MAC gradient samples of a face field: normal parts at cells, shear at nodes.

    Returns (du/dx cells, dv/dy cells, du/dy nodes, dv/dx nodes). Tangential
    derivatives at wall nodes use odd reflection (field value zero on walls).
    """
    g = w.grid
    h = g.h
    dudx = np.diff(w.u, axis=0) / h
    dvdy = np.diff(w.v, axis=1) / h

    dudy = np.empty((g.nx + 1, g.ny + 1))
    dudy[:, 1:-1] = np.diff(w.u, axis=1) / h
    dudy[:, 0] = 2.0 * w.u[:, 0] / h
    dudy[:, -1] = -2.0 * w.u[:, -1] / h

    dvdx = np.empty((g.nx + 1, g.ny + 1))
    dvdx[1:-1, :] = np.diff(w.v, axis=0) / h
    dvdx[0, :] = 2.0 * w.v[0, :] / h
    dvdx[-1, :] = -2.0 * w.v[-1, :] / h
    return dudx, dvdy, dudy, dvdx


def norm_lp(f: ScalarField, p: float, weights: np.ndarray | None = None) -> float:
    """L^p norm of a cell field; optional weights multiply the cell measures.

    Pass 1 - mask.weights to integrate over the fluid region only. p = inf
    returns the sup over cells with nonzero weight.
    """
    if not p >= 1.0:
        raise ValueError(f"norm order must satisfy p >= 1, got {p}")
    vals = np.abs(f.values)
    if np.isinf(p):
        if weights is None:
            return float(vals.max())
        sel = weights > 0.0
        return float(vals[sel].max()) if np.any(sel) else 0.0
    meas = f.grid.h ** 2 if weights is None else weights * f.grid.h ** 2
    return float(np.sum(vals ** p * meas) ** (1.0 / p))


def _face_quadrature_weights(grid: GridSpec):
    """Trapezoid-style face weights: 1 on interior faces, 1/2 on the walls."""
    wu = np.ones((grid.nx + 1, grid.ny))
    wu[0, :] = 0.5
    wu[-1, :] = 0.5
    wv = np.ones((grid.nx, grid.ny + 1))
    wv[:, 0] = 0.5
    wv[:, -1] = 0.5
    return wu, wv


def norm_l2(w: VectorField) -> float:
    g = w.grid
    wu, wv = _face_quadrature_weights(g)
    return float(np.sqrt((np.sum(w.u ** 2 * wu) + np.sum(w.v ** 2 * wv)) * g.h ** 2))


def grad_norm_sq(w: VectorField) -> float:
    """Integral of |grad w|^2 using interior difference stencils only."""
    g = w.grid
    h = g.h
    dudx = np.diff(w.u, axis=0) / h            # cell centers
    dudy = np.diff(w.u, axis=1) / h            # interior nodes, all columns
    dvdy = np.diff(w.v, axis=1) / h
    dvdx = np.diff(w.v, axis=0) / h
    # Node-positioned samples carry half weight on wall-adjacent columns/rows.
    wu = np.ones_like(dudy)
    wu[0, :] = 0.5
    wu[-1, :] = 0.5
    wv = np.ones_like(dvdx)
    wv[:, 0] = 0.5
    wv[:, -1] = 0.5
    total = (np.sum(dudx ** 2) + np.sum(dvdy ** 2)
             + np.sum(dudy ** 2 * wu) + np.sum(dvdx ** 2 * wv))
    return float(total * h ** 2)


def norm_w12(w: VectorField) -> float:
    """Sobolev norm sqrt(||w||_L2^2 + ||grad w||_L2^2)."""
    return float(np.sqrt(norm_l2(w) ** 2 + grad_norm_sq(w)))


def dot_cells(f: ScalarField, d: ScalarField) -> float:
    return float(np.sum(f.values * d.values) * f.grid.h ** 2)


def dot_faces(a: VectorField, b: VectorField) -> float:
    g = a.grid
    wu, wv = _face_quadrature_weights(g)
    return float((np.sum(a.u * b.u * wu) + np.sum(a.v * b.v * wv)) * g.h ** 2)
