"""Flat binary and CSV serialization for grid fields.

Binary layout: a 24-byte header of little-endian 64-bit values (nx as int64,
ny as int64, domain side as float64) followed by row-major float64 samples.
Scalar files carry the nx*ny cell block; vector files carry the (nx+1)*ny
x-face block followed by the nx*(ny+1) y-face block. CSV export writes
(x, y, value) rows at the sample coordinates for plotting.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .grid import GridSpec, ScalarField, VectorField

_HEADER = struct.Struct("<qqd")


def _write_header(fh, grid: GridSpec):
    fh.write(_HEADER.pack(grid.nx, grid.ny, grid.side))


def _read_header(fh, path) -> GridSpec:
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise ValueError(f"truncated field header in {path}")
    nx, ny, side = _HEADER.unpack(raw)
    return GridSpec(nx=int(nx), ny=int(ny), side=float(side))


def _read_block(fh, count: int, path) -> np.ndarray:
    data = np.fromfile(fh, dtype="<f8", count=count)
    if data.size != count:
        raise ValueError(f"truncated field payload in {path}: expected {count} samples, got {data.size}")
    return data


def write_scalar(path, field: ScalarField) -> None:
    with open(path, "wb") as fh:
        _write_header(fh, field.grid)
        np.ascontiguousarray(field.values, dtype="<f8").tofile(fh)


def read_scalar(path) -> ScalarField:
    with open(path, "rb") as fh:
        grid = _read_header(fh, path)
        data = _read_block(fh, grid.nx * grid.ny, path)
    return ScalarField(grid, data.reshape(grid.nx, grid.ny))


def write_vector(path, field: VectorField) -> None:
    with open(path, "wb") as fh:
        _write_header(fh, field.grid)
        np.ascontiguousarray(field.u, dtype="<f8").tofile(fh)
        np.ascontiguousarray(field.v, dtype="<f8").tofile(fh)


def read_vector(path) -> VectorField:
    with open(path, "rb") as fh:
        grid = _read_header(fh, path)
        u = _read_block(fh, (grid.nx + 1) * grid.ny, path)
        v = _read_block(fh, grid.nx * (grid.ny + 1), path)
    return VectorField(grid, u.reshape(grid.nx + 1, grid.ny), v.reshape(grid.nx, grid.ny + 1))


def _write_xyv(path, xs, ys, vals):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for x, y, v in zip(xs.ravel(), ys.ravel(), vals.ravel()):
            w.writerow([f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"])


def scalar_to_csv(path, field: ScalarField) -> None:
    g = field.grid
    x = np.broadcast_to(g.cell_x(), field.values.shape)
    y = np.broadcast_to(g.cell_y(), field.values.shape)
    _write_xyv(path, x, y, field.values)


def vector_to_csv(path_u, path_v, field: VectorField) -> None:
    """One (x, y, value) file per component, at the face sample points."""
    g = field.grid
    xu = np.broadcast_to(g.xface_x(), field.u.shape)
    yu = np.broadcast_to(g.xface_y(), field.u.shape)
    _write_xyv(path_u, xu, yu, field.u)
    xv = np.broadcast_to(g.yface_x(), field.v.shape)
    yv = np.broadcast_to(g.yface_y(), field.v.shape)
    _write_xyv(path_v, xv, yv, field.v)


def read_xyv_csv(path) -> np.ndarray:
    """Read an (x, y, value) CSV back as an (n, 3) float array."""
    rows = []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header != ["x", "y", "value"]:
            raise ValueError(f"unexpected CSV header {header} in {Path(path).name}")
        for row in rd:
            rows.append([float(c) for c in row])
    return np.asarray(rows, dtype=np.float64)
