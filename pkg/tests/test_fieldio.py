"""Binary and CSV field serialization round-trips."""

import numpy as np
import pytest

from diskflow.fieldio import (read_scalar, read_vector, read_xyv_csv,
                              scalar_to_csv, vector_to_csv, write_scalar,
                              write_vector)
from diskflow.grid import GridSpec, ScalarField, VectorField


def _random_scalar(grid, seed=0):
    rng = np.random.default_rng(seed)
    return ScalarField(grid, rng.standard_normal((grid.nx, grid.ny)))


def _random_vector(grid, seed=1):
    rng = np.random.default_rng(seed)
    return VectorField(grid,
                       rng.standard_normal((grid.nx + 1, grid.ny)),
                       rng.standard_normal((grid.nx, grid.ny + 1)))


def test_scalar_roundtrip(tmp_path):
    grid = GridSpec(nx=12, ny=12, side=2.5)
    f = _random_scalar(grid)
    p = tmp_path / "rho.bin"
    write_scalar(p, f)
    g = read_scalar(p)
    assert g.grid == grid
    np.testing.assert_array_equal(g.values, f.values)


def test_vector_roundtrip(tmp_path):
    grid = GridSpec(nx=9, ny=9, side=1.0)
    f = _random_vector(grid)
    p = tmp_path / "vel.bin"
    write_vector(p, f)
    g = read_vector(p)
    assert g.grid == grid
    np.testing.assert_array_equal(g.u, f.u)
    np.testing.assert_array_equal(g.v, f.v)


def test_noncontiguous_write(tmp_path):
    grid = GridSpec(nx=8, ny=8, side=1.0)
    big = np.arange(256, dtype=float).reshape(16, 16)
    f = ScalarField(grid, big[::2, ::2])
    p = tmp_path / "strided.bin"
    write_scalar(p, f)
    np.testing.assert_array_equal(read_scalar(p).values, big[::2, ::2])


def test_truncated_header(tmp_path):
    p = tmp_path / "short.bin"
    p.write_bytes(b"\x01\x02\x03")
    with pytest.raises(ValueError, match="header"):
        read_scalar(p)


def test_truncated_payload(tmp_path):
    grid = GridSpec(nx=8, ny=8, side=1.0)
    p = tmp_path / "cut.bin"
    write_scalar(p, _random_scalar(grid))
    data = p.read_bytes()
    p.write_bytes(data[:-16])
    with pytest.raises(ValueError, match="payload"):
        read_scalar(p)
    with pytest.raises(ValueError):
        read_vector(p)


def test_scalar_csv_roundtrip(tmp_path):
    grid = GridSpec(nx=8, ny=8, side=1.0)
    f = _random_scalar(grid, seed=3)
    p = tmp_path / "rho.csv"
    scalar_to_csv(p, f)
    arr = read_xyv_csv(p)
    assert arr.shape == (64, 3)
    np.testing.assert_array_equal(arr[:, 2].reshape(8, 8), f.values)
    # sample coordinates are cell centers
    assert arr[0, 0] == pytest.approx(grid.h / 2)
    assert arr[0, 1] == pytest.approx(grid.h / 2)


def test_vector_csv_roundtrip(tmp_path):
    grid = GridSpec(nx=8, ny=8, side=1.0)
    f = _random_vector(grid, seed=5)
    pu, pv = tmp_path / "u.csv", tmp_path / "v.csv"
    vector_to_csv(pu, pv, f)
    au, av = read_xyv_csv(pu), read_xyv_csv(pv)
    np.testing.assert_array_equal(au[:, 2].reshape(9, 8), f.u)
    np.testing.assert_array_equal(av[:, 2].reshape(8, 9), f.v)
    # x-faces sit on vertical grid lines, y-faces on horizontal ones
    assert au[0, 0] == 0.0
    assert av[0, 1] == 0.0


def test_csv_header_check(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="header"):
        read_xyv_csv(p)
