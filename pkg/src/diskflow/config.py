"""Flat key-value run configuration.

Files are INI text with a fixed schema. Every section and key is checked
against the schema so a typo fails loudly instead of silently running with a
default. All keys are optional; missing ones fall back to library defaults.
"""

from __future__ import annotations

import configparser
import math
from pathlib import Path
from typing import Optional

from .body import (CirclePath, LinePath, StaticPath, co_moving_circle,
                   grazing_line)
from .compressible import SolverConfig
from .constitutive import FluidParams
from .grid import GridSpec
from .incompressible import ReferenceConfig
from .testfunctions import TestFunctionSpec


class ConfigError(ValueError):
    """Unknown sections/keys or values the schema cannot digest."""


def _float_list(text: str):
    parts = [p for p in text.replace(",", " ").split() if p]
    return tuple(float(p) for p in parts)


_SCHEMA = {
    "fluid": {"a": float, "gamma": float, "mu": float, "lam": float,
              "rho_bar": float},
    "scaling": {"eps": float, "m": float},
    "grid": {"nx": int, "side": float},
    "solver": {"t_end": float, "snapshots": int, "dt_safety": float,
               "penalization_eta": float},
    "body": {"mode": str, "density_exponent": float, "path": str,
             "center_x": float, "center_y": float, "orbit_radius": float,
             "angular_rate": float, "phase": float, "spin_rate": float,
             "line_start_x": float, "line_start_y": float,
             "line_dir_x": float, "line_dir_y": float, "line_speed": float,
             "point_x": float, "point_y": float,
             "start_x": float, "start_y": float,
             "velocity0_x": float, "velocity0_y": float, "spin0": float},
    "initial": {"velocity_amplitude": float, "perturbation": float,
                "seed": int},
    "testfunctions": {"delta": float, "ramp_width": float, "amplitude": float,
                      "alpha_exponent": float, "smoothing_fraction": float},
    "sweep": {"eps_ladder": _float_list, "m": float, "t_end": float,
              "body_mode": str, "jobs": int},
    "output": {"directory": str},
}

_PATH_KINDS = ("co_moving", "circle", "line", "static", "grazing")


def load_config(path) -> dict:
    """Parse and type-check an INI file into {section: {key: value}}."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(p.read_text(encoding="utf-8"), source=str(p))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc

    bundle: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{p}: unknown section [{section}]")
        keys = _SCHEMA[section]
        out = {}
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"{p}: unknown key '{key}' in [{section}]")
            try:
                out[key] = keys[key](raw)
            except ValueError as exc:
                raise ConfigError(
                    f"{p}: bad value for {section}.{key}: {raw!r}") from exc
        bundle[section] = out
    return bundle


def _get(bundle: dict, section: str, key: str, default):
    return bundle.get(section, {}).get(key, default)


def build_fluid_params(bundle: dict, eps: Optional[float] = None,
                       m: Optional[float] = None) -> FluidParams:
    f = bundle.get("fluid", {})
    s = bundle.get("scaling", {})
    return FluidParams(
        a=f.get("a", 0.5), gamma=f.get("gamma", 2.0), mu=f.get("mu", 0.02),
        lam=f.get("lam", 0.0), rho_bar=f.get("rho_bar", 1.0),
        eps=eps if eps is not None else s.get("eps", 0.1),
        m=m if m is not None else s.get("m", 1.0))


def build_grid(bundle: dict, nx: Optional[int] = None) -> GridSpec:
    g = bundle.get("grid", {})
    n = nx if nx is not None else g.get("nx", 64)
    return GridSpec(n, n, g.get("side", 1.0))


def build_path(bundle: dict, side: float, t_end: float, eps: float,
               amplitude: float):
    body = bundle.get("body", {})
    kind = body.get("path", "co_moving")
    if kind not in _PATH_KINDS:
        raise ConfigError(f"unknown body path '{kind}'; "
                          f"expected one of {_PATH_KINDS}")
    if kind == "co_moving":
        return co_moving_circle(side, t_end, math.copysign(1.0, amplitude))
    if kind == "grazing":
        return grazing_line(side, t_end, eps)
    if kind == "circle":
        return CirclePath(
            center=(body.get("center_x", 0.5 * side),
                    body.get("center_y", 0.5 * side)),
            radius=body.get("orbit_radius", 0.25 * side),
            angular_rate=body.get("angular_rate", -2.0 * math.pi / t_end),
            phase=body.get("phase", 0.0),
            spin_rate=body.get("spin_rate", 0.0))
    if kind == "line":
        return LinePath(
            start=(body.get("line_start_x", 0.5 * side),
                   body.get("line_start_y", 0.5 * side)),
            direction=(body.get("line_dir_x", 0.0),
                       body.get("line_dir_y", -1.0)),
            speed=body.get("line_speed", 1.0))
    return StaticPath(point=(body.get("point_x", 0.5 * side),
                             body.get("point_y", 0.5 * side)))


def build_solver_config(bundle: dict, eps: Optional[float] = None,
                        m: Optional[float] = None, nx: Optional[int] = None,
                        mode: Optional[str] = None,
                        seed: Optional[int] = None) -> SolverConfig:
    params = build_fluid_params(bundle, eps=eps, m=m)
    grid = build_grid(bundle, nx=nx)
    sol = bundle.get("solver", {})
    body = bundle.get("body", {})
    ini = bundle.get("initial", {})
    t_end = sol.get("t_end", 0.5)
    amplitude = ini.get("velocity_amplitude", 1.0)
    body_mode = mode if mode is not None else body.get("mode", "prescribed")
    path = None
    if body_mode == "prescribed":
        path = build_path(bundle, grid.side, t_end, params.eps, amplitude)
    return SolverConfig(
        params=params, grid=grid, path=path, t_end=t_end,
        snapshots=sol.get("snapshots", 33),
        dt_safety=sol.get("dt_safety", 0.45),
        penalization_eta=sol.get("penalization_eta", 1.0e-3),
        body_mode=body_mode,
        body_density_exponent=body.get("density_exponent", 0.5),
        velocity_amplitude=amplitude,
        perturbation=ini.get("perturbation", 0.0),
        seed=seed if seed is not None else ini.get("seed", 0),
        body_start=(body.get("start_x", 0.75 * grid.side),
                    body.get("start_y", 0.5 * grid.side)),
        body_velocity0=(body.get("velocity0_x", 0.0),
                        body.get("velocity0_y", 0.0)),
        body_spin0=body.get("spin0", 0.0))


def build_reference_config(bundle: dict, nx: Optional[int] = None,
                           seed: Optional[int] = None) -> ReferenceConfig:
    f = bundle.get("fluid", {})
    sol = bundle.get("solver", {})
    ini = bundle.get("initial", {})
    return ReferenceConfig(
        grid=build_grid(bundle, nx=nx),
        mu=f.get("mu", 0.02), rho_bar=f.get("rho_bar", 1.0),
        t_end=sol.get("t_end", 0.5), snapshots=sol.get("snapshots", 33),
        velocity_amplitude=ini.get("velocity_amplitude", 1.0),
        dt_safety=sol.get("dt_safety", 0.45),
        perturbation=ini.get("perturbation", 0.0),
        seed=seed if seed is not None else ini.get("seed", 0))


def build_testfunction_spec(bundle: dict) -> TestFunctionSpec:
    t = bundle.get("testfunctions", {})
    side = _get(bundle, "grid", "side", 1.0)
    return TestFunctionSpec(
        side=side, delta=t.get("delta", 0.12),
        ramp_width=t.get("ramp_width", 0.12),
        amplitude=t.get("amplitude", 1.0),
        alpha_exponent=t.get("alpha_exponent", 0.5),
        smoothing_fraction=t.get("smoothing_fraction", 0.05))


def build_sweep_config(bundle: dict, m: Optional[float] = None,
                       mode: Optional[str] = None, jobs: Optional[int] = None,
                       out_dir: Optional[str] = None,
                       seed: Optional[int] = None):
    from .harness import SweepConfig  # deferred: harness pulls in heavy deps

    sw = bundle.get("sweep", {})
    return SweepConfig(
        bundle=bundle,
        eps_ladder=tuple(sw.get("eps_ladder", (0.16, 0.08, 0.04))),
        m=m if m is not None else sw.get("m", 1.0),
        t_end=sw.get("t_end", _get(bundle, "solver", "t_end", 0.5)),
        body_mode=mode if mode is not None else sw.get("body_mode",
                                                       "prescribed"),
        jobs=jobs if jobs is not None else sw.get("jobs", 1),
        out_dir=out_dir if out_dir is not None
        else _get(bundle, "output", "directory", "sweep_out"),
        seed=seed if seed is not None else _get(bundle, "initial", "seed", 0))
