"""Run artifact directories: manifest, energy ledger, snapshot fields.

A saved run is a directory holding manifest.json (times, body path, work
ledger, config echo with its hash), energy.csv with the pinned header, and
optionally one density/velocity binary pair per snapshot. check_energy
re-validates the stored ledger without touching the solver, so a tampered
or corrupted artifact fails closed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import fieldio

RUN_FORMAT_VERSION = 1

ENERGY_HEADER = "t,kinetic,pressure_energy,dissipation_accum,total,mass,eps_hdot"


class EnergyCheckError(ValueError):
    """Stored energy ledger violates the accounting rules."""


def _path_echo(path) -> Optional[dict]:
    if path is None:
        return None
    echo = {"kind": type(path).__name__}
    for name, value in vars(path).items():
        if isinstance(value, tuple):
            echo[name] = [float(v) for v in value]
        else:
            echo[name] = float(value)
    return echo


def config_echo(config) -> dict:
    p = config.params
    return {
        "fluid": {"a": p.a, "gamma": p.gamma, "mu": p.mu, "lam": p.lam,
                  "rho_bar": p.rho_bar, "eps": p.eps, "m": p.m},
        "grid": {"nx": config.grid.nx, "ny": config.grid.ny,
                 "side": config.grid.side},
        "solver": {"t_end": config.t_end, "snapshots": config.snapshots,
                   "dt_safety": config.dt_safety,
                   "penalization_eta": config.penalization_eta},
        "body": {"mode": config.body_mode,
                 "density_exponent": config.body_density_exponent,
                 "path": _path_echo(config.path),
                 "start": list(config.body_start),
                 "velocity0": list(config.body_velocity0),
                 "spin0": config.body_spin0},
        "initial": {"velocity_amplitude": config.velocity_amplitude,
                    "perturbation": config.perturbation,
                    "seed": config.seed},
    }


def config_digest(echo: dict) -> str:
    canon = json.dumps(echo, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _energy_rows(result):
    rows = []
    for k in range(len(result.times)):
        rows.append((result.times[k], result.kinetic[k],
                     result.pressure_energy[k], result.dissipation_accum[k],
                     result.total[k], result.mass[k], result.eps_hdot[k]))
    return rows


def write_energy_csv(path, rows) -> None:
    lines = [ENERGY_HEADER]
    for row in rows:
        lines.append(",".join("%.17g" % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_energy_csv(path) -> dict:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text or text[0] != ENERGY_HEADER:
        raise EnergyCheckError(f"unexpected energy header in {path}")
    cols = {name: [] for name in ENERGY_HEADER.split(",")}
    names = ENERGY_HEADER.split(",")
    for line in text[1:]:
        parts = line.split(",")
        if len(parts) != len(names):
            raise EnergyCheckError(f"ragged energy row in {path}: {line!r}")
        for name, part in zip(names, parts):
            cols[name].append(float(part))
    return {name: np.asarray(vals) for name, vals in cols.items()}


def save_run(result, out_dir, fields: bool = True) -> Path:
    """Write manifest.json, energy.csv and snapshot binaries; returns the dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    artifacts = {"energy": "energy.csv"}
    if fields:
        rho_names = []
        vel_names = []
        for k in range(len(result.times)):
            rname = f"rho_{k:04d}.bin"
            vname = f"vel_{k:04d}.bin"
            fieldio.write_scalar(out / rname, result.densities[k])
            fieldio.write_vector(out / vname, result.velocities[k])
            rho_names.append(rname)
            vel_names.append(vname)
        artifacts["density_fields"] = rho_names
        artifacts["velocity_fields"] = vel_names

    body_path = []
    for k in range(len(result.times)):
        cx, cy = result.body_centers[k]
        vx, vy = result.body_velocities[k]
        body_path.append([result.times[k], float(cx), float(cy),
                          float(result.body_angles[k]), float(vx), float(vy),
                          float(result.body_spins[k])])

    echo = config_echo(result.config)
    manifest = {
        "format_version": RUN_FORMAT_VERSION,
        "config": echo,
        "config_sha256": config_digest(echo),
        "times": [float(t) for t in result.times],
        "steps": result.steps,
        "dt_max": result.dt_max,
        "clamp_count": result.clamp_count,
        "density_floor": result.density_floor,
        "body_path_columns": ["t", "h_x", "h_y", "beta",
                              "hdot_x", "hdot_y", "betadot"],
        "body_path": body_path,
        "work_accum": [float(w) for w in result.work_accum],
        "slip_l2": [float(s) for s in result.slip_l2],
        "artifacts": artifacts,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n",
        encoding="utf-8")
    write_energy_csv(out / "energy.csv", _energy_rows(result))
    return out


def save_reference(result, out_dir, fields: bool = True) -> Path:
    """Store a reference run in the same directory layout as save_run.

    The ledger degenerates cleanly: no pressure energy, no dissipation
    tally, no body, so total is the kinetic column and the work ledger is
    zero. check_energy then enforces plain kinetic-energy decay.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    artifacts = {"energy": "energy.csv"}
    if fields:
        vel_names = []
        for k in range(len(result.times)):
            vname = f"vel_{k:04d}.bin"
            fieldio.write_vector(out / vname, result.velocities[k])
            vel_names.append(vname)
        artifacts["velocity_fields"] = vel_names

    domain_mass = cfg.rho_bar * cfg.grid.side ** 2
    echo = {
        "fluid": {"mu": cfg.mu, "rho_bar": cfg.rho_bar},
        "grid": {"nx": cfg.grid.nx, "ny": cfg.grid.ny,
                 "side": cfg.grid.side},
        "solver": {"t_end": cfg.t_end, "snapshots": cfg.snapshots,
                   "dt_safety": cfg.dt_safety,
                   "projection_tol": cfg.projection_tol},
        "initial": {"velocity_amplitude": cfg.velocity_amplitude,
                    "perturbation": cfg.perturbation, "seed": cfg.seed},
    }
    manifest = {
        "format_version": RUN_FORMAT_VERSION,
        "config": echo,
        "config_sha256": config_digest(echo),
        "times": [float(t) for t in result.times],
        "steps": result.steps,
        "dt_max": result.dt_max,
        "clamp_count": 0,
        "density_floor": cfg.rho_bar,
        "body_path_columns": ["t", "h_x", "h_y", "beta",
                              "hdot_x", "hdot_y", "betadot"],
        "body_path": [],
        "work_accum": [0.0] * len(result.times),
        "slip_l2": [],
        "artifacts": artifacts,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n",
        encoding="utf-8")
    rows = [(result.times[k], result.kinetic[k], 0.0, 0.0,
             result.kinetic[k], domain_mass, 0.0)
            for k in range(len(result.times))]
    write_energy_csv(out / "energy.csv", rows)
    return out


@dataclass
class LoadedRun:
    manifest: dict
    energy: dict
    densities: Optional[list] = None
    velocities: Optional[list] = None


def load_run(run_dir, fields: bool = False) -> LoadedRun:
    run = Path(run_dir)
    mpath = run / "manifest.json"
    if not mpath.is_file():
        raise FileNotFoundError(f"no manifest.json under {run}")
    manifest = json.loads(mpath.read_text(encoding="utf-8"))
    if manifest.get("format_version") != RUN_FORMAT_VERSION:
        raise ValueError(f"unsupported run format in {mpath}: "
                         f"{manifest.get('format_version')}")
    energy = read_energy_csv(run / manifest["artifacts"]["energy"])
    loaded = LoadedRun(manifest=manifest, energy=energy)
    if fields and "density_fields" in manifest["artifacts"]:
        loaded.densities = [fieldio.read_scalar(run / n)
                            for n in manifest["artifacts"]["density_fields"]]
    if fields and "velocity_fields" in manifest["artifacts"]:
        loaded.velocities = [fieldio.read_vector(run / n)
                             for n in manifest["artifacts"]["velocity_fields"]]
    return loaded


def check_energy(run_dir, factor: float = 10.0) -> dict:
    """Re-validate a stored energy ledger; raises EnergyCheckError on failure.

    Checks, in order: the total column equals the sum of its parts row by
    row; mass is conserved to 1e-12 relative; the work-adjusted total never
    rises above its initial value by more than factor * dt_max * (peak
    dissipation rate between snapshots), with a small absolute allowance
    for round-off on quiescent runs.
    """
    loaded = load_run(run_dir)
    e = loaded.energy
    t = e["t"]
    if t.size < 2:
        raise EnergyCheckError(f"energy ledger in {run_dir} has {t.size} rows")

    parts = e["kinetic"] + e["pressure_energy"] + e["dissipation_accum"]
    scale = np.maximum(1.0, np.abs(e["total"]))
    mismatch = np.max(np.abs(parts - e["total"]) / scale)
    if mismatch > 1.0e-12:
        raise EnergyCheckError(
            f"total column inconsistent with its parts in {run_dir}: "
            f"relative mismatch {mismatch:.3e}")

    mass0 = e["mass"][0]
    if mass0 <= 0.0 or not math.isfinite(mass0):
        raise EnergyCheckError(f"bad initial mass {mass0} in {run_dir}")
    mass_drift = np.max(np.abs(e["mass"] - mass0)) / mass0
    if mass_drift > 1.0e-12:
        raise EnergyCheckError(
            f"mass drift {mass_drift:.3e} exceeds 1e-12 in {run_dir}")

    work = np.asarray(loaded.manifest["work_accum"], dtype=np.float64)
    if work.shape != t.shape:
        raise EnergyCheckError(
            f"work ledger length {work.size} does not match {t.size} rows")
    dt_max = float(loaded.manifest["dt_max"])
    rates = np.diff(e["dissipation_accum"]) / np.diff(t)
    peak_rate = float(np.max(rates)) if rates.size else 0.0
    violation = float(np.max(e["total"] - e["total"][0] - work))
    violation = max(violation, 0.0)
    budget = factor * dt_max * peak_rate + 1.0e-12 * (1.0 + abs(e["total"][0]))
    if violation > budget:
        raise EnergyCheckError(
            f"energy violation {violation:.6e} exceeds budget {budget:.6e} "
            f"in {run_dir}")
    return {"violation": violation, "budget": budget, "dt_max": dt_max,
            "peak_dissipation_rate": peak_rate, "mass_drift": float(mass_drift)}
