"""Shrinking-body sweeps: run the ladder, measure gaps, emit reports.

Each rung runs the penalized compressible solver and the incompressible
reference from the same initial stream function on a grid sized so the disk
always spans at least eight cells. Both runs emit snapshots at identical
times, so the comparison metrics need no interpolation. Reports are CSV
(fixed column set) or structured text (CSV plus a config echo block).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path
from typing import Optional

import numpy as np

from .compressible import energy_violation, run
from .config import build_reference_config, build_solver_config
from .grid import ScalarField, VectorField, body_mask, norm_lp, norm_w12
from .incompressible import run_reference
from .runio import config_digest, config_echo

REPORT_HEADER = ("eps,sup_rho_err,u_err_L2W12,kinetic_gap,"
                 "eps_hdot_max,energy_violation,theorem_regime")


def grid_rule(eps: float) -> int:
    """Smallest power-of-two grid with >= 8 cells across the disk, floor 64."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    need = max(64, math.ceil(8.0 / eps))
    return 1 << (need - 1).bit_length()


@dataclass(frozen=True)
class SweepConfig:
    bundle: dict
    eps_ladder: tuple = (0.16, 0.08, 0.04)
    m: float = 1.0
    t_end: float = 0.5
    body_mode: str = "prescribed"
    jobs: int = 1
    out_dir: str = "sweep_out"
    seed: int = 0

    def __post_init__(self):
        if not self.eps_ladder:
            raise ValueError("eps_ladder is empty")
        if any(not 0.0 < e < 1.0 for e in self.eps_ladder):
            raise ValueError(f"ladder eps must lie in (0, 1): {self.eps_ladder}")
        if any(b >= a for a, b in zip(self.eps_ladder, self.eps_ladder[1:])):
            raise ValueError(f"eps_ladder must be strictly decreasing: "
                             f"{self.eps_ladder}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.body_mode not in ("prescribed", "coupled"):
            raise ValueError(f"unknown body_mode {self.body_mode!r}")


@dataclass(frozen=True)
class SweepRow:
    eps: float
    sup_rho_err: float
    u_err_L2W12: float
    kinetic_gap: float
    eps_hdot_max: float
    energy_violation: float
    theorem_regime: bool
    failure: Optional[str] = field(default=None, compare=False)


def rows_equal(a, b) -> bool:
    """Row-list equality with NaN == NaN, for round-trip checks."""
    if len(a) != len(b):
        return False
    for ra, rb in zip(a, b):
        for name in ("eps", "sup_rho_err", "u_err_L2W12", "kinetic_gap",
                     "eps_hdot_max", "energy_violation"):
            va, vb = getattr(ra, name), getattr(rb, name)
            if math.isnan(va) and math.isnan(vb):
                continue
            if va != vb:
                return False
        if ra.theorem_regime != rb.theorem_regime:
            return False
    return True


def _fluid_weights(grid, center, radius):
    return 1.0 - body_mask(grid, center, radius).weights


def compare_runs(result, ref) -> dict:
    """Gap metrics between a penalized run and its incompressible twin."""
    times = np.asarray(result.times)
    if (len(ref.times) != len(times)
            or float(np.max(np.abs(np.asarray(ref.times) - times))) > 1e-12):
        raise ValueError("runs do not share snapshot times")
    grid = result.config.grid
    params = result.config.params
    rho_bar = params.rho_bar
    eps = params.eps

    sup_rho = 0.0
    w12_sq = np.empty(len(times))
    kin_gap = 0.0
    for k in range(len(times)):
        w = _fluid_weights(grid, result.body_centers[k], eps)
        drho = ScalarField(grid, result.densities[k].values - rho_bar)
        sup_rho = max(sup_rho, norm_lp(drho, params.gamma, weights=w))
        dv = VectorField(grid,
                         result.velocities[k].u - ref.velocities[k].u,
                         result.velocities[k].v - ref.velocities[k].v)
        w12_sq[k] = norm_w12(dv) ** 2
        kin_gap = max(kin_gap, abs(result.kinetic[k] - ref.kinetic[k]))

    return {
        "sup_rho_err": sup_rho,
        "u_err_L2W12": float(math.sqrt(np.trapezoid(w12_sq, times))),
        "kinetic_gap": kin_gap,
        "eps_hdot_max": float(np.max(result.eps_hdot)),
        "energy_violation": energy_violation(result),
    }


_REFERENCE_CACHE: dict = {}


def _cached_reference(ref_cfg):
    key = (ref_cfg.grid.nx, ref_cfg.grid.ny, ref_cfg.grid.side, ref_cfg.mu,
           ref_cfg.rho_bar, ref_cfg.t_end, ref_cfg.snapshots,
           ref_cfg.velocity_amplitude, ref_cfg.dt_safety,
           ref_cfg.perturbation, ref_cfg.seed)
    if key not in _REFERENCE_CACHE:
        _REFERENCE_CACHE[key] = run_reference(ref_cfg)
    return _REFERENCE_CACHE[key]


def run_rung(bundle: dict, eps: float, m: float, t_end: float,
             body_mode: str, seed: int) -> SweepRow:
    """One ladder rung; failures come back as a NaN row with the reason."""
    try:
        nx = grid_rule(eps)
        cfg = build_solver_config(bundle, eps=eps, m=m, nx=nx,
                                  mode=body_mode, seed=seed)
        cfg = replace(cfg, t_end=t_end)
        ref_cfg = build_reference_config(bundle, nx=nx, seed=seed)
        ref_cfg = replace(ref_cfg, t_end=t_end)
        result = run(cfg)
        ref = _cached_reference(ref_cfg)
        gaps = compare_runs(result, ref)
        row = SweepRow(eps=eps, theorem_regime=cfg.params.theorem_regime,
                       **gaps)
        _validate_row(row)
        return row
    except Exception as exc:  # noqa: BLE001  (a rung must not sink the sweep)
        nan = float("nan")
        return SweepRow(eps=eps, sup_rho_err=nan, u_err_L2W12=nan,
                        kinetic_gap=nan, eps_hdot_max=nan,
                        energy_violation=nan, theorem_regime=False,
                        failure=f"{type(exc).__name__}: {exc}")


def _validate_row(row: SweepRow) -> None:
    for name in ("sup_rho_err", "u_err_L2W12", "kinetic_gap",
                 "eps_hdot_max", "energy_violation"):
        v = getattr(row, name)
        if not math.isfinite(v) or v < 0.0:
            raise ValueError(f"metric {name} out of range: {v}")


def run_sweep(config: SweepConfig) -> list:
    """All rungs, eps descending; parallel when jobs > 1, same rows either way."""
    args = [(config.bundle, eps, config.m, config.t_end, config.body_mode,
             config.seed) for eps in config.eps_ladder]
    if config.jobs == 1 or len(args) == 1:
        return [run_rung(*a) for a in args]
    workers = min(config.jobs, len(args))
    with ProcessPoolExecutor(max_workers=workers,
                             mp_context=get_context("spawn")) as pool:
        futures = [pool.submit(run_rung, *a) for a in args]
        return [f.result() for f in futures]


def _format_row(row: SweepRow) -> str:
    vals = ["%.17g" % getattr(row, n) for n in
            ("eps", "sup_rho_err", "u_err_L2W12", "kinetic_gap",
             "eps_hdot_max", "energy_violation")]
    vals.append("true" if row.theorem_regime else "false")
    return ",".join(vals)


def emit_report(rows, path, fmt: str = "csv",
                sweep_config: Optional[SweepConfig] = None) -> Path:
    """Write the rung table; structured text prepends a config echo block."""
    if fmt not in ("csv", "structured-text"):
        raise ValueError(f"unknown report format {fmt!r}")
    out = Path(path)
    lines = []
    if fmt == "structured-text":
        lines.append("[sweep-report]")
        if sweep_config is not None:
            lines.append(f"eps_ladder = "
                         f"{' '.join('%.17g' % e for e in sweep_config.eps_ladder)}")
            lines.append(f"m = {sweep_config.m:.17g}")
            lines.append(f"t_end = {sweep_config.t_end:.17g}")
            lines.append(f"body_mode = {sweep_config.body_mode}")
            lines.append(f"seed = {sweep_config.seed}")
            for section, keys in sorted(sweep_config.bundle.items()):
                for key, value in sorted(keys.items()):
                    lines.append(f"{section}.{key} = {value}")
        for row in rows:
            if row.failure is not None:
                lines.append(f"failure eps={row.eps:.17g}: {row.failure}")
        lines.append("[rows]")
    lines.append(REPORT_HEADER)
    lines.extend(_format_row(r) for r in rows)
    try:
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return out


def parse_report(path) -> list:
    """Read either report flavor back into SweepRow objects."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read report from {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if REPORT_HEADER not in lines:
        raise ValueError(f"no report header found in {path}")
    rows = []
    for line in lines[lines.index(REPORT_HEADER) + 1:]:
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"ragged report row in {path}: {line!r}")
        flag = parts[6].strip().lower()
        if flag not in ("true", "false"):
            raise ValueError(f"bad theorem_regime flag in {path}: {parts[6]!r}")
        rows.append(SweepRow(
            eps=float(parts[0]), sup_rho_err=float(parts[1]),
            u_err_L2W12=float(parts[2]), kinetic_gap=float(parts[3]),
            eps_hdot_max=float(parts[4]), energy_violation=float(parts[5]),
            theorem_regime=(flag == "true")))
    return rows
