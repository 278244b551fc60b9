"""Command-line front end.

Subcommands: run (penalized compressible solve), reference (incompressible
twin), sweep (shrinking-body ladder), verify-testfunctions (cutoff and weak
form diagnostics), check-energy (re-validate a stored run's ledger).

Exit codes: 0 success, 1 validation failure (bad values, failed checks,
tampered artifacts), 2 runtime failure (missing files, solver blow-up,
unknown flags via argparse).
"""

from __future__ import annotations

import argparse
import math
import sys

from . import runio
from .compressible import run as run_compressible
from .config import (ConfigError, build_reference_config, build_solver_config,
                     build_sweep_config, build_testfunction_spec, load_config)
from .harness import emit_report, run_sweep
from .incompressible import run_reference
from .testfunctions import emit_testfunction_csv, testfunction_report

_GRAD_BOUND_CONST = 4.0


def _say(msg: str) -> None:
    print(f"[diskflow] {msg}")


def _bundle(args) -> dict:
    if getattr(args, "config", None) is None:
        return {}
    return load_config(args.config)


def _cmd_run(args) -> int:
    bundle = _bundle(args)
    cfg = build_solver_config(bundle, eps=args.eps, m=args.m, nx=args.grid,
                              mode=args.mode, seed=args.seed)
    _say(f"run: eps={cfg.params.eps:g} m={cfg.params.m:g} nx={cfg.grid.nx} "
         f"mode={cfg.body_mode} t_end={cfg.t_end:g}")
    result = run_compressible(cfg)
    _say(f"run: {result.steps} steps, dt_max={result.dt_max:.3e}, "
        f"density floor {result.density_floor:.6f}")
    out = runio.save_run(result, args.out, fields=not args.no_fields)
    _say(f"run: artifacts under {out}")
    return 0


def _cmd_reference(args) -> int:
    bundle = _bundle(args)
    cfg = build_reference_config(bundle, nx=args.grid, seed=args.seed)
    _say(f"reference: nx={cfg.grid.nx} mu={cfg.mu:g} t_end={cfg.t_end:g}")
    result = run_reference(cfg)
    _say(f"reference: {result.steps} steps, dt_max={result.dt_max:.3e}")
    out = runio.save_reference(result, args.out, fields=not args.no_fields)
    _say(f"reference: artifacts under {out}")
    return 0


def _cmd_sweep(args) -> int:
    bundle = _bundle(args)
    sweep = build_sweep_config(bundle, m=args.m, mode=args.mode,
                               jobs=args.jobs, out_dir=args.out,
                               seed=args.seed)
    _say(f"sweep: ladder {list(sweep.eps_ladder)} m={sweep.m:g} "
         f"mode={sweep.body_mode} jobs={sweep.jobs}")
    rows = run_sweep(sweep)
    from pathlib import Path
    out_dir = Path(sweep.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = emit_report(rows, out_dir / "report.csv", fmt="csv")
    emit_report(rows, out_dir / "report.txt", fmt="structured-text",
                sweep_config=sweep)
    failures = [r for r in rows if r.failure is not None]
    for r in rows:
        if r.failure is None:
            _say(f"sweep: eps={r.eps:g} sup_rho_err={r.sup_rho_err:.6e} "
                 f"u_err={r.u_err_L2W12:.6e} eps_hdot_max={r.eps_hdot_max:.6e}")
        else:
            _say(f"sweep: eps={r.eps:g} FAILED: {r.failure}")
    _say(f"sweep: report at {csv_path}")
    if failures:
        return 1
    return 0


def _cmd_verify_testfunctions(args) -> int:
    bundle = _bundle(args)
    spec = build_testfunction_spec(bundle)
    _say("testfunctions: measuring the cutoff ladder (this runs short solves)")
    rows = testfunction_report(spec=spec)
    from pathlib import Path
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "testfunctions.csv"
    emit_testfunction_csv(rows, csv_path)
    ok = True
    gaps = [r.w12_gap for r in rows]
    if any(b > a * (1.0 + 1e-12) for a, b in zip(gaps, gaps[1:])):
        _say(f"testfunctions: FAIL cutoff gap not non-increasing: {gaps}")
        ok = False
    for r in rows:
        alpha = spec.alpha_of(r.eps)
        scaled = r.grad_eta_max * r.eps * math.log(alpha)
        if scaled > _GRAD_BOUND_CONST:
            _say(f"testfunctions: FAIL gradient bound at eps={r.eps:g}: "
                 f"{scaled:.3f} > {_GRAD_BOUND_CONST}")
            ok = False
        if not math.isfinite(r.weak_residual):
            _say(f"testfunctions: FAIL weak residual not finite at "
                 f"eps={r.eps:g}")
            ok = False
        _say(f"testfunctions: eps={r.eps:g} gap={r.w12_gap:.6e} "
             f"residual={r.weak_residual:.6e}")
    _say(f"testfunctions: report at {csv_path}")
    return 0 if ok else 1


def _cmd_check_energy(args) -> int:
    report = runio.check_energy(args.run_dir, factor=args.factor)
    _say(f"check-energy: violation {report['violation']:.6e} within budget "
         f"{report['budget']:.6e} (dt_max={report['dt_max']:.3e})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diskflow",
        description="Shrinking rigid disk in a slightly compressible flow: "
                    "solvers, sweeps, and diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps=False, m=False, grid=False, jobs=False, mode=False):
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="perturbation seed")
        if eps:
            p.add_argument("--eps", type=float, default=None,
                           help="body radius")
        if m:
            p.add_argument("--m", type=float, default=None,
                           help="Mach scaling exponent")
        if grid:
            p.add_argument("--grid", type=int, default=None, help="cells per side")
        if jobs:
            p.add_argument("--jobs", type=int, default=None,
                           help="parallel rung workers")
        if mode:
            p.add_argument("--mode", choices=("prescribed", "coupled"),
                           default=None, help="body motion mode")

    p_run = sub.add_parser("run", help="single compressible run")
    common(p_run, eps=True, m=True, grid=True, mode=True)
    p_run.add_argument("--no-fields", action="store_true",
                       help="skip snapshot field binaries")
    p_run.set_defaults(fn=_cmd_run, out_default="run_out")

    p_ref = sub.add_parser("reference", help="incompressible reference run")
    common(p_ref, grid=True)
    p_ref.add_argument("--no-fields", action="store_true",
                       help="skip snapshot field binaries")
    p_ref.set_defaults(fn=_cmd_reference, out_default="reference_out")

    p_sweep = sub.add_parser("sweep", help="eps-ladder comparison sweep")
    common(p_sweep, m=True, jobs=True, mode=True)
    p_sweep.set_defaults(fn=_cmd_sweep, out_default=None)

    p_tf = sub.add_parser("verify-testfunctions",
                          help="cutoff/weak-form diagnostics ladder")
    common(p_tf)
    p_tf.set_defaults(fn=_cmd_verify_testfunctions, out_default="testfn_out")

    p_ce = sub.add_parser("check-energy",
                          help="re-validate a stored run energy ledger")
    p_ce.add_argument("run_dir", help="run artifact directory")
    p_ce.add_argument("--factor", type=float, default=10.0,
                      help="budget multiple of dt*peak dissipation")
    p_ce.set_defaults(fn=_cmd_check_energy, out_default=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None) is None and args.out_default is not None:
        args.out = args.out_default
    try:
        return args.fn(args)
    except (ConfigError, ValueError) as exc:
        print(f"[diskflow] validation error: {exc}", file=sys.stderr)
        return 1
    except (OSError, RuntimeError, FloatingPointError) as exc:
        print(f"[diskflow] runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
