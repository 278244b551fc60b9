"""Penalized gas solver: conservation, stability rule, energy ledger."""

import math

import numpy as np
import pytest

from diskflow.body import CirclePath, StaticPath, co_moving_circle, grazing_line
from diskflow.compressible import (RunResult, SimState, SolverConfig,
                                   SpaceTimeBump, body_force, body_update,
                                   energy_report, energy_violation,
                                   init_well_prepared, peak_dissipation_rate,
                                   renormalized_residual, run, stable_dt, step)
from diskflow.constitutive import FluidParams
from diskflow.grid import (GridSpec, ScalarField, VectorField, body_mask,
                           divergence, gradient, perp_gradient)


def _config(nx=64, eps=0.1, m=1.0, t_end=0.02, snapshots=3, amplitude=1.0,
            path=None, **kw):
    params = FluidParams(eps=eps, m=m)
    grid = GridSpec(nx=nx, ny=nx)
    if path is None and kw.get("body_mode", "prescribed") == "prescribed":
        path = StaticPath(point=(0.5, 0.5))
    return SolverConfig(params=params, grid=grid, path=path, t_end=t_end,
                        snapshots=snapshots, velocity_amplitude=amplitude, **kw)


def test_config_validation():
    params = FluidParams()
    grid = GridSpec(nx=16, ny=16)
    with pytest.raises(ValueError, match="trajectory"):
        SolverConfig(params=params, grid=grid)
    path = StaticPath()
    for bad in (dict(body_mode="wobbly"), dict(t_end=0.0), dict(snapshots=1),
                dict(dt_safety=2.0), dict(penalization_eta=0.0),
                dict(body_density_exponent=-1.0)):
        with pytest.raises(ValueError):
            SolverConfig(params=params, grid=grid, path=path, **bad)


def test_body_must_meet_domain():
    with pytest.raises(ValueError, match="domain"):
        init_well_prepared(_config(path=StaticPath(point=(3.0, 0.5))))
    with pytest.raises(ValueError, match="domain"):
        init_well_prepared(_config(body_mode="coupled",
                                   body_start=(-0.5, 0.5)))
    # touching the boundary is allowed, only full separation is an error
    init_well_prepared(_config(path=StaticPath(point=(1.0, 0.5))))


def test_stable_dt_formula():
    # recompute the advertised rule by hand on a quiescent state
    cfg = _config(nx=64, eps=1.0, m=1.0)
    state = init_well_prepared(_config(nx=64, eps=1.0, m=1.0, amplitude=0.0))
    p = cfg.params
    h = cfg.grid.h
    c = math.sqrt(p.a * p.gamma)  # rho = rho_bar = 1, mach scale 1
    expect = cfg.dt_safety * min(cfg.penalization_eta, h / c,
                                 h * h * p.rho_bar / (4.0 * (2.0 * p.mu + p.lam)))
    assert stable_dt(state, cfg) == pytest.approx(expect, rel=1e-12)


def test_stable_dt_tracks_stiffness():
    # on a quiescent state with the viscous bound slack, halving the Mach
    # scale (eps^m) halves the acoustic dt exactly
    soft = _config(nx=64, eps=0.05, m=1.0, amplitude=0.0, penalization_eta=10.0)
    stiff = _config(nx=64, eps=0.025, m=1.0, amplitude=0.0, penalization_eta=10.0)
    dt_soft = stable_dt(init_well_prepared(soft), soft)
    dt_stiff = stable_dt(init_well_prepared(stiff), stiff)
    assert dt_soft / dt_stiff == pytest.approx(2.0, rel=1e-12)


def test_quiescent_state_is_exact_fixed_point():
    # no flow, uniform density, resting body: every term vanishes identically
    cfg = _config(amplitude=0.0, t_end=0.01, snapshots=3)
    res = run(cfg)
    for rho in res.densities:
        assert np.all(rho.values == cfg.params.rho_bar)
    for vel in res.velocities:
        assert np.all(vel.u == 0.0) and np.all(vel.v == 0.0)
    assert np.all(res.total == res.total[0])
    assert res.clamp_count == 0


def test_single_step_mass_exact():
    cfg = _config()
    state = init_well_prepared(cfg)
    h2 = cfg.grid.h ** 2
    m0 = float(np.sum(state.rho.values)) * h2
    nxt = step(state, cfg)
    m1 = float(np.sum(nxt.rho.values)) * h2
    assert abs(m1 - m0) <= 1e-13 * m0
    assert nxt.t > 0.0


def test_run_conserves_mass_and_positivity():
    cfg = _config(t_end=0.05, snapshots=5, path=co_moving_circle(1.0, 0.5))
    res = run(cfg)
    drift = np.abs(res.mass - res.mass[0]).max()
    assert drift <= 1e-12 * res.mass[0]
    assert res.density_floor >= -1e-12 * cfg.params.rho_bar
    assert res.clamp_count == 0
    # walls are pinned after the first stage
    for vel in res.velocities[1:]:
        assert np.all(vel.u[0] == 0.0) and np.all(vel.u[-1] == 0.0)
        assert np.all(vel.v[:, 0] == 0.0) and np.all(vel.v[:, -1] == 0.0)


def test_prescribed_path_followed_exactly():
    path = CirclePath(center=(0.5, 0.5), radius=0.2, angular_rate=2.0)
    cfg = _config(t_end=0.05, snapshots=5, path=path)
    res = run(cfg)
    for k, t in enumerate(res.times):
        np.testing.assert_allclose(res.body_centers[k], path.position(t), atol=1e-12)
        np.testing.assert_allclose(res.body_velocities[k], path.velocity(t), atol=1e-12)
    # eps_hdot column is eps * |path speed|
    speed = abs(path.angular_rate) * path.radius
    np.testing.assert_allclose(res.eps_hdot[1:], cfg.params.eps * speed, rtol=1e-12)


def test_rigid_motion_sees_no_penalization_force():
    # fluid moving exactly like the body: the exchange vanishes identically
    cfg = _config(amplitude=0.0)
    state = init_well_prepared(cfg)
    spin = 3.0
    b = state.body
    b.spin = spin
    b.velocity = np.array([0.4, -0.2])
    xf_y = cfg.grid.xface_y()
    state.vel.u[:] = b.velocity[0] - spin * (xf_y - b.center[1])
    yf_x = cfg.grid.yface_x()
    state.vel.v[:] = b.velocity[1] + spin * (yf_x - b.center[0])
    force, torque, slip = body_force(state, cfg)
    assert np.all(force == 0.0) and torque == 0.0 and slip == 0.0


def test_body_force_closed_form():
    # uniform fluid velocity over a resting body: force = (rho/eta)*U*area
    cfg = _config(amplitude=0.0)
    state = init_well_prepared(cfg)
    U = 0.7
    state.vel.u[:] = U
    state.vel.u[0] = state.vel.u[-1] = 0.0
    force, torque, slip = body_force(state, cfg)
    grid = cfg.grid
    # mask weights on the interior x-face family, same ramp as the kernel
    r = np.hypot(grid.xface_x() - 0.5, grid.xface_y() - 0.5)[1:-1]
    w = np.clip((cfg.params.eps + 0.5 * grid.h - r) / grid.h, 0.0, 1.0)
    area = float(np.sum(w)) * grid.h ** 2
    rho_bar = cfg.params.rho_bar
    expect = (rho_bar / cfg.penalization_eta) * U * area
    assert force[0] == pytest.approx(expect, rel=1e-12)
    assert force[1] == 0.0
    assert abs(torque) < 1e-12 * abs(force[0])  # symmetric mask, no moment
    assert slip == pytest.approx(U * math.sqrt(float(np.sum(w)) * grid.h ** 2
                                               / rho_bar / rho_bar) * rho_bar, rel=1e-12)
    # face-count area approximates the disk area
    assert area == pytest.approx(math.pi * cfg.params.eps ** 2, rel=0.1)


def test_body_update_kick_drift():
    cfg = _config(body_mode="coupled", path=None)
    state = init_well_prepared(cfg)
    b0 = state.body
    force = np.array([0.2, -0.1])
    torque = 0.05
    dt = 1e-3
    nxt = body_update(state, force, torque, cfg, dt)
    np.testing.assert_allclose(nxt.velocity, b0.velocity + dt * force / b0.mass,
                               rtol=1e-15)
    np.testing.assert_allclose(nxt.center, b0.center + dt * nxt.velocity, rtol=1e-15)
    assert nxt.spin == pytest.approx(b0.spin + dt * torque / b0.inertia)
    with pytest.raises(ValueError):
        body_update(state, force, torque, _config(), dt)


def test_energy_report_quadratic_pressure_energy():
    # uniform density offset: scaled pressure energy matches the Taylor value
    # (1/eps^2m) * fluid_area * a*gamma*rho_bar^gamma * delta^2 / 2 to O(delta)
    cfg = _config(amplitude=0.0)
    state = init_well_prepared(cfg)
    p = cfg.params
    delta = 1e-4
    state.rho.values[:] = p.rho_bar * (1.0 + delta)
    rep = energy_report(state, cfg)
    grid = cfg.grid
    mask = body_mask(grid, state.body.center, p.eps)
    fluid_area = float(np.sum(1.0 - mask.weights)) * grid.h ** 2
    expect = (fluid_area * p.a * p.gamma * p.rho_bar ** p.gamma * delta ** 2 / 2.0
              / p.mach_scale ** 2)
    assert rep.kinetic == 0.0
    assert rep.pressure_energy == pytest.approx(expect, rel=1e-2)
    assert rep.total == rep.pressure_energy


def test_initial_kinetic_energy_analytic():
    # KE of the bump field: 0.5*rho_bar*V^2 * 3*pi^2/8; a tiny resting disk
    # at the stagnation core barely perturbs it
    cfg = _config(nx=128, eps=0.02, amplitude=1.0)
    state = init_well_prepared(cfg)
    rep = energy_report(state, cfg)
    exact = 0.5 * 1.0 * 3.0 * math.pi ** 2 / 8.0
    assert rep.kinetic == pytest.approx(exact, rel=1e-2)


def test_energy_budget_short_run():
    cfg = _config(t_end=0.05, snapshots=9, path=co_moving_circle(1.0, 0.5))
    res = run(cfg)
    # reported totals recombine exactly
    np.testing.assert_allclose(
        res.total, res.kinetic + res.pressure_energy + res.dissipation_accum,
        rtol=1e-12)
    assert np.all(np.diff(res.dissipation_accum) >= 0.0)
    viol = energy_violation(res)
    rate = peak_dissipation_rate(res)
    assert viol <= 10.0 * res.dt_max * rate + 1e-12 * (1.0 + abs(res.total[0]))


def test_grazing_descent_survives():
    # the disk parks eps/2 above the wall; the run must stay finite with an
    # intact energy budget
    eps = 0.1
    path = grazing_line(1.0, 0.1, eps)
    cfg = _config(eps=eps, t_end=0.1, snapshots=5, path=path, amplitude=0.5)
    res = run(cfg)
    assert np.isfinite(res.total).all()
    assert res.density_floor >= -1e-12
    viol = energy_violation(res)
    assert viol <= 10.0 * res.dt_max * peak_dissipation_rate(res) + 1e-12


def test_coupled_body_accelerates_with_flow():
    cfg = _config(body_mode="coupled", path=None, t_end=0.02, snapshots=3,
                  body_start=(0.75, 0.5))
    res = run(cfg)
    # the bump vortex pushes the off-center body; it must pick up speed
    assert np.hypot(*res.body_velocities[-1]) > 0.0
    assert np.isfinite(res.total).all()


# ---------------------------------------------------------------------------
# renormalized continuity defect


class _FrozenBump:
    """Constant-in-time spatial profile; isolates the spatial terms."""

    def __init__(self, grid):
        x, y = grid.cell_x(), grid.cell_y()
        self.space = np.sin(np.pi * x) ** 2 * np.sin(np.pi * y) ** 2

    def value(self, t, grid):
        return self.space

    def dt(self, t, grid):
        return np.zeros_like(self.space)


def _synthetic_result(grid, rho_value, vel, times):
    cfg = _config(nx=grid.nx, t_end=float(times[-1]) if times[-1] > 0 else 1.0)
    n = len(times)
    zeros = np.zeros(n)
    return RunResult(
        config=cfg, times=np.asarray(times, dtype=float),
        densities=[ScalarField.full(grid, rho_value) for _ in range(n)],
        velocities=[vel.copy() for _ in range(n)],
        body_centers=np.zeros((n, 2)), body_velocities=np.zeros((n, 2)),
        body_angles=zeros, body_spins=zeros, kinetic=zeros,
        pressure_energy=zeros, dissipation_accum=zeros, total=zeros,
        mass=zeros, eps_hdot=zeros, work_accum=zeros, slip_l2=zeros,
        dt_max=0.0, steps=0, clamp_count=0, density_floor=rho_value)


def test_residual_cancels_for_solenoidal_steady_fields():
    # constant density + discretely divergence-free velocity + frozen bump:
    # every term cancels at the level of exact arithmetic
    grid = GridSpec(nx=32, ny=32)
    psi = ScalarField.from_function(grid, lambda x, y: np.sin(2 * np.pi * x) * np.sin(np.pi * y))
    vel = perp_gradient(psi)
    res = _synthetic_result(grid, 1.0, vel, [0.0, 0.1, 0.2])
    out = renormalized_residual(res, bump=_FrozenBump(grid))
    assert np.abs(out).max() < 1e-13


def test_residual_derivative_weight_both_branches():
    # with rho = c uniform, u = grad(p), frozen bump: the defect reduces to
    # -dt * b'(c) * c * <div u, bump>, exposing the derivative of the
    # renormalization; below the cap b'(c) = 2c, above it 2*cap
    grid = GridSpec(nx=32, ny=32)
    p = ScalarField.from_function(grid, lambda x, y: np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y))
    vel = gradient(p)
    bump = _FrozenBump(grid)
    D = float(np.sum(divergence(vel).values * bump.space)) * grid.h ** 2
    assert abs(D) > 1e-3  # the probe must not be degenerate
    dt = 0.1
    for c, cap, expect in ((1.0, 2.0, 2.0), (5.0, 2.0, 4.0)):
        res = _synthetic_result(grid, c, vel, [0.0, dt])
        out = renormalized_residual(res, b_cap=cap, bump=bump)
        bprime = -out[0] / (dt * c * D)
        assert bprime == pytest.approx(expect, rel=1e-12)


def test_residual_recovers_capped_quadratic():
    # u = 0, time-varying bump: the defect is b(c) times a closed-form
    # trapezoid error, so b itself can be read off; below the cap b(c) = c^2
    grid = GridSpec(nx=32, ny=32)
    vel = VectorField.zeros(grid)
    t_end = 1.0
    bump = SpaceTimeBump(side=1.0, t_end=t_end)
    times = [0.2, 0.35]
    S = float(np.sum(bump._space(grid))) * grid.h ** 2

    def g(t):
        return math.sin(math.pi * t / t_end) ** 2

    def gdot(t):
        w = math.pi / t_end
        return 2.0 * math.sin(w * t) * math.cos(w * t) * w

    t0, t1 = times
    quad_err = 0.5 * (t1 - t0) * (gdot(t0) + gdot(t1)) - (g(t1) - g(t0))
    for c, cap, expect in ((1.0, 2.0, 1.0), (1.8, 2.0, 1.8 ** 2),
                           (5.0, 2.0, 2.0 * (2.0 * 5.0 - 2.0))):
        res = _synthetic_result(grid, c, vel, times)
        out = renormalized_residual(res, b_cap=cap, bump=bump)
        b_val = out[0] / (S * quad_err)
        assert b_val == pytest.approx(expect, rel=1e-12)


def test_residual_shrinks_under_refinement():
    # the defect mixes snapshot-quadrature error with the scheme's own
    # upwind-diffusion leakage, so it shrinks under joint space and time
    # refinement (roughly first order overall)
    base = dict(eps=0.1, t_end=0.04, amplitude=1.0)
    coarse = run(_config(nx=64, snapshots=5, path=co_moving_circle(1.0, 0.5), **base))
    fine = run(_config(nx=128, snapshots=9, path=co_moving_circle(1.0, 0.5), **base))
    r_coarse = np.sum(np.abs(renormalized_residual(coarse)))
    r_fine = np.sum(np.abs(renormalized_residual(fine)))
    assert r_fine < 0.7 * r_coarse


def test_residual_zero_bump():
    grid = GridSpec(nx=16, ny=16)

    class ZeroBump:
        def value(self, t, g):
            return np.zeros((g.nx, g.ny))

        def dt(self, t, g):
            return np.zeros((g.nx, g.ny))

    res = _synthetic_result(grid, 1.0, VectorField.zeros(grid), [0.0, 0.1])
    out = renormalized_residual(res, bump=ZeroBump())
    assert np.all(out == 0.0)
