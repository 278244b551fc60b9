"""Jitted inner loops for the penalized compressible stepper.

Layout (C-order, index [i, j], i along x): rho and cell quantities (nx, ny),
u on vertical faces (nx+1, ny), v on horizontal faces (nx, ny+1). Wall-normal
faces are pinned to zero and never written. Tangential wall gradients use odd
reflection (wall value zero). All kernels are single-threaded and compiled
with strict IEEE semantics (no fastmath): with value-changing FP optimizations
LLVM may pick FMA/reassociation paths that depend on where buffers land in
memory, and repeated sweeps in one process stop being bit-identical.

Flux conventions: continuity uses a local Lax-Friedrichs face flux with signal
speed |u_face| + max of the adjacent scaled sound speeds; momentum convection
uses LLF with the convective speed only (the stiff pressure gradient is a
separate central term), which keeps the numerical dissipation of the velocity
field independent of the Mach scaling. The penalization source is
mask * (rho_face/eta) * (u_rigid - u), so the discrete momentum the fluid
loses equals the force the probe kernel reports for the body.
"""

import numpy as np
from numba import njit

# numpy error model: a vacuum state divides to inf instead of raising from
# inside the kernel, so the run loop's finiteness check owns the failure path
_JIT = dict(cache=True, nogil=True, error_model="numpy")


@njit(**_JIT)
def eos(rho, a, gamma, inv_epsm, p, c):
    """p = a*rho^gamma and scaled sound speed sqrt(a*gamma*rho^(gamma-1))/eps^m."""
    nx, ny = rho.shape
    ag = a * gamma
    if gamma == 2.0:
        for i in range(nx):
            for j in range(ny):
                r = rho[i, j]
                p[i, j] = a * r * r
                c[i, j] = np.sqrt(ag * r) * inv_epsm
    else:
        gm1 = gamma - 1.0
        for i in range(nx):
            for j in range(ny):
                r = rho[i, j]
                rp = r ** gm1
                p[i, j] = a * r * rp
                c[i, j] = np.sqrt(ag * rp) * inv_epsm


@njit(**_JIT)
def mass_fluxes(rho, u, v, c, fx, fy):
    """LLF mass flux on every face; wall faces carry exactly zero flux."""
    nx, ny = rho.shape
    for j in range(ny):
        fx[0, j] = 0.0
        fx[nx, j] = 0.0
    for i in range(1, nx):
        for j in range(ny):
            uf = u[i, j]
            rl = rho[i - 1, j]
            rr = rho[i, j]
            cl = c[i - 1, j]
            cr = c[i, j]
            s = abs(uf) + (cl if cl > cr else cr)
            fx[i, j] = 0.5 * (uf * (rl + rr) - s * (rr - rl))
    for i in range(nx):
        fy[i, 0] = 0.0
        fy[i, ny] = 0.0
    for i in range(nx):
        for j in range(1, ny):
            vf = v[i, j]
            rl = rho[i, j - 1]
            rr = rho[i, j]
            cl = c[i, j - 1]
            cr = c[i, j]
            s = abs(vf) + (cl if cl > cr else cr)
            fy[i, j] = 0.5 * (vf * (rl + rr) - s * (rr - rl))


@njit(**_JIT)
def continuity_rhs(fx, fy, h, drho):
    nx, ny = drho.shape
    inv_h = 1.0 / h
    for i in range(nx):
        for j in range(ny):
            drho[i, j] = -((fx[i + 1, j] - fx[i, j]) + (fy[i, j + 1] - fy[i, j])) * inv_h


@njit(**_JIT)
def stress_fields(u, v, h, mu, lam, sxx, syy, sxy):
    """Normal stresses at cells, shear at nodes, odd-reflection wall ghosts."""
    nx = sxx.shape[0]
    ny = sxx.shape[1]
    inv_h = 1.0 / h
    for i in range(nx):
        for j in range(ny):
            dudx = (u[i + 1, j] - u[i, j]) * inv_h
            dvdy = (v[i, j + 1] - v[i, j]) * inv_h
            div = dudx + dvdy
            sxx[i, j] = mu * (dudx - dvdy) + lam * div
            syy[i, j] = mu * (dvdy - dudx) + lam * div
    for i in range(nx + 1):
        for j in range(ny + 1):
            if j == 0:
                dudy = 2.0 * u[i, 0] * inv_h
            elif j == ny:
                dudy = -2.0 * u[i, ny - 1] * inv_h
            else:
                dudy = (u[i, j] - u[i, j - 1]) * inv_h
            if i == 0:
                dvdx = 2.0 * v[0, j] * inv_h
            elif i == nx:
                dvdx = -2.0 * v[nx - 1, j] * inv_h
            else:
                dvdx = (v[i, j] - v[i - 1, j]) * inv_h
            sxy[i, j] = mu * (dudy + dvdx)


@njit(**_JIT)
def xmom_rhs(rho, u, v, p, sxx, sxy, h, inv_eps2m,
             eta_inv, cx, cy, bux, bspin, radius, hi2, dmu):
    """Tendency of the x face momentum rho_face*u on interior vertical faces.

    Returns (sum of u*viscous term, sum of penalization*u_rigid), both as raw
    sums to be scaled by h^2 by the caller.
    """
    nx, ny = rho.shape
    inv_h = 1.0 / h
    half_h = 0.5 * h
    acc_visc = 0.0
    acc_work = 0.0
    for i in range(1, nx):
        x = i * h
        dx = x - cx
        for j in range(ny):
            u_c = u[i, j]
            u_m = u[i - 1, j]
            u_p = u[i + 1, j]
            mx_c = 0.5 * (rho[i - 1, j] + rho[i, j]) * u_c
            if i == 1:
                mx_m = 0.0
            else:
                mx_m = 0.5 * (rho[i - 2, j] + rho[i - 1, j]) * u_m
            if i == nx - 1:
                mx_p = 0.0
            else:
                mx_p = 0.5 * (rho[i, j] + rho[i + 1, j]) * u_p
            sl = abs(u_m) if abs(u_m) > abs(u_c) else abs(u_c)
            sr = abs(u_c) if abs(u_c) > abs(u_p) else abs(u_p)
            gl = 0.5 * ((mx_m * u_m + mx_c * u_c) - sl * (mx_c - mx_m))
            gr = 0.5 * ((mx_c * u_c + mx_p * u_p) - sr * (mx_p - mx_c))
            conv = (gr - gl) * inv_h

            if j > 0:
                vb = 0.5 * (v[i - 1, j] + v[i, j])
                mx_b = 0.5 * (rho[i - 1, j - 1] + rho[i, j - 1]) * u[i, j - 1]
                fb = 0.5 * (vb * (mx_b + mx_c) - abs(vb) * (mx_c - mx_b))
            else:
                fb = 0.0
            if j < ny - 1:
                vt = 0.5 * (v[i - 1, j + 1] + v[i, j + 1])
                mx_t = 0.5 * (rho[i - 1, j + 1] + rho[i, j + 1]) * u[i, j + 1]
                ft = 0.5 * (vt * (mx_c + mx_t) - abs(vt) * (mx_t - mx_c))
            else:
                ft = 0.0
            conv += (ft - fb) * inv_h

            press = inv_eps2m * (p[i, j] - p[i - 1, j]) * inv_h
            visc = (sxx[i, j] - sxx[i - 1, j]) * inv_h \
                + (sxy[i, j + 1] - sxy[i, j]) * inv_h
            acc_visc += visc * u_c

            pen = 0.0
            dy = (j + 0.5) * h - cy
            r2 = dx * dx + dy * dy
            if r2 < hi2:
                w = (radius + half_h - np.sqrt(r2)) * inv_h
                if w > 1.0:
                    w = 1.0
                urig = bux - bspin * dy
                pen = w * 0.5 * (rho[i - 1, j] + rho[i, j]) * eta_inv * (urig - u_c)
                acc_work += pen * urig
            dmu[i, j] = -conv - press + visc + pen
    return acc_visc, acc_work


@njit(**_JIT)
def ymom_rhs(rho, u, v, p, syy, sxy, h, inv_eps2m,
             eta_inv, cx, cy, buy, bspin, radius, hi2, dmv):
    """Mirror of xmom_rhs for the y face momentum on horizontal faces."""
    nx, ny = rho.shape
    inv_h = 1.0 / h
    half_h = 0.5 * h
    acc_visc = 0.0
    acc_work = 0.0
    for i in range(nx):
        x = (i + 0.5) * h
        dx = x - cx
        for j in range(1, ny):
            v_c = v[i, j]
            v_m = v[i, j - 1]
            v_p = v[i, j + 1]
            my_c = 0.5 * (rho[i, j - 1] + rho[i, j]) * v_c
            if j == 1:
                my_m = 0.0
            else:
                my_m = 0.5 * (rho[i, j - 2] + rho[i, j - 1]) * v_m
            if j == ny - 1:
                my_p = 0.0
            else:
                my_p = 0.5 * (rho[i, j] + rho[i, j + 1]) * v_p
            sl = abs(v_m) if abs(v_m) > abs(v_c) else abs(v_c)
            sr = abs(v_c) if abs(v_c) > abs(v_p) else abs(v_p)
            gl = 0.5 * ((my_m * v_m + my_c * v_c) - sl * (my_c - my_m))
            gr = 0.5 * ((my_c * v_c + my_p * v_p) - sr * (my_p - my_c))
            conv = (gr - gl) * inv_h

            if i > 0:
                ub = 0.5 * (u[i, j - 1] + u[i, j])
                my_b = 0.5 * (rho[i - 1, j - 1] + rho[i - 1, j]) * v[i - 1, j]
                fb = 0.5 * (ub * (my_b + my_c) - abs(ub) * (my_c - my_b))
            else:
                fb = 0.0
            if i < nx - 1:
                ut = 0.5 * (u[i + 1, j - 1] + u[i + 1, j])
                my_t = 0.5 * (rho[i + 1, j - 1] + rho[i + 1, j]) * v[i + 1, j]
                ft = 0.5 * (ut * (my_c + my_t) - abs(ut) * (my_t - my_c))
            else:
                ft = 0.0
            conv += (ft - fb) * inv_h

            press = inv_eps2m * (p[i, j] - p[i, j - 1]) * inv_h
            visc = (syy[i, j] - syy[i, j - 1]) * inv_h \
                + (sxy[i + 1, j] - sxy[i, j]) * inv_h
            acc_visc += visc * v_c

            pen = 0.0
            dy = j * h - cy
            r2 = dx * dx + dy * dy
            if r2 < hi2:
                w = (radius + half_h - np.sqrt(r2)) * inv_h
                if w > 1.0:
                    w = 1.0
                vrig = buy + bspin * dx
                pen = w * 0.5 * (rho[i, j - 1] + rho[i, j]) * eta_inv * (vrig - v_c)
                acc_work += pen * vrig
            dmv[i, j] = -conv - press + visc + pen
    return acc_visc, acc_work


@njit(**_JIT)
def advance_density(rho0, drho, dt, out):
    """out = rho0 + dt*drho, clamped at zero; returns (pre-clamp min, clamp count)."""
    nx, ny = rho0.shape
    lo = 1.0e300
    clamped = 0
    for i in range(nx):
        for j in range(ny):
            r = rho0[i, j] + dt * drho[i, j]
            if r < lo:
                lo = r
            if r < 0.0:
                r = 0.0
                clamped += 1
            out[i, j] = r
    return lo, clamped


@njit(**_JIT)
def advance_u(rho0, rho1, u0, dmu, dt, out):
    """Conservative recovery: out = (rho_face(rho0)*u0 + dt*dmu) / rho_face(rho1)."""
    nx, ny = rho0.shape
    for j in range(ny):
        out[0, j] = 0.0
        out[nx, j] = 0.0
    for i in range(1, nx):
        for j in range(ny):
            rf0 = 0.5 * (rho0[i - 1, j] + rho0[i, j])
            rf1 = 0.5 * (rho1[i - 1, j] + rho1[i, j])
            out[i, j] = (rf0 * u0[i, j] + dt * dmu[i, j]) / rf1


@njit(**_JIT)
def advance_v(rho0, rho1, v0, dmv, dt, out):
    nx, ny = rho0.shape
    for i in range(nx):
        out[i, 0] = 0.0
        out[i, ny] = 0.0
    for i in range(nx):
        for j in range(1, ny):
            rf0 = 0.5 * (rho0[i, j - 1] + rho0[i, j])
            rf1 = 0.5 * (rho1[i, j - 1] + rho1[i, j])
            out[i, j] = (rf0 * v0[i, j] + dt * dmv[i, j]) / rf1


@njit(**_JIT)
def penalization_probe(rho, u, v, h, eta_inv, cx, cy, bux, buy, bspin, radius):
    """Force, torque and slip norms of the penalization exchange, h^2-scaled.

    force = sum mask*(rho_f/eta)*(u - u_rigid), torque pairs it with
    (x - center)^perp; slip_sq = sum mask*|u - u_rigid|^2 * h^2 over both face
    families (the squared L2(mask) rigid-constraint defect).
    """
    nx, ny = rho.shape
    half_h = 0.5 * h
    hi = radius + half_h
    hi2 = hi * hi
    inv_h = 1.0 / h
    fx = 0.0
    fy = 0.0
    tq = 0.0
    slip = 0.0
    for i in range(1, nx):
        dx = i * h - cx
        if abs(dx) > hi:
            continue
        for j in range(ny):
            dy = (j + 0.5) * h - cy
            r2 = dx * dx + dy * dy
            if r2 < hi2:
                w = (radius + half_h - np.sqrt(r2)) * inv_h
                if w > 1.0:
                    w = 1.0
                rf = 0.5 * (rho[i - 1, j] + rho[i, j])
                ex = u[i, j] - (bux - bspin * dy)
                fx += w * rf * eta_inv * ex
                tq += w * rf * eta_inv * ex * (-dy)
                slip += w * ex * ex
    for i in range(nx):
        dx = (i + 0.5) * h - cx
        if abs(dx) > hi:
            continue
        for j in range(1, ny):
            dy = j * h - cy
            r2 = dx * dx + dy * dy
            if r2 < hi2:
                w = (radius + half_h - np.sqrt(r2)) * inv_h
                if w > 1.0:
                    w = 1.0
                rf = 0.5 * (rho[i, j - 1] + rho[i, j])
                ey = v[i, j] - (buy + bspin * dx)
                fy += w * rf * eta_inv * ey
                tq += w * rf * eta_inv * ey * dx
                slip += w * ey * ey
    h2 = h * h
    return fx * h2, fy * h2, tq * h2, slip * h2


@njit(**_JIT)
def kinetic_energy(rho, u, v, h):
    """0.5*rho|u|^2 with face-interpolated density; wall faces carry u = 0."""
    nx, ny = rho.shape
    ke = 0.0
    for i in range(1, nx):
        for j in range(ny):
            rf = 0.5 * (rho[i - 1, j] + rho[i, j])
            ke += 0.5 * rf * u[i, j] * u[i, j]
    for i in range(nx):
        for j in range(1, ny):
            rf = 0.5 * (rho[i, j - 1] + rho[i, j])
            ke += 0.5 * rf * v[i, j] * v[i, j]
    return ke * h * h
