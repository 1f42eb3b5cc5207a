"""Kurganov-Tadmor central scheme for the hydrodynamic Kuramoto system.

State vector q = (rho, u) -- deliberately NOT the conservative (rho, rho*u)
pair -- with flux F(q) = (rho*u, u^2/2) and relaxation source
(0, (1/m)(-u + Omega + K*r*sin(phi - theta))).  Minmod-limited linear
reconstruction, local speeds from the reconstructed interface velocities
(the quasilinear system has the double eigenvalue u, widened to include 0),
midpoint-rule source at cell centers, and Heun's second-order Runge-Kutta in
time with the order parameter recomputed at every stage.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .domain import FieldState
from .meanfield import mean_field_force, order_parameter


class MassClipError(RuntimeError):
    """Raised when negativity clipping removes more mass than the budget."""

    def __init__(self, t, clipped):
        super().__init__(
            f"clipped {clipped:.3e} density mass in one step at t={t:.6g}"
        )
        self.t = t
        self.clipped = clipped


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme knobs: CFL number, step cap, blow-up and clipping thresholds."""

    cfl: float = 0.4
    max_dt: float = 1e-2
    blowup_rho_factor: float = 1e3
    blowup_grad: float = 1e6
    eps_speed: float = 1e-12
    clip_abort: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("cfl must lie in (0, 1)")
        if not self.max_dt > 0:
            raise ValueError("max_dt must be positive")


def minmod(a, b):
    """Minmod slope: the smaller-magnitude argument if signs agree, else 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same_sign = a * b > 0.0
    pick_a = np.abs(a) < np.abs(b)
    return np.where(same_sign, np.where(pick_a, a, b), 0.0)


def reconstruct(Q, dtheta):
    """Limited linear reconstruction: east/west cell-edge values (qE_j, qW_j)."""
    dm = Q - np.roll(Q, 1, axis=-1)
    dp = np.roll(Q, -1, axis=-1) - Q
    sigma = minmod(dm / dtheta, dp / dtheta)
    half = 0.5 * dtheta * sigma
    return Q + half, Q - half


def _phys_flux(rho, u):
    return rho * u, 0.5 * u * u


def kt_flux(rho_left, u_left, rho_right, u_right, eps_speed=1e-12):
    """KT numerical flux at interfaces from reconstructed one-sided states.

    a+ = max(uL, uR, 0), a- = min(uL, uR, 0);
    F* = (a+ F(qL) - a- F(qR))/(a+ - a-) + a+ a- (qR - qL)/(a+ - a-),
    falling back to the arithmetic-mean physical flux when a+ - a- degenerates.
    """
    a_plus = np.maximum(np.maximum(u_left, u_right), 0.0)
    a_minus = np.minimum(np.minimum(u_left, u_right), 0.0)
    spread = a_plus - a_minus
    frho_l, fu_l = _phys_flux(rho_left, u_left)
    frho_r, fu_r = _phys_flux(rho_right, u_right)
    safe = np.where(spread < eps_speed, 1.0, spread)
    prod = a_plus * a_minus
    f_rho = (a_plus * frho_l - a_minus * frho_r + prod * (rho_right - rho_left)) / safe
    f_u = (a_plus * fu_l - a_minus * fu_r + prod * (u_right - u_left)) / safe
    degenerate = spread < eps_speed
    if np.any(degenerate):
        f_rho = np.where(degenerate, 0.5 * (frho_l + frho_r), f_rho)
        f_u = np.where(degenerate, 0.5 * (fu_l + fu_r), f_u)
    return f_rho, f_u


def rhs(state, op, params, config=None):
    """Semi-discrete tendency (drho/dt, du/dt) with the order parameter frozen."""
    eps_speed = config.eps_speed if config is not None else 1e-12
    dtheta = state.grid.dtheta
    rho_e, rho_w = reconstruct(state.rho, dtheta)
    u_e, u_w = reconstruct(state.u, dtheta)
    # Interface j+1/2 sees cell j from the left (east face) and j+1 from the
    # right (west face of the neighbor).
    f_rho, f_u = kt_flux(
        rho_e,
        u_e,
        np.roll(rho_w, -1, axis=-1),
        np.roll(u_w, -1, axis=-1),
        eps_speed,
    )
    drho = -(f_rho - np.roll(f_rho, 1, axis=-1)) / dtheta
    du = -(f_u - np.roll(f_u, 1, axis=-1)) / dtheta
    force = mean_field_force(op, state.grid.centers, params)
    du += (-state.u + state.omega.nodes[:, None] + force[None, :]) / params.m
    return drho, du


def cfl_dt(state, config):
    """CFL step: min(max_dt, cfl*dtheta / max interface speed)."""
    u_e, u_w = reconstruct(state.u, state.grid.dtheta)
    u_r = np.roll(u_w, -1, axis=-1)
    a_plus = np.maximum(np.maximum(u_e, u_r), 0.0)
    a_minus = np.minimum(np.minimum(u_e, u_r), 0.0)
    speed = max(float(np.max(a_plus)), float(np.max(-a_minus)), config.eps_speed)
    return min(config.max_dt, config.cfl * state.grid.dtheta / speed)


def step_rk2(state, dt, params, config):
    """One Heun step; clips negative density and logs the clipped mass.

    NaN/Inf in the result is not an error here -- blow-up is the monitor's
    business -- but losing more than config.clip_abort of mass to clipping in
    a single step aborts with MassClipError.
    """
    assert dt > 0
    op0 = order_parameter(state)
    k0_rho, k0_u = rhs(state, op0, params, config)
    mid = replace(
        state,
        rho=state.rho + dt * k0_rho,
        u=state.u + dt * k0_u,
        t=state.t + dt,
        clipped_mass=0.0,
    )
    op1 = order_parameter(mid)
    k1_rho, k1_u = rhs(mid, op1, params, config)
    rho_new = 0.5 * (state.rho + mid.rho + dt * k1_rho)
    u_new = 0.5 * (state.u + mid.u + dt * k1_u)

    with np.errstate(invalid="ignore"):
        negative = rho_new < 0.0
    clipped = 0.0
    if np.any(negative):
        clipped_per_slice = -state.grid.dtheta * np.sum(
            np.where(negative, rho_new, 0.0), axis=-1
        )
        clipped = float(np.max(clipped_per_slice))
        rho_new = np.where(negative, 0.0, rho_new)
        if np.isfinite(clipped) and clipped > config.clip_abort:
            raise MassClipError(state.t + dt, clipped)
    return FieldState(
        state.grid,
        state.omega,
        rho_new,
        u_new,
        t=state.t + dt,
        clipped_mass=clipped,
    )
