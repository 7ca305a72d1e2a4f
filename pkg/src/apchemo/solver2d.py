"""First-order AP scheme for the spherically symmetric 2D kinetic model.

Unknown is h = r f on cell-centered (r, omega, theta) with theta the angle
between the position axis and the velocity; parity components R (even under
theta -> pi - theta) and J (odd, scaled by 1/eps) satisfy

    dt R + omega T(J) = (1/eps^2) [ rho_t F + eps gamma (omega/2)|cos t||dS/dr| rho_t
                                    - (1 + eps c2 |dS/dr|) R ]
    dt J + omega T(R) = (1/eps^2) [ (omega/2) cos t dS/dr rho_t
                                    - (1 + eps c2 |dS/dr|) J ] + (1 - 1/eps^2) omega T(R)

with T(X) = cos t dX/dr - (1/r) d(sin t X)/dt, rho_t = 2 int omega R, and
F = 1/(pi v_max^2).  gamma rescales the drift gain by the ratio of the exact
second moment c2 to its grid sum so the stiff stage conserves the density to
round-off.  The stage is implicit in closed form (coefficients depend on x
only); transport uses donor-cell upwinding on the diagonal variables
P = (R + J)/2 (radial speed +omega cos t, angular speed toward theta = 0) and
Q = (R - J)/2 (mirrored).

Boundaries: the axis r = 0 is a mirror (a characteristic leaving the origin
at angle theta continues what arrived at pi - theta; net axis flux vanishes
identically), theta = 0, pi carry no angular flux since sin vanishes there,
and the outer edge copies the last cell into the ghost, which admits a small
outflow leak once mass reaches it.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .chemo import grad_s_radial
from .core import (PolarGrid2D, RadialState2D, density_2d, radial_c2_constant,
                   radial_equilibrium)
from .solver1d import CFLError


@dataclass
class RadialSourceCoefficients:
    grad_s: np.ndarray       # (n_r,) cell-centered dS/dr
    loss_rate: np.ndarray    # (n_r,) 1/eps^2 + c2 |dS/dr| / eps
    c2: float
    c2_grid: float


def grid_c2_moment(grid: PolarGrid2D) -> float:
    """sum of omega^2 |cos theta| domega dtheta over the grid nodes."""
    return float(np.sum(grid.omega ** 2) * grid.domega
                 * np.sum(np.abs(np.cos(grid.theta))) * grid.dtheta)


def build_radial_coefficients(rho_t: np.ndarray, grid: PolarGrid2D,
                              eps: float) -> RadialSourceCoefficients:
    g = grad_s_radial(rho_t, grid)
    c2 = radial_c2_constant(grid.v_max)
    loss_rate = 1.0 / eps ** 2 + c2 * np.abs(g) / eps
    return RadialSourceCoefficients(g, loss_rate, c2, grid_c2_moment(grid))


def _theta_div(x: np.ndarray, grid: PolarGrid2D) -> np.ndarray:
    """(1/r) d(sin theta x)/dtheta, central difference.

    Ghost values continue sin theta past 0 and pi (where it is negative)
    against an even extension of x, which keeps the identity
    d(sin theta)/dtheta -> cos theta sin(dtheta)/dtheta exact in every cell.
    """
    prod = np.sin(grid.theta)[None, None, :] * x
    ext = np.concatenate([-prod[:, :, :1], prod, -prod[:, :, -1:]], axis=2)
    return (ext[:, :, 2:] - ext[:, :, :-2]) / (2.0 * grid.dtheta
                                               * grid.r[:, None, None])


def _radial_ddr(x: np.ndarray, grid: PolarGrid2D) -> np.ndarray:
    """Central d/dr with a through-origin mirror ghost and outer copy ghost.

    h = r f changes sign through the origin while the angle flips, so the
    axis ghost is the negated theta-reversed first cell.
    """
    ext = np.concatenate([-x[:1, :, ::-1], x, x[-1:]], axis=0)
    return (ext[2:] - ext[:-2]) / (2.0 * grid.dr)


def transport_operator(x: np.ndarray, grid: PolarGrid2D) -> np.ndarray:
    """T(x) = cos theta dx/dr - (1/r) d(sin theta x)/dtheta."""
    cos_t = np.cos(grid.theta)[None, None, :]
    return cos_t * _radial_ddr(x, grid) - _theta_div(x, grid)


def radial_source_step(state: RadialState2D, grid: PolarGrid2D,
                       dt: float) -> RadialState2D:
    eps = state.eps
    rho_t = density_2d(state, grid)
    coeffs = build_radial_coefficients(rho_t, grid, eps)
    equi = radial_equilibrium(grid)
    gamma = coeffs.c2 / coeffs.c2_grid
    g = coeffs.grad_s[:, None, None]
    rho = rho_t[:, None, None]
    omega = grid.omega[None, :, None]
    cos_t = np.cos(grid.theta)[None, None, :]
    denom = 1.0 + dt * coeffs.loss_rate[:, None, None]
    gain_r = (rho * equi[None, :, None] / eps ** 2
              + gamma * (0.5 / eps) * omega * np.abs(cos_t * g) * rho)
    r_new = (state.R_part + dt * gain_r) / denom
    gain_j = ((0.5 / eps ** 2) * omega * cos_t * g * rho
              + (1.0 - 1.0 / eps ** 2) * omega * transport_operator(r_new, grid))
    j_new = (state.J_part + dt * gain_j) / denom
    return replace(state, R_part=r_new, J_part=j_new)


def radial_transport_dt(grid: PolarGrid2D, safety: float = 0.9) -> float:
    """Largest stable donor-cell step; the angular speed peaks in the first
    radial cell at r = dr/2."""
    r1 = 0.5 * grid.dr
    speed = grid.v_max * (1.0 / grid.dr + 1.0 / (r1 * grid.dtheta))
    return safety / speed


def _radial_flux(x: np.ndarray, grid: PolarGrid2D, outward: np.ndarray
                 ) -> np.ndarray:
    """Donor-cell radial fluxes (n_r + 1 interfaces) for one diagonal family.

    `outward` flags the theta cells whose radial speed is positive for this
    family.  The axis interface takes the mirror cell (theta -> pi - theta)
    as donor for outgoing directions, so what leaves the origin at angle
    theta is what arrived at pi - theta; incoming directions use their own
    first cell.  The outer interface uses the last cell for every direction.
    """
    n_r = grid.n_r
    flux = np.empty((n_r + 1,) + x.shape[1:])
    donor_up = x[:-1]      # cell below interface i+1/2, i = 1..n_r-1
    donor_down = x[1:]
    inner = np.where(outward[None, None, :], donor_up, donor_down)
    flux[1:-1] = inner
    flux[0] = np.where(outward[None, :], x[0, :, ::-1], x[0])
    flux[-1] = x[-1]
    return flux


def radial_transport_step(state: RadialState2D, grid: PolarGrid2D, dt: float,
                          cfl_check: bool = True) -> RadialState2D:
    if cfl_check and dt > radial_transport_dt(grid, safety=1.0) * (1.0 + 1e-12):
        raise CFLError("2D transport CFL violated")
    cos_t = np.cos(grid.theta)
    sin_edges = np.sin(np.arange(grid.n_theta + 1) * grid.dtheta)
    omega = grid.omega[None, :, None]
    p = 0.5 * (state.R_part + state.J_part)
    q = 0.5 * (state.R_part - state.J_part)

    fp = cos_t[None, None, :] * _radial_flux(p, grid, cos_t > 0)
    fq = -cos_t[None, None, :] * _radial_flux(q, grid, cos_t < 0)

    # angular fluxes at the n_theta + 1 interfaces; sin vanishes at 0 and pi
    gp = np.zeros(p.shape[:2] + (grid.n_theta + 1,))
    gq = np.zeros_like(gp)
    inv_r = 1.0 / grid.r[:, None, None]
    # P drifts toward theta = 0: donor above the interface
    gp[:, :, :-1] = -sin_edges[None, None, :-1] * inv_r * p
    # Q drifts toward theta = pi: donor below the interface
    gq[:, :, 1:] = sin_edges[None, None, 1:] * inv_r * q

    p_new = p - omega * dt * ((fp[1:] - fp[:-1]) / grid.dr
                              + (gp[:, :, 1:] - gp[:, :, :-1]) / grid.dtheta)
    q_new = q - omega * dt * ((fq[1:] - fq[:-1]) / grid.dr
                              + (gq[:, :, 1:] - gq[:, :, :-1]) / grid.dtheta)
    return replace(state, R_part=p_new + q_new, J_part=p_new - q_new)


def radial_advance(state: RadialState2D, grid: PolarGrid2D, dt: float,
                   cfl_check: bool = True) -> RadialState2D:
    state = radial_source_step(state, grid, dt)
    state = radial_transport_step(state, grid, dt, cfl_check)
    state.time += dt
    return state


__all__ = [
    "RadialSourceCoefficients", "grid_c2_moment", "build_radial_coefficients",
    "transport_operator", "radial_source_step", "radial_transport_dt",
    "radial_transport_step", "radial_advance",
]
