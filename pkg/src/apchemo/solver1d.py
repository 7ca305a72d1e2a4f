"""Asymptotic-preserving solver for the 1D kinetic chemotaxis models.

The even/odd system on V+,

    dt r + v dx j = (1/eps^2) [ gain_even rho - loss r ]
    dt j + v dx r = (1/eps^2) [ gain_odd rho - loss j ] + (1 - 1/eps^2) v dx r,

is split into a stiff source stage (implicit, solved in closed form; rho and
S are frozen since the stage leaves the density invariant) and a transport
stage for the non-stiff wave part, discretized on the diagonal characteristic
variables p = (r + j)/2, q = (r - j)/2 with speeds +v / -v.

Model coefficients:
  nonlocal1d: gain_even = F + (dS(+v) + dS(-v))/2, gain_odd = (dS(+v) -
      dS(-v))/(2 eps), loss = 1 + <dS>, with dS the positive shift tables.
  local1d:    gain_even = F + (eps/2)|v dS/dx|, gain_odd = (1/2) v dS/dx,
      loss = 1 + c1 eps |dS/dx|, c1 = sum_k w_k v_k (= v_max^2/2 exactly).

gain_even is rescaled per cell so that 2 sum_k w_k gain_even = loss holds to
round-off, which makes the source stage conserve mass exactly.

Boundary conditions are reflection at both walls: ghost cells mirror r
evenly and j oddly, equivalently p_ghost = q_wall / q_ghost = p_wall.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .chemo import ChemoBuilder1D, ChemoField
from .core import (KineticState1D, SpatialGrid1D, VelocityGrid1D,
                   make_uniform_equilibrium, parity_density)


class CFLError(RuntimeError):
    """Transport step requested with v_max dt / dx > 1."""


@dataclass
class SourceCoefficients:
    gain_even: np.ndarray  # (n_x, n_half)
    gain_odd: np.ndarray   # (n_x, n_half)
    loss: np.ndarray       # (n_x,)
    c1: float


@dataclass
class SchemeConfig:
    order: int = 2
    model: str = "nonlocal1d"
    transport: str = "tvd"  # order-2 transport: "tvd" or "lw"
    cfl_check: bool = True

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if self.model not in ("nonlocal1d", "local1d"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.transport not in ("tvd", "lw"):
            raise ValueError("transport must be 'tvd' or 'lw'")


def build_source_coefficients(chemo: ChemoField, vgrid: VelocityGrid1D,
                              eps: float, model: str) -> SourceCoefficients:
    equi = make_uniform_equilibrium(vgrid)
    v = vgrid.nodes
    w = vgrid.weights
    c1 = float(w @ v)
    if model == "nonlocal1d":
        if chemo.shift_plus is None:
            raise ValueError("nonlocal model needs shift tables in ChemoField")
        gain_even = equi[None, :] + 0.5 * (chemo.shift_plus + chemo.shift_minus)
        gain_odd = (chemo.shift_plus - chemo.shift_minus) / (2.0 * eps)
        loss = 1.0 + chemo.bracket
    elif model == "local1d":
        g = chemo.grad_s
        gain_even = equi[None, :] + (0.5 * eps) * np.abs(g[:, None] * v[None, :])
        gain_odd = 0.5 * g[:, None] * v[None, :]
        loss = 1.0 + c1 * eps * np.abs(g)
    else:
        raise ValueError(f"unknown model {model!r}")
    # exact-conservation normalization: 2 sum w gain_even == loss per cell
    quad = 2.0 * gain_even @ w
    gain_even = gain_even * (loss / quad)[:, None]
    return SourceCoefficients(gain_even, gain_odd, loss, c1)


# ---------------------------------------------------------------------------
# ghost-cell helpers (reflecting walls: r even, j odd)


def _ddx_even(a: np.ndarray, dx: float) -> np.ndarray:
    ext = np.concatenate([a[:1], a, a[-1:]], axis=0)
    return (ext[2:] - ext[:-2]) / (2.0 * dx)


# ---------------------------------------------------------------------------
# source stages


def source_step_first_order(state: KineticState1D, coeffs: SourceCoefficients,
                            grid: SpatialGrid1D, vgrid: VelocityGrid1D,
                            dt: float) -> KineticState1D:
    """Implicit Euler for the stiff source, solved in closed form."""
    eps2 = state.eps ** 2
    rho = parity_density(state.r_part, vgrid)
    denom = eps2 + dt * coeffs.loss[:, None]
    r_new = (eps2 * state.r_part + dt * coeffs.gain_even * rho[:, None]) / denom
    dxr = _ddx_even(r_new, grid.dx)
    j_new = (eps2 * state.j_part
             + dt * (coeffs.gain_odd * rho[:, None]
                     + (eps2 - 1.0) * vgrid.nodes[None, :] * dxr)) / denom
    return replace(state, r_part=r_new, j_part=j_new)


def source_step_exact(state: KineticState1D, coeffs: SourceCoefficients,
                      grid: SpatialGrid1D, vgrid: VelocityGrid1D,
                      dt: float) -> KineticState1D:
    """Exact integration of the stiff source over dt (frozen rho, S).

    With a = loss/eps^2 and lam = exp(-a dt), r relaxes exponentially to
    gain_even rho / loss, and the j equation picks up the time integral of
    (1 - 1/eps^2) v dx r along the relaxation path.
    """
    eps2 = state.eps ** 2
    rho = parity_density(state.r_part, vgrid)
    loss = coeffs.loss[:, None]
    lam = np.exp(-dt * loss / eps2)
    r_eq = coeffs.gain_even * rho[:, None] / loss
    r_new = lam * state.r_part + (1.0 - lam) * r_eq
    r_int = (1.0 - 1.0 / eps2) * (dt * lam * state.r_part
                                  + r_eq * (eps2 * (1.0 - lam) / loss - dt * lam))
    j_new = (lam * state.j_part
             + (1.0 - lam) * coeffs.gain_odd * rho[:, None] / loss
             + vgrid.nodes[None, :] * _ddx_even(r_int, grid.dx))
    return replace(state, r_part=r_new, j_part=j_new)


# ---------------------------------------------------------------------------
# transport stages


def _check_cfl(vgrid: VelocityGrid1D, grid: SpatialGrid1D, dt: float,
               enabled: bool) -> np.ndarray:
    nu = vgrid.nodes * dt / grid.dx
    if enabled and nu[-1] > 1.0 + 1e-12:
        raise CFLError(f"transport CFL violated: v_max dt/dx = {nu[-1]:.4g}")
    return nu


def transport_step_upwind(state: KineticState1D, grid: SpatialGrid1D,
                          vgrid: VelocityGrid1D, dt: float,
                          cfl_check: bool = True) -> KineticState1D:
    nu = _check_cfl(vgrid, grid, dt, cfl_check)[None, :]
    r, j = state.r_part, state.j_part
    r_ext = np.concatenate([r[:1], r, r[-1:]], axis=0)
    j_ext = np.concatenate([-j[:1], j, -j[-1:]], axis=0)
    r_new = (r - 0.5 * nu * (j_ext[2:] - j_ext[:-2])
             + 0.5 * nu * (r_ext[2:] - 2.0 * r + r_ext[:-2]))
    j_new = (j - 0.5 * nu * (r_ext[2:] - r_ext[:-2])
             + 0.5 * nu * (j_ext[2:] - 2.0 * j + j_ext[:-2]))
    return replace(state, r_part=r_new, j_part=j_new)


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def transport_step_tvd(state: KineticState1D, grid: SpatialGrid1D,
                       vgrid: VelocityGrid1D, dt: float,
                       cfl_check: bool = True) -> KineticState1D:
    """Second-order MUSCL transport with minmod slopes on p, q."""
    nu = _check_cfl(vgrid, grid, dt, cfl_check)[None, :]
    v = vgrid.nodes[None, :]
    p = 0.5 * (state.r_part + state.j_part)
    q = 0.5 * (state.r_part - state.j_part)
    # two ghost layers; reflection swaps incoming and outgoing characteristics
    p_ext = np.concatenate([q[1:2], q[0:1], p, q[-1:], q[-2:-1]], axis=0)
    q_ext = np.concatenate([p[1:2], p[0:1], q, p[-1:], p[-2:-1]], axis=0)
    dp = np.diff(p_ext, axis=0)
    dq = np.diff(q_ext, axis=0)
    sp = _minmod(dp[1:], dp[:-1])   # limited increment per cell 0..n+1
    sq = _minmod(dq[1:], dq[:-1])
    half = 0.5 * (1.0 - nu)
    # right-moving p: donor cell left of the interface
    fp = v * (p_ext[1:-2] + half * sp[:-1])
    # left-moving q: donor cell right of the interface
    fq = -v * (q_ext[2:-1] - half * sq[1:])
    coef = dt / grid.dx
    p_new = p - coef * (fp[1:] - fp[:-1])
    q_new = q - coef * (fq[1:] - fq[:-1])
    return replace(state, r_part=p_new + q_new, j_part=p_new - q_new)


def transport_step_lw(state: KineticState1D, grid: SpatialGrid1D,
                      vgrid: VelocityGrid1D, dt: float,
                      cfl_check: bool = True) -> KineticState1D:
    """Unlimited Lax-Wendroff transport on p, q."""
    nu = _check_cfl(vgrid, grid, dt, cfl_check)[None, :]
    p = 0.5 * (state.r_part + state.j_part)
    q = 0.5 * (state.r_part - state.j_part)
    p_ext = np.concatenate([q[0:1], p, q[-1:]], axis=0)
    q_ext = np.concatenate([p[0:1], q, p[-1:]], axis=0)
    nu2 = 0.5 * nu * nu
    p_new = (p - 0.5 * nu * (p_ext[2:] - p_ext[:-2])
             + nu2 * (p_ext[2:] - 2.0 * p + p_ext[:-2]))
    q_new = (q + 0.5 * nu * (q_ext[2:] - q_ext[:-2])
             + nu2 * (q_ext[2:] - 2.0 * q + q_ext[:-2]))
    return replace(state, r_part=p_new + q_new, j_part=p_new - q_new)


# ---------------------------------------------------------------------------
# full step


def compute_dt(policy, eps: float, dx: float, v_max: float) -> float:
    """Time-step policies; `policy` may also be an explicit positive float."""
    if isinstance(policy, (int, float)):
        if policy <= 0:
            raise ValueError("explicit dt must be positive")
        return float(policy)
    if policy == "max":
        return max(eps * dx / (2.0 * v_max), 0.5 * dx * dx)
    if policy == "dx2":
        return 0.5 * dx * dx
    if policy == "eps-dx-half":
        return eps * dx / (2.0 * v_max)
    if policy == "eps-dx":
        return eps * dx / v_max
    try:
        value = float(policy)
    except (TypeError, ValueError):
        raise ValueError(f"unknown dt policy {policy!r}") from None
    if value <= 0:
        raise ValueError("explicit dt must be positive")
    return value


def advance(state: KineticState1D, chemo: ChemoField, builder: ChemoBuilder1D,
            config: SchemeConfig, dt: float) -> tuple[KineticState1D, ChemoField]:
    """One full time step; returns the new state and the chemo field valid
    at the new time (rebuilt after transport; the source stage leaves the
    density, hence S, unchanged)."""
    grid, vgrid = builder.grid, builder.vgrid
    if config.order == 1:
        coeffs = build_source_coefficients(chemo, vgrid, state.eps, config.model)
        state = source_step_first_order(state, coeffs, grid, vgrid, dt)
        state = transport_step_upwind(state, grid, vgrid, dt, config.cfl_check)
        chemo = builder.build(parity_density(state.r_part, vgrid))
    else:
        coeffs = build_source_coefficients(chemo, vgrid, state.eps, config.model)
        state = source_step_exact(state, coeffs, grid, vgrid, 0.5 * dt)
        step = transport_step_tvd if config.transport == "tvd" else transport_step_lw
        state = step(state, grid, vgrid, dt, config.cfl_check)
        chemo = builder.build(parity_density(state.r_part, vgrid))
        coeffs = build_source_coefficients(chemo, vgrid, state.eps, config.model)
        state = source_step_exact(state, coeffs, grid, vgrid, 0.5 * dt)
    state.time += dt
    return state, chemo


__all__ = [
    "CFLError", "SourceCoefficients", "SchemeConfig",
    "build_source_coefficients",
    "source_step_first_order", "source_step_exact",
    "transport_step_upwind", "transport_step_tvd", "transport_step_lw",
    "compute_dt", "advance",
]
