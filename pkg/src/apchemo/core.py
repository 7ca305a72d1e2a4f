"""Grids, velocity quadrature, parity transforms and moments.

Velocity space V = [-v_max, v_max] is represented by midpoint nodes on
V+ = (0, v_max]; fields on the full interval use ascending velocity order
[-v_n .. -v_1, v_1 .. v_n].  The even/odd decomposition of a kinetic
density f is

    r = (f(v) + f(-v)) / 2,    j = (f(v) - f(-v)) / (2 eps),

stored on V+ only.  2D radial states live on cell-centered (r, omega, theta)
grids with theta in (0, pi); there the roles of v and -v are played by the
reflection theta -> pi - theta.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class VelocityGrid1D:
    """Midpoint quadrature nodes on V+ = (0, v_max]."""

    v_max: float
    n_half: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def midpoint(cls, v_max: float = 1.0, n_half: int = 64) -> "VelocityGrid1D":
        if v_max <= 0.0:
            raise ValueError("v_max must be positive")
        if n_half < 1:
            raise ValueError("n_half must be at least 1")
        dv = v_max / n_half
        nodes = (np.arange(n_half) + 0.5) * dv
        weights = np.full(n_half, dv)
        return cls(v_max, n_half, nodes, weights)

    @property
    def dv(self) -> float:
        return self.v_max / self.n_half

    def full_nodes(self) -> np.ndarray:
        """All 2*n_half nodes in ascending order."""
        return np.concatenate([-self.nodes[::-1], self.nodes])


@dataclass(frozen=True)
class SpatialGrid1D:
    """Cell-centered uniform grid on [x_min, x_max]."""

    x_min: float
    x_max: float
    n_x: int
    dx: float
    centers: np.ndarray

    @classmethod
    def uniform(cls, x_min: float, x_max: float, n_x: int) -> "SpatialGrid1D":
        if not x_max > x_min:
            raise ValueError("x_max must exceed x_min")
        if n_x < 3:
            raise ValueError("n_x must be at least 3")
        dx = (x_max - x_min) / n_x
        centers = x_min + (np.arange(n_x) + 0.5) * dx
        return cls(x_min, x_max, n_x, dx, centers)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def refined(self) -> "SpatialGrid1D":
        return SpatialGrid1D.uniform(self.x_min, self.x_max, 2 * self.n_x)


@dataclass(frozen=True)
class PolarGrid2D:
    """Cell-centered (r, omega, theta) grid for the radial 2D model.

    r in (0, r_max], omega (speed) in (0, v_max], theta (angle between x
    and v) in (0, pi).  n_theta must be even so the reflection
    theta -> pi - theta maps the node set onto itself.
    """

    r_max: float
    v_max: float
    n_r: int
    n_omega: int
    n_theta: int
    dr: float
    domega: float
    dtheta: float
    r: np.ndarray
    omega: np.ndarray
    theta: np.ndarray

    @classmethod
    def make(cls, r_max: float = 2.0, v_max: float = 1.0, n_r: int = 250,
             n_omega: int = 16, n_theta: int = 16) -> "PolarGrid2D":
        if r_max <= 0 or v_max <= 0:
            raise ValueError("r_max and v_max must be positive")
        if n_r < 3 or n_omega < 1 or n_theta < 2:
            raise ValueError("grid too small")
        if n_theta % 2:
            raise ValueError("n_theta must be even")
        dr = r_max / n_r
        domega = v_max / n_omega
        dtheta = np.pi / n_theta
        return cls(r_max, v_max, n_r, n_omega, n_theta, dr, domega, dtheta,
                   (np.arange(n_r) + 0.5) * dr,
                   (np.arange(n_omega) + 0.5) * domega,
                   (np.arange(n_theta) + 0.5) * dtheta)

    def refined(self) -> "PolarGrid2D":
        return PolarGrid2D.make(self.r_max, self.v_max, 2 * self.n_r,
                                self.n_omega, self.n_theta)


# ---------------------------------------------------------------------------
# states


@dataclass
class KineticState1D:
    """Even/odd parity fields on (n_x, n_half)."""

    r_part: np.ndarray
    j_part: np.ndarray
    time: float
    eps: float

    def copy(self) -> "KineticState1D":
        return KineticState1D(self.r_part.copy(), self.j_part.copy(),
                              self.time, self.eps)


@dataclass
class RadialState2D:
    """Parity components of r*f on (n_r, n_omega, n_theta).

    By construction R is symmetric and J antisymmetric under reversal of
    the theta axis.
    """

    R_part: np.ndarray
    J_part: np.ndarray
    time: float
    eps: float

    def copy(self) -> "RadialState2D":
        return RadialState2D(self.R_part.copy(), self.J_part.copy(),
                             self.time, self.eps)


# ---------------------------------------------------------------------------
# parity transforms


def parity_split(f: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Split a full-velocity field (..., 2*n_half) into (r, j) on V+."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    n2 = f.shape[-1]
    if n2 % 2:
        raise ValueError("full-velocity axis must have even length")
    n = n2 // 2
    f_plus = f[..., n:]
    f_minus = f[..., n - 1::-1]
    r = 0.5 * (f_plus + f_minus)
    j = (f_plus - f_minus) / (2.0 * eps)
    return r, j


def parity_merge(r: np.ndarray, j: np.ndarray, eps: float) -> np.ndarray:
    """Inverse of parity_split; returns field in ascending velocity order."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    f_plus = r + eps * j
    f_minus = r - eps * j
    return np.concatenate([f_minus[..., ::-1], f_plus], axis=-1)


def radial_parity_split(h: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Split h(r, omega, theta) into even/odd parts under theta -> pi - theta."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    h_ref = h[..., ::-1]
    return 0.5 * (h + h_ref), (h - h_ref) / (2.0 * eps)


def radial_parity_merge(R: np.ndarray, J: np.ndarray, eps: float) -> np.ndarray:
    return R + eps * J


# ---------------------------------------------------------------------------
# moments and masses


def parity_density(r_part: np.ndarray, vgrid: VelocityGrid1D) -> np.ndarray:
    """rho = integral of f over V = 2 * sum_k w_k r_k."""
    return 2.0 * r_part @ vgrid.weights


def density_1d(state: KineticState1D, vgrid: VelocityGrid1D) -> np.ndarray:
    return parity_density(state.r_part, vgrid)


def mass_1d(rho: np.ndarray, grid: SpatialGrid1D) -> float:
    return float(grid.dx * rho.sum())


def density_2d(state: RadialState2D, grid: PolarGrid2D) -> np.ndarray:
    """rho_tilde(r) = 2 * integral of omega * (r f) over (omega, theta)."""
    w = grid.omega * grid.domega * grid.dtheta
    return 2.0 * np.einsum("ilj,l->i", state.R_part, w)


def mass_2d(rho_tilde: np.ndarray, grid: PolarGrid2D) -> float:
    return float(2.0 * np.pi * grid.dr * rho_tilde.sum())


def make_uniform_equilibrium(vgrid: VelocityGrid1D) -> np.ndarray:
    """F = 1/|V| on the V+ nodes; integrates to 1 over V exactly."""
    return np.full(vgrid.n_half, 1.0 / (2.0 * vgrid.v_max))


def radial_equilibrium(grid: PolarGrid2D) -> np.ndarray:
    """F(omega) = 1/(pi v_max^2): 2 pi * integral of omega F domega = 1."""
    return np.full(grid.n_omega, 1.0 / (np.pi * grid.v_max ** 2))


# ---------------------------------------------------------------------------
# initial data


def peak_profile(grid: SpatialGrid1D, peaks, mass: float) -> np.ndarray:
    """Superposition of Gaussian bumps with exact discrete mass `mass`.

    peaks is a sequence of (weight, center, width) with density
    sum_j weight_j * exp(-width_j (x - center_j)^2), rescaled so the
    discrete mass is exactly `mass`.
    """
    if mass <= 0:
        raise ValueError("mass must be positive")
    peaks = list(peaks)
    if not peaks:
        raise ValueError("at least one peak required")
    shape = np.zeros(grid.n_x)
    for weight, center, width in peaks:
        if width <= 0:
            raise ValueError("peak width must be positive")
        shape += weight * np.exp(-width * (grid.centers - center) ** 2)
    raw = mass_1d(shape, grid)
    if raw <= 0:
        raise ValueError("initial profile has nonpositive mass")
    return (mass / raw) * shape


def radial_profile(grid: PolarGrid2D, mass: float, width: float = 15.0) -> np.ndarray:
    """rho_tilde = C r exp(-width r^2) with exact discrete mass `mass`."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    shape = grid.r * np.exp(-width * grid.r ** 2)
    raw = 2.0 * np.pi * grid.dr * shape.sum()
    return (mass / raw) * shape


def init_peaks(grid: SpatialGrid1D, peaks, mass: float,
               vgrid: VelocityGrid1D, eps: float) -> KineticState1D:
    """Well-prepared kinetic state built on peak_profile."""
    rho = peak_profile(grid, peaks, mass)
    equi = make_uniform_equilibrium(vgrid)
    r_part = rho[:, None] * equi[None, :]
    j_part = np.zeros_like(r_part)
    return KineticState1D(r_part, j_part, 0.0, eps)


def init_radial_gaussian(grid: PolarGrid2D, mass: float, eps: float,
                         width: float = 15.0) -> RadialState2D:
    """Well-prepared rho_tilde = C r exp(-width r^2) with exact discrete mass."""
    rho_tilde = radial_profile(grid, mass, width)
    equi = radial_equilibrium(grid)
    R = np.broadcast_to(rho_tilde[:, None, None] * equi[None, :, None],
                        (grid.n_r, grid.n_omega, grid.n_theta)).copy()
    J = np.zeros_like(R)
    return RadialState2D(R, J, 0.0, eps)


# ---------------------------------------------------------------------------
# quadrature constants

# Moment sums on the actual velocity grid: these are the constants the
# schemes inherit in their diffusion limits.

def grid_speed_moment(vgrid: VelocityGrid1D, power: int) -> float:
    """sum_k w_k v_k^p over V+."""
    return float(vgrid.weights @ vgrid.nodes ** power)


@lru_cache(maxsize=8)
def _gauss01(n: int = 48) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _gauss_integral(fn, a: float, b: float) -> float:
    x, w = _gauss01()
    return float((b - a) * (w @ fn(a + (b - a) * x)))


def uniform_diffusion_constant(v_max: float = 1.0) -> float:
    """D = integral of v^2 F over V for F = 1/(2 v_max)."""
    return 2.0 * _gauss_integral(lambda v: v * v / (2.0 * v_max), 0.0, v_max)


def uniform_chi_constant(v_max: float = 1.0) -> float:
    """chi = (1/2) integral of v^2 over V."""
    return _gauss_integral(lambda v: v * v, 0.0, v_max)


def uniform_c1_constant(v_max: float = 1.0) -> float:
    """c1 = (1/2) integral of |v| over V."""
    return _gauss_integral(lambda v: v, 0.0, v_max)


def radial_diffusion_constant(v_max: float = 1.0) -> float:
    """D = pi * integral of omega^3 F(omega) for F = 1/(pi v_max^2)."""
    return np.pi * _gauss_integral(lambda w: w ** 3 / (np.pi * v_max ** 2),
                                   0.0, v_max)


def radial_chi_constant(v_max: float = 1.0) -> float:
    """chi = integral of omega^3 cos^2(theta) over (0,v_max)x(0,pi) = pi v_max^4/8."""
    return (_gauss_integral(lambda w: w ** 3, 0.0, v_max)
            * _gauss_integral(lambda t: np.cos(t) ** 2, 0.0, np.pi))


def radial_c2_constant(v_max: float = 1.0) -> float:
    """c2 = integral of omega^2 |cos theta| over (0,v_max)x(0,pi) = 2 v_max^3/3.

    |cos| has a kink at pi/2, so the angular factor is integrated piecewise.
    """
    ang = (_gauss_integral(np.cos, 0.0, 0.5 * np.pi)
           - _gauss_integral(np.cos, 0.5 * np.pi, np.pi))
    return _gauss_integral(lambda w: w * w, 0.0, v_max) * ang


__all__ = [
    "VelocityGrid1D", "SpatialGrid1D", "PolarGrid2D",
    "KineticState1D", "RadialState2D",
    "parity_split", "parity_merge", "radial_parity_split", "radial_parity_merge",
    "parity_density", "density_1d", "mass_1d", "density_2d", "mass_2d",
    "make_uniform_equilibrium", "radial_equilibrium",
    "peak_profile", "radial_profile", "init_peaks", "init_radial_gaussian",
    "grid_speed_moment",
    "uniform_diffusion_constant", "uniform_chi_constant", "uniform_c1_constant",
    "radial_diffusion_constant", "radial_chi_constant", "radial_c2_constant",
]
