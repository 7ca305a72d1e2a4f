"""Convergence tables, limit distances, and rescaled long-time diagnostics.

The grid-refinement error between a fine and a coarse run is measured after
conservative restriction: the fine solution is averaged over cell pairs onto
the coarse grid, and the l1 difference is normalized by the l1 size of the
coarse initial data.  All norms are grid-weighted so values are comparable
across resolutions.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import ExperimentConfig
from .core import VelocityGrid1D
from .experiment import RunSummary, Snapshot, run_scenario
from .macro import BlowupReport, detect_blowup


def restrict_pairs(arr: np.ndarray) -> np.ndarray:
    """Average adjacent cell pairs along axis 0 (conservative restriction)."""
    if arr.shape[0] % 2:
        raise ValueError("axis 0 must have even length")
    return 0.5 * (arr[0::2] + arr[1::2])


def l1_norm(arr: np.ndarray, cell_volume: float = 1.0) -> float:
    return float(cell_volume * np.abs(arr).sum())


def l2_norm(arr: np.ndarray, cell_volume: float = 1.0) -> float:
    return float(np.sqrt(cell_volume * np.square(arr).sum()))


# ---------------------------------------------------------------------------
# grid convergence


@dataclass(frozen=True)
class ConvergenceRow:
    dx: float
    error: float
    order: float | None


def convergence_rows(levels) -> list[ConvergenceRow]:
    """Pairwise refinement errors from a coarse-to-fine level sequence.

    Each level is a (dx, f_initial, f_final) triple whose arrays double along
    axis 0 from one level to the next.  Row k holds the error of level k
    against level k-1; the order column compares consecutive errors.
    """
    if len(levels) < 3:
        raise ValueError("need at least three grid levels")
    for (_, f0c, ftc), (_, f0f, ftf) in zip(levels, levels[1:]):
        if f0f.shape[0] != 2 * f0c.shape[0] or ftf.shape[0] != 2 * ftc.shape[0]:
            raise ValueError("levels must double along axis 0")
    rows: list[ConvergenceRow] = []
    prev_error = None
    for (dx_c, f0c, ftc), (dx_f, _, ftf) in zip(levels, levels[1:]):
        num = l1_norm(restrict_pairs(ftf) - ftc)
        den = l1_norm(f0c)
        error = num / den
        order = None
        if prev_error is not None:
            order = float(np.log2(prev_error / error)) if error > 0 else None
        rows.append(ConvergenceRow(dx_f, error, order))
        prev_error = error
    return rows


def fitted_order(rows) -> float:
    """Least-squares slope of log(error) against log(dx) over the rows.

    This is the slope a log-log refinement plot shows; it smooths the
    sign-interference wobble that pairwise orders pick up on coarse ladders.
    """
    pts = [(r.dx, r.error) for r in rows if r.error is not None and r.error > 0]
    if len(pts) < 2:
        raise ValueError("need at least two positive errors to fit an order")
    dx = np.log([p[0] for p in pts])
    err = np.log([p[1] for p in pts])
    return float(np.polyfit(dx, err, 1)[0])


def _comparison_field(snap: Snapshot) -> np.ndarray:
    return snap.rho if snap.phase is None else snap.phase


def _sized_config(cfg: ExperimentConfig, size: int, times=None) -> ExperimentConfig:
    kwargs = dict(out_dir=None)
    if times is not None:
        times = tuple(sorted(times))
        kwargs.update(profile_times=times, t_max=times[-1])
    if cfg.model in ("local2d_radial", "ks2d_radial"):
        kwargs["n_r"] = size
    else:
        kwargs["n_x"] = size
    return replace(cfg, **kwargs)


def _level_dx(cfg: ExperimentConfig, size: int) -> float:
    if cfg.model in ("local2d_radial", "ks2d_radial"):
        return cfg.r_max / size
    return (cfg.x_max - cfg.x_min) / size


def convergence_study(cfg: ExperimentConfig, sizes, times
                      ) -> dict[float, list[ConvergenceRow]]:
    """Run `cfg` at each grid size and tabulate errors at each time.

    sizes must at least triple-step in doubling order (coarse to fine); times
    are the evaluation instants (snapshots are taken exactly there).
    """
    sizes = list(sizes)
    if len(sizes) < 3:
        raise ValueError("need at least three grid levels")
    times = tuple(sorted(times))
    if times[0] <= 0.0:
        raise ValueError("evaluation times must be positive")
    summaries = [run_scenario(_sized_config(cfg, n, (0.0,) + times))
                 for n in sizes]
    tables: dict[float, list[ConvergenceRow]] = {}
    for k, t in enumerate(times):
        levels = []
        for size, summary in zip(sizes, summaries):
            f0 = _comparison_field(summary.snapshots[0])
            ft = _comparison_field(summary.snapshots[k + 1])
            levels.append((_level_dx(cfg, size), f0, ft))
        tables[t] = convergence_rows(levels)
    return tables


# ---------------------------------------------------------------------------
# limit distance in eps


@dataclass(frozen=True)
class EpsRow:
    eps: float
    dist_f_rhoF_l2: float
    dist_rho_rho0_l1: float


def eps_convergence_study(cfg: ExperimentConfig, eps_list, t_eval=None
                          ) -> tuple[list[EpsRow], float]:
    """Distances to local equilibrium and to the drift-diffusion density.

    Runs the kinetic model at each eps on the common grid of `cfg`, plus one
    macroscopic run for the reference density.  Returns the rows and the
    least-squares slope of log(dist_f_rhoF_l2) against log(eps).
    """
    if cfg.model not in ("nonlocal1d", "local1d"):
        raise ValueError("eps study needs a 1D kinetic model")
    t_eval = cfg.t_max if t_eval is None else float(t_eval)
    grid_dx = (cfg.x_max - cfg.x_min) / cfg.n_x
    dv = cfg.v_max / cfg.n_half
    equil = 1.0 / (2.0 * cfg.v_max)

    ks_cfg = replace(cfg, model="ks1d", order=1, adaptive=False,
                     profile_times=(t_eval,), t_max=t_eval, out_dir=None)
    rho0 = run_scenario(ks_cfg).snapshots[0].rho

    rows: list[EpsRow] = []
    for eps in eps_list:
        run_cfg = replace(cfg, eps=float(eps), profile_times=(t_eval,),
                          t_max=t_eval, out_dir=None)
        snap = run_scenario(run_cfg).snapshots[0]
        dist2 = l2_norm(snap.phase - snap.rho[:, None] * equil, grid_dx * dv)
        dist1 = l1_norm(snap.rho - rho0, grid_dx)
        rows.append(EpsRow(float(eps), dist2, dist1))
    log_eps = np.log([row.eps for row in rows])
    log_d = np.log([row.dist_f_rhoF_l2 for row in rows])
    fitted_order = float(np.polyfit(log_eps, log_d, 1)[0])
    return rows, fitted_order


# ---------------------------------------------------------------------------
# stationary structure


@dataclass(frozen=True)
class StationCheck:
    x: float
    moment_zero: float     # quadrature of ftilde over velocity
    moment_one: float      # quadrature of v * ftilde
    v_nodes: np.ndarray
    ftilde: np.ndarray


def station_checks(snap: Snapshot, vgrid: VelocityGrid1D, stations_x,
                   floor_rel: float = 1e-8) -> list[StationCheck]:
    """Velocity profiles f/rho at the cells nearest each station.

    Stations whose density is below floor_rel times the peak are skipped.
    """
    if snap.phase is None:
        raise ValueError("needs a kinetic snapshot with a phase array")
    v_full = np.concatenate([-vgrid.nodes[::-1], vgrid.nodes])
    dv = vgrid.dv
    floor = floor_rel * float(snap.rho.max())
    checks = []
    for x in stations_x:
        idx = int(np.argmin(np.abs(snap.axis - x)))
        if snap.rho[idx] < floor:
            continue
        ftilde = snap.phase[idx] / snap.rho[idx]
        checks.append(StationCheck(float(snap.axis[idx]),
                                   float(dv * ftilde.sum()),
                                   float(dv * (v_full * ftilde).sum()),
                                   v_full.copy(), ftilde))
    return checks


def rescaled_density(snap: Snapshot, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """The density in concentration variables: y = x/eps, value eps*rho."""
    return snap.axis / eps, eps * snap.rho


def overlay_distance(y_a, g_a, y_b, g_b) -> float:
    """Relative l1 distance of curve b from curve a on a's axis."""
    b_on_a = np.interp(y_a, y_b, g_b)
    return float(np.abs(g_a - b_on_a).sum() / np.abs(g_a).sum())


# ---------------------------------------------------------------------------
# self-similar rescaling


@dataclass(frozen=True)
class SelfSimilarSeries:
    taus: np.ndarray
    y: np.ndarray
    profiles: np.ndarray      # (n_times, n_y) rescaled densities
    l1_to_final: np.ndarray


def self_similar_series(times, rhos, axis) -> SelfSimilarSeries:
    """Rescale density snapshots by R(t) = sqrt(1 + 2t).

    The common similarity axis is the grid axis shrunk by the final R, so
    every evaluation point stays inside the original domain.
    """
    times = np.asarray(times, dtype=float)
    axis = np.asarray(axis, dtype=float)
    scale = np.sqrt(1.0 + 2.0 * times)
    taus = np.log(scale)
    y = axis / scale[-1]
    profiles = np.empty((times.size, y.size))
    for i, rho in enumerate(rhos):
        profiles[i] = scale[i] * np.interp(scale[i] * y, axis, rho)
    dy = float(y[1] - y[0])
    l1 = dy * np.abs(profiles - profiles[-1]).sum(axis=1)
    return SelfSimilarSeries(taus, y, profiles, l1)


def self_similar_study(cfg: ExperimentConfig, n_snapshots: int = 25
                       ) -> SelfSimilarSeries:
    """Run the scenario and rescale its density snapshots."""
    times = tuple(np.linspace(0.0, cfg.t_max, n_snapshots + 1)[1:])
    summary = run_scenario(replace(cfg, profile_times=times, out_dir=None))
    snaps = summary.snapshots
    return self_similar_series([s.time for s in snaps],
                               [s.rho for s in snaps], snaps[0].axis)


# ---------------------------------------------------------------------------
# blow-up classification across refinement levels


def blowup_study(cfg: ExperimentConfig, sizes) -> tuple[BlowupReport, list[RunSummary]]:
    """Run the scenario at each grid size and classify the peak histories."""
    if cfg.blowup_threshold is None:
        raise ValueError("config needs blowup_threshold for a blow-up study")
    summaries = []
    levels = []
    for size in sizes:
        run_cfg = _sized_config(cfg, size, (cfg.t_max,))
        summary = run_scenario(run_cfg)
        summaries.append(summary)
        levels.append((summary.times, summary.max_rho_series))
    return detect_blowup(levels, cfg.blowup_threshold), summaries


__all__ = [
    "restrict_pairs", "l1_norm", "l2_norm",
    "ConvergenceRow", "convergence_rows", "convergence_study", "fitted_order",
    "EpsRow", "eps_convergence_study",
    "StationCheck", "station_checks", "rescaled_density", "overlay_distance",
    "SelfSimilarSeries", "self_similar_series", "self_similar_study",
    "blowup_study",
]
