"""Scenario orchestration: time loops, adaptive refinement, diagnostics, CSV.

Every model shares the same run shape: build the state from the config, march
to t_max landing exactly on requested snapshot times, record diagnostics at a
fixed step cadence, and persist the records as CSV when an output directory is
configured.  The 1D kinetic runs optionally refine the spatial grid whenever
the chemoattractant gradient doubles relative to the last refinement.

CSV files use RFC-4180 framing (comma separated, CRLF, header row) with
shortest round-trip float formatting, so reruns of the same config are
byte-identical.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chemo import ChemoBuilder1D, convolve_log, grad_s_1d, grad_s_radial
from .config import ExperimentConfig
from .core import (KineticState1D, PolarGrid2D, SpatialGrid1D, VelocityGrid1D,
                   density_2d, init_peaks, init_radial_gaussian, mass_1d,
                   mass_2d, parity_density, parity_merge, peak_profile,
                   radial_parity_merge, radial_profile)
from .macro import ks1d_coefficients, ks2d_coefficients, ks_step_1d, ks_step_radial
from .solver1d import SchemeConfig, advance, compute_dt
from .solver2d import radial_advance, radial_transport_dt

_TINY = 1e-12


class PoisonedStateError(RuntimeError):
    """Non-finite values appeared in the evolving state."""

    def __init__(self, stage: str, step: int, time: float):
        super().__init__(f"non-finite state in {stage} after step {step} "
                         f"at t = {time:.8g}")
        self.stage = stage
        self.step = step
        self.time = time


class RefinementCapError(RuntimeError):
    """Adaptive refinement hit max_levels; blow-up suspected."""

    def __init__(self, summary: "RunSummary"):
        super().__init__(
            f"refinement cap reached at t = {summary.final_time:.8g}; "
            "blow-up suspected")
        self.summary = summary


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    max_rho: float
    min_rho: float
    mass: float
    linf_grad_s: float
    n_x: int
    dt: float


@dataclass(frozen=True)
class RefinementEvent:
    time: float
    step: int
    old_n_x: int
    new_n_x: int
    trigger_value: float


@dataclass(frozen=True)
class Snapshot:
    """State extract at one time: density, potential, and full distribution."""

    time: float
    axis: np.ndarray          # x (1D) or r (radial) cell centers
    rho: np.ndarray
    s: np.ndarray
    grad_s: np.ndarray
    phase: np.ndarray | None  # merged distribution; None for macro models


@dataclass
class RunSummary:
    status: str               # "completed" | "stopped-early" | "blow-up-suspected"
    model: str
    final_time: float
    n_steps: int
    records: list = field(default_factory=list)
    refinements: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([rec.t for rec in self.records])

    @property
    def max_rho_series(self) -> np.ndarray:
        return np.array([rec.max_rho for rec in self.records])

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]


@dataclass
class AdaptiveController:
    """Doubling trigger on the chemoattractant gradient sup-norm."""

    s_ref: float
    max_levels: int
    levels_used: int = 0

    def should_refine(self, linf_grad: float) -> bool:
        return linf_grad >= 2.0 * self.s_ref

    def mark(self, linf_grad: float):
        self.s_ref = linf_grad
        self.levels_used += 1


def refine_kinetic_state(state: KineticState1D, grid: SpatialGrid1D,
                         ) -> tuple[KineticState1D, SpatialGrid1D]:
    """Double the spatial grid, linearly interpolating each velocity column
    and rescaling the even part so the total mass is reproduced exactly."""
    fine = grid.refined()
    n_half = state.r_part.shape[1]
    r_new = np.empty((fine.n_x, n_half))
    j_new = np.empty((fine.n_x, n_half))
    for k in range(n_half):
        r_new[:, k] = np.interp(fine.centers, grid.centers, state.r_part[:, k])
        j_new[:, k] = np.interp(fine.centers, grid.centers, state.j_part[:, k])
    mass_before = grid.dx * state.r_part.sum()
    mass_after = fine.dx * r_new.sum()
    if mass_after > 0.0:
        r_new *= mass_before / mass_after
    return (KineticState1D(r_new, j_new, state.time, state.eps), fine)


# ---------------------------------------------------------------------------
# time loop plumbing shared by all models


def _snapshot_plan(cfg: ExperimentConfig) -> list[float]:
    times = sorted(set(float(t) for t in cfg.profile_times))
    if not times or abs(times[-1] - cfg.t_max) > _TINY:
        times.append(cfg.t_max)
    return times


def _next_stop(time: float, t_max: float, pending: list[float]) -> float:
    target = t_max
    if pending:
        target = min(target, pending[0])
    return target - time


def _pop_due(pending: list[float], time: float) -> list[float]:
    due = []
    while pending and pending[0] <= time + 1e-9:
        due.append(pending.pop(0))
    return due


# ---------------------------------------------------------------------------
# kinetic 1D runs


def _kinetic_snapshot(state: KineticState1D, chemo, grid: SpatialGrid1D,
                      vgrid: VelocityGrid1D) -> Snapshot:
    rho = parity_density(state.r_part, vgrid)
    return Snapshot(state.time, grid.centers.copy(), rho,
                    chemo.s_values.copy(), chemo.grad_s.copy(),
                    parity_merge(state.r_part, state.j_part, state.eps))


def _kinetic_record(state, chemo, vgrid, grid, dt) -> DiagnosticsRecord:
    rho = parity_density(state.r_part, vgrid)
    return DiagnosticsRecord(state.time, float(rho.max()), float(rho.min()),
                             mass_1d(rho, grid),
                             float(np.abs(chemo.grad_s).max()), grid.n_x, dt)


def _run_kinetic_1d(cfg: ExperimentConfig) -> RunSummary:
    grid = SpatialGrid1D.uniform(cfg.x_min, cfg.x_max, cfg.n_x)
    vgrid = VelocityGrid1D.midpoint(cfg.v_max, cfg.n_half)
    state = init_peaks(grid, cfg.peaks, cfg.mass, vgrid, cfg.eps)
    builder = ChemoBuilder1D(grid, vgrid, cfg.eps, model=cfg.model)
    chemo = builder.build(parity_density(state.r_part, vgrid))
    scheme = SchemeConfig(order=cfg.order, model=cfg.model,
                          transport=cfg.transport, cfl_check=cfg.cfl_check)
    dt = compute_dt(cfg.dt_policy, cfg.eps, grid.dx, cfg.v_max)

    controller = None
    if cfg.adaptive:
        controller = AdaptiveController(float(np.abs(chemo.grad_s).max()),
                                        cfg.max_levels)

    summary = RunSummary("completed", cfg.model, 0.0, 0)
    summary.records.append(_kinetic_record(state, chemo, vgrid, grid, dt))
    pending = _snapshot_plan(cfg)
    for t in _pop_due(pending, 0.0):
        summary.snapshots.append(_kinetic_snapshot(state, chemo, grid, vgrid))

    step = 0
    while state.time < cfg.t_max - _TINY:
        dt_step = min(dt, _next_stop(state.time, cfg.t_max, pending))
        state, chemo = advance(state, chemo, builder, scheme, dt_step)
        step += 1
        if not (np.isfinite(state.r_part).all() and np.isfinite(state.j_part).all()):
            raise PoisonedStateError(f"{cfg.model} advance", step, state.time)

        refined_now = False
        if controller is not None:
            linf = float(np.abs(chemo.grad_s).max())
            if controller.should_refine(linf):
                if controller.levels_used >= cfg.max_levels:
                    summary.status = "blow-up-suspected"
                    summary.final_time = state.time
                    summary.n_steps = step
                    summary.records.append(
                        _kinetic_record(state, chemo, vgrid, grid, dt_step))
                    raise RefinementCapError(summary)
                old_n = grid.n_x
                state, grid = refine_kinetic_state(state, grid)
                builder = ChemoBuilder1D(grid, vgrid, cfg.eps, model=cfg.model)
                chemo = builder.build(parity_density(state.r_part, vgrid))
                dt *= 0.5
                controller.mark(linf)
                summary.refinements.append(
                    RefinementEvent(state.time, step, old_n, grid.n_x, linf))
                refined_now = True

        if step % cfg.record_every == 0 or refined_now:
            summary.records.append(_kinetic_record(state, chemo, vgrid, grid, dt_step))
        for t in _pop_due(pending, state.time):
            summary.snapshots.append(_kinetic_snapshot(state, chemo, grid, vgrid))
        if cfg.stop_above_max_rho is not None:
            rho_max = float(parity_density(state.r_part, vgrid).max())
            if rho_max >= cfg.stop_above_max_rho:
                summary.status = "stopped-early"
                break

    if summary.records[-1].t < state.time - _TINY:
        summary.records.append(_kinetic_record(state, chemo, vgrid, grid, dt))
    if not summary.snapshots or summary.snapshots[-1].time < state.time - _TINY:
        summary.snapshots.append(_kinetic_snapshot(state, chemo, grid, vgrid))
    summary.final_time = state.time
    summary.n_steps = step
    return summary


# ---------------------------------------------------------------------------
# radial 2D runs


def _radial_potential(grad: np.ndarray, dr: float) -> np.ndarray:
    """Integrate dS/dr from the axis outward; S(0) is pinned to zero, so the
    reported radial potential carries an arbitrary additive constant."""
    return dr * (np.cumsum(grad) - 0.5 * grad)


def _radial_snapshot(state, grid: PolarGrid2D) -> Snapshot:
    rho_t = density_2d(state, grid)
    grad = grad_s_radial(rho_t, grid)
    return Snapshot(state.time, grid.r.copy(), rho_t / grid.r,
                    _radial_potential(grad, grid.dr), grad,
                    radial_parity_merge(state.R_part, state.J_part, state.eps))


def _radial_record(state, grid, dt) -> DiagnosticsRecord:
    rho_t = density_2d(state, grid)
    rho = rho_t / grid.r
    grad = grad_s_radial(rho_t, grid)
    return DiagnosticsRecord(state.time, float(rho.max()), float(rho.min()),
                             mass_2d(rho_t, grid),
                             float(np.abs(grad).max()), grid.n_r, dt)


def _run_radial_2d(cfg: ExperimentConfig) -> RunSummary:
    grid = PolarGrid2D.make(cfg.r_max, cfg.v_max, cfg.n_r, cfg.n_omega,
                            cfg.n_theta)
    state = init_radial_gaussian(grid, cfg.mass, cfg.eps, cfg.radial_width)
    if isinstance(cfg.dt_policy, (int, float)):
        dt = float(cfg.dt_policy)
    else:
        dt = radial_transport_dt(grid)

    summary = RunSummary("completed", cfg.model, 0.0, 0)
    summary.records.append(_radial_record(state, grid, dt))
    pending = _snapshot_plan(cfg)
    for t in _pop_due(pending, 0.0):
        summary.snapshots.append(_radial_snapshot(state, grid))

    step = 0
    while state.time < cfg.t_max - _TINY:
        dt_step = min(dt, _next_stop(state.time, cfg.t_max, pending))
        state = radial_advance(state, grid, dt_step, cfl_check=cfg.cfl_check)
        step += 1
        if not (np.isfinite(state.R_part).all() and np.isfinite(state.J_part).all()):
            raise PoisonedStateError("radial advance", step, state.time)
        if step % cfg.record_every == 0:
            summary.records.append(_radial_record(state, grid, dt_step))
        for t in _pop_due(pending, state.time):
            summary.snapshots.append(_radial_snapshot(state, grid))
        if cfg.stop_above_max_rho is not None:
            rho_t = density_2d(state, grid)
            if float((rho_t / grid.r).max()) >= cfg.stop_above_max_rho:
                summary.status = "stopped-early"
                break

    if summary.records[-1].t < state.time - _TINY:
        summary.records.append(_radial_record(state, grid, dt))
    if not summary.snapshots or summary.snapshots[-1].time < state.time - _TINY:
        summary.snapshots.append(_radial_snapshot(state, grid))
    summary.final_time = state.time
    summary.n_steps = step
    return summary


# ---------------------------------------------------------------------------
# macroscopic limit runs


def _run_ks_1d(cfg: ExperimentConfig) -> RunSummary:
    grid = SpatialGrid1D.uniform(cfg.x_min, cfg.x_max, cfg.n_x)
    rho = peak_profile(grid, cfg.peaks, cfg.mass)
    coeffs = ks1d_coefficients(cfg.v_max)
    safety = 0.45
    diff_dt = safety * 0.5 * grid.dx ** 2 / coeffs.diffusion

    def fields(rho):
        s = convolve_log(rho, grid, warn=False)
        return s, grad_s_1d(s, grid)

    def record(rho, s, g, dt):
        return DiagnosticsRecord(time, float(rho.max()), float(rho.min()),
                                 mass_1d(rho, grid),
                                 float(np.abs(g).max()), grid.n_x, dt)

    def snapshot(rho, s, g):
        return Snapshot(time, grid.centers.copy(), rho.copy(), s.copy(),
                        g.copy(), None)

    time = 0.0
    s, g = fields(rho)
    summary = RunSummary("completed", cfg.model, 0.0, 0)
    summary.records.append(record(rho, s, g, diff_dt))
    pending = _snapshot_plan(cfg)
    for t in _pop_due(pending, 0.0):
        summary.snapshots.append(snapshot(rho, s, g))

    step = 0
    while time < cfg.t_max - _TINY:
        gmax = float(np.abs(g).max())
        dt = diff_dt
        if gmax > 0.0:
            dt = min(dt, safety * grid.dx / (coeffs.chi * gmax))
        dt = min(dt, _next_stop(time, cfg.t_max, pending))
        rho = ks_step_1d(rho, grid, coeffs, dt, warn=False, s=s)
        time += dt
        step += 1
        if not np.isfinite(rho).all():
            raise PoisonedStateError("drift-diffusion step", step, time)
        s, g = fields(rho)
        if step % cfg.record_every == 0:
            summary.records.append(record(rho, s, g, dt))
        for t in _pop_due(pending, time):
            summary.snapshots.append(snapshot(rho, s, g))
        if (cfg.stop_above_max_rho is not None
                and float(rho.max()) >= cfg.stop_above_max_rho):
            summary.status = "stopped-early"
            break

    if summary.records[-1].t < time - _TINY:
        summary.records.append(record(rho, s, g, diff_dt))
    if not summary.snapshots or summary.snapshots[-1].time < time - _TINY:
        summary.snapshots.append(snapshot(rho, s, g))
    summary.final_time = time
    summary.n_steps = step
    return summary


def _run_ks_radial(cfg: ExperimentConfig) -> RunSummary:
    grid = PolarGrid2D.make(cfg.r_max, cfg.v_max, cfg.n_r, cfg.n_omega,
                            cfg.n_theta)
    rho_t = radial_profile(grid, cfg.mass, cfg.radial_width)
    coeffs = ks2d_coefficients(cfg.v_max)
    safety = 0.45
    diff_dt = safety * 0.5 * grid.dr ** 2 / coeffs.diffusion

    def record(rho_t, dt):
        rho = rho_t / grid.r
        g = grad_s_radial(rho_t, grid)
        return DiagnosticsRecord(time, float(rho.max()), float(rho.min()),
                                 mass_2d(rho_t, grid),
                                 float(np.abs(g).max()), grid.n_r, dt)

    def snapshot(rho_t):
        g = grad_s_radial(rho_t, grid)
        return Snapshot(time, grid.r.copy(), rho_t / grid.r,
                        _radial_potential(g, grid.dr), g, None)

    time = 0.0
    summary = RunSummary("completed", cfg.model, 0.0, 0)
    summary.records.append(record(rho_t, diff_dt))
    pending = _snapshot_plan(cfg)
    for t in _pop_due(pending, 0.0):
        summary.snapshots.append(snapshot(rho_t))

    step = 0
    while time < cfg.t_max - _TINY:
        gmax = float(np.abs(grad_s_radial(rho_t, grid)).max())
        dt = diff_dt
        if gmax > 0.0:
            dt = min(dt, safety * grid.dr / (coeffs.chi * gmax))
        dt = min(dt, _next_stop(time, cfg.t_max, pending))
        rho_t = ks_step_radial(rho_t, grid, coeffs, dt, warn=False)
        time += dt
        step += 1
        if not np.isfinite(rho_t).all():
            raise PoisonedStateError("radial drift-diffusion step", step, time)
        if step % cfg.record_every == 0:
            summary.records.append(record(rho_t, dt))
        for t in _pop_due(pending, time):
            summary.snapshots.append(snapshot(rho_t))
        if (cfg.stop_above_max_rho is not None
                and float((rho_t / grid.r).max()) >= cfg.stop_above_max_rho):
            summary.status = "stopped-early"
            break

    if summary.records[-1].t < time - _TINY:
        summary.records.append(record(rho_t, diff_dt))
    if not summary.snapshots or summary.snapshots[-1].time < time - _TINY:
        summary.snapshots.append(snapshot(rho_t))
    summary.final_time = time
    summary.n_steps = step
    return summary


_RUNNERS = {
    "nonlocal1d": _run_kinetic_1d,
    "local1d": _run_kinetic_1d,
    "local2d_radial": _run_radial_2d,
    "ks1d": _run_ks_1d,
    "ks2d_radial": _run_ks_radial,
}

_RADIAL_MODELS = ("local2d_radial", "ks2d_radial")


def run_scenario(cfg: ExperimentConfig) -> RunSummary:
    """Execute one configured run and write its CSV bundle if requested."""
    runner = _RUNNERS[cfg.model]
    try:
        summary = runner(cfg)
    except RefinementCapError as exc:
        if cfg.out_dir is not None:
            write_run_outputs(cfg, exc.summary)
        raise
    if cfg.out_dir is not None:
        write_run_outputs(cfg, summary)
    return summary


# ---------------------------------------------------------------------------
# CSV persistence


def format_float(x) -> str:
    return repr(float(x))


def format_label(x) -> str:
    return f"{float(x):g}"


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_timeseries_csv(path, records):
    rows = [[format_float(rec.t), format_float(rec.max_rho),
             format_float(rec.min_rho), format_float(rec.mass),
             format_float(rec.linf_grad_s), str(rec.n_x),
             format_float(rec.dt)] for rec in records]
    write_csv(path, ["t", "max_rho", "min_rho", "mass", "linf_grad_s",
                     "n_x", "dt"], rows)


def write_profile_csv(path, snap: Snapshot, axis_name: str):
    rows = [[format_float(x), format_float(rho), format_float(s),
             format_float(g)]
            for x, rho, s, g in zip(snap.axis, snap.rho, snap.s, snap.grad_s)]
    write_csv(path, [axis_name, "rho", "s", "grad_s"], rows)


def write_run_outputs(cfg: ExperimentConfig, summary: RunSummary):
    out = Path(cfg.out_dir)
    write_timeseries_csv(out / "timeseries.csv", summary.records)
    axis_name = "r" if cfg.model in _RADIAL_MODELS else "x"
    for snap in summary.snapshots:
        name = f"profile_{format_label(snap.time)}.csv"
        write_profile_csv(out / name, snap, axis_name)


def write_convergence_csv(path, rows):
    """rows: (dx, error, order-or-None)."""
    out = [[format_float(dx), format_float(err),
            "" if order is None else format_float(order)]
           for dx, err, order in rows]
    write_csv(path, ["dx", "e1", "order"], out)


def write_eps_sweep_csv(path, rows):
    """rows: (eps, dist_f_rhoF_l2, dist_rho_rho0_l1)."""
    out = [[format_float(eps), format_float(d2), format_float(d1)]
           for eps, d2, d1 in rows]
    write_csv(path, ["eps", "dist_f_rhoF_l2", "dist_rho_rho0_l1"], out)


def write_stationary_csv(out_dir, eps, y, values):
    path = Path(out_dir) / f"stationary_{format_label(eps)}.csv"
    rows = [[format_float(a), format_float(b)] for a, b in zip(y, values)]
    write_csv(path, ["x_rescaled", "eps_rho_eps"], rows)


def write_ftilde_csv(out_dir, station_x, v_nodes, ftilde):
    path = Path(out_dir) / f"ftilde_{format_label(station_x)}.csv"
    rows = [[format_float(v), format_float(f)] for v, f in zip(v_nodes, ftilde)]
    write_csv(path, ["v", "ftilde"], rows)


def write_selfsim_csv(path, taus, l1_to_final):
    rows = [[format_float(tau), format_float(d)]
            for tau, d in zip(taus, l1_to_final)]
    write_csv(path, ["tau", "l1_to_final"], rows)


__all__ = [
    "PoisonedStateError", "RefinementCapError", "DiagnosticsRecord",
    "RefinementEvent", "Snapshot", "RunSummary", "AdaptiveController",
    "refine_kinetic_state", "run_scenario",
    "format_float", "format_label", "write_csv", "write_timeseries_csv",
    "write_profile_csv", "write_run_outputs", "write_convergence_csv",
    "write_eps_sweep_csv", "write_stationary_csv", "write_ftilde_csv",
    "write_selfsim_csv",
]
