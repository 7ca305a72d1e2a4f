"""Scenario runs: diagnostics, snapshots, refinement, failure modes, CSV."""
import math

import numpy as np
import pytest

from apchemo.config import ExperimentConfig
from apchemo.core import SpatialGrid1D, VelocityGrid1D, init_peaks
from apchemo.experiment import (AdaptiveController, PoisonedStateError,
                                RefinementCapError, refine_kinetic_state,
                                run_scenario, write_convergence_csv,
                                write_eps_sweep_csv)
from apchemo.macro import KSCoefficients, ks_step_1d
from apchemo.studies import convergence_rows

MASS = math.pi


def small_cfg(**kw):
    base = dict(model="nonlocal1d", mass=MASS, t_max=0.01, eps=0.1, n_x=100)
    base.update(kw)
    return ExperimentConfig(**base)


def test_mass_drift_below_1e9_across_records():
    summary = run_scenario(small_cfg(t_max=0.02))
    masses = np.array([rec.mass for rec in summary.records])
    drift = np.abs(masses - masses[0]).max() / masses[0]
    assert drift <= 1e-9
    assert summary.status == "completed"


def test_snapshots_land_exactly_on_profile_times():
    cfg = small_cfg(profile_times=(0.0, 0.004), t_max=0.01)
    summary = run_scenario(cfg)
    got = [snap.time for snap in summary.snapshots]
    assert len(got) == 3
    for value, want in zip(got, (0.0, 0.004, 0.01)):
        assert abs(value - want) <= 1e-9
    # kinetic snapshots carry the full distribution, axis matches n_x
    snap = summary.final
    assert snap.phase is not None and snap.phase.shape == (100, 64)
    assert snap.axis.shape == snap.rho.shape == snap.s.shape


def test_macro_snapshot_has_no_phase():
    cfg = ExperimentConfig(model="ks1d", mass=MASS, t_max=0.003, n_x=100)
    summary = run_scenario(cfg)
    assert summary.final.phase is None


def test_record_every_thins_the_series():
    dense = run_scenario(small_cfg())
    thin = run_scenario(small_cfg(record_every=10))
    assert len(thin.records) < len(dense.records)
    assert thin.records[-1].t == pytest.approx(dense.records[-1].t, abs=1e-12)


def test_rerun_outputs_are_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        run_scenario(small_cfg(profile_times=(0.005,), out_dir=str(out)))
    for name in ("timeseries.csv", "profile_0.005.csv", "profile_0.01.csv"):
        blob_a = (out_a / name).read_bytes()
        assert blob_a == (out_b / name).read_bytes()
        assert blob_a.endswith(b"\r\n")


def test_timeseries_and_profile_headers(tmp_path):
    out = tmp_path / "run"
    run_scenario(small_cfg(out_dir=str(out)))
    head = (out / "timeseries.csv").read_text().splitlines()[0]
    assert head == "t,max_rho,min_rho,mass,linf_grad_s,n_x,dt"
    head = (out / "profile_0.01.csv").read_text().splitlines()[0]
    assert head == "x,rho,s,grad_s"


def test_radial_profile_uses_r_axis(tmp_path):
    out = tmp_path / "radial"
    cfg = ExperimentConfig(model="ks2d_radial", mass=1.0, t_max=0.001,
                           n_r=60, out_dir=str(out))
    run_scenario(cfg)
    head = (out / "profile_0.001.csv").read_text().splitlines()[0]
    assert head == "r,rho,s,grad_s"


def test_study_csv_headers(tmp_path):
    conv = tmp_path / "conv.csv"
    write_convergence_csv(conv, [(0.02, 1e-3, None), (0.01, 2.5e-4, 2.0)])
    lines = conv.read_text().splitlines()
    assert lines[0] == "dx,e1,order"
    assert lines[1].endswith(",")  # empty order cell on the first row
    sweep = tmp_path / "eps.csv"
    write_eps_sweep_csv(sweep, [(0.1, 1e-2, 3e-2)])
    assert sweep.read_text().splitlines()[0] == "eps,dist_f_rhoF_l2,dist_rho_rho0_l1"


def test_adaptive_controller_threshold_is_sharp():
    ctl = AdaptiveController(s_ref=1.5, max_levels=3)
    assert ctl.should_refine(3.0)
    assert not ctl.should_refine(3.0 - 1e-12)
    ctl.mark(3.25)
    assert ctl.s_ref == 3.25 and ctl.levels_used == 1
    assert not ctl.should_refine(6.0)
    assert ctl.should_refine(6.5)


def test_refine_kinetic_state_doubles_and_conserves_mass():
    grid = SpatialGrid1D.uniform(-1.0, 1.0, 50)
    vgrid = VelocityGrid1D.midpoint(1.0, 8)
    state = init_peaks(grid, ((1.0, 0.1, 40.0),), MASS, vgrid, 0.1)
    fine_state, fine_grid = refine_kinetic_state(state, grid)
    assert fine_grid.n_x == 100
    assert fine_grid.dx == pytest.approx(grid.dx / 2.0)
    assert fine_state.r_part.shape == (100, 8)
    coarse_mass = grid.dx * state.r_part.sum()
    fine_mass = fine_grid.dx * fine_state.r_part.sum()
    assert fine_mass == pytest.approx(coarse_mass, rel=1e-13)
    assert fine_state.time == state.time and fine_state.eps == state.eps


@pytest.mark.filterwarnings("ignore")
def test_runaway_transport_raises_poisoned_state():
    cfg = ExperimentConfig(model="nonlocal1d", mass=MASS, t_max=20.0, eps=1.0,
                           n_x=400, dt_policy=0.05, cfl_check=False,
                           transport="lw")
    with pytest.raises(PoisonedStateError) as info:
        run_scenario(cfg)
    assert info.value.step > 0 and "nonlocal1d" in info.value.stage


@pytest.mark.filterwarnings("ignore")
def test_refinement_cap_reports_blowup_suspected():
    cfg = ExperimentConfig(model="local1d", mass=5 * MASS, t_max=0.4, eps=0.4,
                           n_x=100, adaptive=True, max_levels=1,
                           dt_policy="eps-dx")
    with pytest.raises(RefinementCapError) as info:
        run_scenario(cfg)
    summary = info.value.summary
    assert summary.status == "blow-up-suspected"
    assert len(summary.refinements) == 1
    event = summary.refinements[0]
    assert (event.old_n_x, event.new_n_x) == (100, 200)
    assert 0.0 < event.time < summary.final_time <= 0.4


@pytest.mark.filterwarnings("ignore")
def test_refinement_cap_still_writes_outputs(tmp_path):
    out = tmp_path / "cap"
    cfg = ExperimentConfig(model="local1d", mass=5 * MASS, t_max=0.4, eps=0.4,
                           n_x=100, adaptive=True, max_levels=1,
                           dt_policy="eps-dx", out_dir=str(out))
    with pytest.raises(RefinementCapError):
        run_scenario(cfg)
    assert (out / "timeseries.csv").exists()


def test_stop_above_max_rho_ends_run_early():
    cfg = ExperimentConfig(model="ks1d", mass=4 * MASS, t_max=0.02, n_x=200,
                           stop_above_max_rho=50.0)
    summary = run_scenario(cfg)
    assert summary.status == "stopped-early"
    assert summary.records[-1].max_rho >= 50.0 or summary.final.rho.max() >= 50.0
    assert summary.final_time < 0.02


def test_zero_drift_limit_recovers_second_order_diffusion():
    """With chi = 0 the macro step is the explicit heat stencil; its grid
    refinement order on a smooth pulse must come out 2.0."""
    coeffs = KSCoefficients(diffusion=1.0 / 3.0, chi=0.0,
                            critical_mass=float("inf"))
    t_end = 0.01
    levels = []
    for n_x in (100, 200, 400):
        grid = SpatialGrid1D.uniform(-1.0, 1.0, n_x)
        rho0 = np.exp(-40.0 * grid.centers ** 2)
        dt = 0.2 * grid.dx ** 2 / coeffs.diffusion
        steps = int(round(t_end / dt))
        rho = rho0.copy()
        s = np.zeros(n_x)
        for _ in range(steps):
            rho = ks_step_1d(rho, grid, coeffs, t_end / steps, warn=False, s=s)
        levels.append((grid.dx, rho0, rho))
    rows = convergence_rows(levels)
    assert rows[-1].order == pytest.approx(2.0, abs=0.1)
