"""Named run catalog: the shipped experiment setups at desk scale.

Each entry builds a fresh ExperimentConfig. Masses are multiples of pi
because the drift-diffusion limit concentrates or spreads depending on the
mass relative to 2*pi (slab) or 16 (radial); the catalog brackets those
thresholds.
"""
from __future__ import annotations

import math

from .config import ConfigError, ExperimentConfig

_PI = math.pi

_TWO_PEAKS = ((0.5, 0.3, 80.0), (0.5, -0.3, 80.0))
_TWO_PEAKS_ASYM = ((2.2, 0.3, 80.0), (2.8, -0.3, 80.0))
_FIVE_PEAKS = ((0.5, 0.4, 160.0), (1.2, -0.2, 160.0), (0.8, -0.6, 160.0),
               (0.6, 0.0, 160.0), (1.0, 0.2, 160.0))


def _catalog() -> dict:
    entries = {
        # two peaks, each below the slab threshold; they merge, then the
        # merged peak concentrates
        "two-peaks-sym-3pi": dict(
            model="nonlocal1d", mass=3.0 * _PI, eps=0.1, n_x=400,
            t_max=1.2, dt_policy="eps-dx-half", record_every=10,
            peaks=_TWO_PEAKS),
        # two peaks, each already above threshold; metastable twin spikes,
        # then a slow merge into one
        "two-peaks-sym-5pi": dict(
            model="nonlocal1d", mass=5.0 * _PI, eps=0.05, n_x=400,
            t_max=1.2, dt_policy="eps-dx-half", record_every=10,
            peaks=_TWO_PEAKS),
        "two-peaks-asym-5pi": dict(
            model="nonlocal1d", mass=5.0 * _PI, eps=0.05, n_x=400,
            t_max=1.2, dt_policy="eps-dx-half", record_every=10,
            peaks=_TWO_PEAKS_ASYM),
        "five-peaks-11pi": dict(
            model="nonlocal1d", mass=11.0 * _PI, eps=0.05, n_x=400,
            t_max=1.2, dt_policy="eps-dx-half", record_every=10,
            peaks=_FIVE_PEAKS),
        # drift-diffusion reference run that concentrates in finite time
        "ks-blowup-4pi": dict(
            model="ks1d", mass=4.0 * _PI, n_x=500, t_max=0.006,
            blowup_threshold=2000.0, stop_above_max_rho=2500.0),
        # kinetic counterpart that stays bounded at the same mass
        "kinetic-bounded-4pi": dict(
            model="nonlocal1d", mass=4.0 * _PI, eps=0.1, n_x=1000,
            t_max=0.1, dt_policy="max", record_every=10),
        # supercritical local model; refinement events bracket the blow-up
        "local-blowup-5pi-adaptive": dict(
            model="local1d", mass=5.0 * _PI, eps=0.4, n_x=500,
            t_max=0.4, dt_policy="eps-dx", adaptive=True, max_levels=4),
        "local-blowup-5pi": dict(
            model="local1d", mass=5.0 * _PI, eps=0.4, n_x=500,
            t_max=0.22, dt_policy="eps-dx"),
        # subcritical spreading run in similarity variables
        "selfsim-subcritical-pi": dict(
            model="local1d", mass=_PI, eps=0.2, x_min=-10.0, x_max=10.0,
            n_x=1000, t_max=10.0, dt_policy="max", record_every=20),
    }
    # radial runs across the bounded/concentrating mass range
    for mass in (1, 9, 17, 29, 33):
        entries[f"radial-mass-{mass}"] = dict(
            model="local2d_radial", mass=float(mass), eps=1.0, order=1,
            r_max=2.0, n_r=250, n_omega=16, n_theta=16, t_max=2.0,
            record_every=10)
    return entries


_ENTRIES = _catalog()


def scenario_names() -> list[str]:
    return sorted(_ENTRIES)


def make_scenario(name: str) -> ExperimentConfig:
    try:
        kwargs = dict(_ENTRIES[name])
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; "
                          "see `apchemo list-scenarios`") from None
    return ExperimentConfig(name=name, **kwargs)


def describe(name: str) -> str:
    cfg = make_scenario(name)
    bits = [cfg.model, f"mass={cfg.mass:g}", f"t_max={cfg.t_max:g}"]
    if cfg.model in ("nonlocal1d", "local1d", "local2d_radial"):
        bits.append(f"eps={cfg.eps:g}")
    if cfg.adaptive:
        bits.append("adaptive")
    return f"{name}: " + ", ".join(bits)


__all__ = ["scenario_names", "make_scenario", "describe"]
