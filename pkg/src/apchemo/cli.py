"""Command line entry point.

Subcommands: run, converge, eps-sweep, sweep-mass, list-scenarios.  The
config argument is either a named scenario or the path of a key = value
file; `--set key=value` overrides single fields and `--out DIR` selects the
output directory.

Exit codes: 0 success, 2 configuration error, 3 numerical abort (non-finite
state), 4 refinement cap reached (blow-up suspected).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config, with_overrides
from .core import VelocityGrid1D
from .experiment import (PoisonedStateError, RefinementCapError, RunSummary,
                         run_scenario, write_convergence_csv,
                         write_eps_sweep_csv, write_ftilde_csv,
                         write_selfsim_csv, write_stationary_csv, format_label)
from .scenarios import describe, make_scenario, scenario_names
from .studies import (convergence_study, eps_convergence_study, fitted_order,
                      rescaled_density, self_similar_series, station_checks)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("config", help="scenario name or config file path")
    parser.add_argument("--out", help="output directory for CSV files")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config field")


def _parse_list(raw: str, kind, what: str):
    try:
        return [kind(item) for item in raw.split(",") if item.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {what} list {raw!r}") from None


def _resolve_config(args) -> ExperimentConfig:
    if args.config in scenario_names():
        cfg = make_scenario(args.config)
    elif Path(args.config).exists():
        cfg = load_config(args.config)
    else:
        raise ConfigError(f"{args.config!r} is neither a scenario name "
                          "nor an existing config file")
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        overrides[key.strip()] = raw.strip()
    if overrides:
        cfg = with_overrides(cfg, overrides)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _default_stations(snap, eps: float) -> list[float]:
    peak_x = float(snap.axis[np.argmax(snap.rho)])
    return [peak_x + eps * off for off in (0.0, 0.5, 1.0)]


def _write_study_outputs(cfg: ExperimentConfig, summary: RunSummary):
    """Extra CSV kinds derivable from a finished 1D run."""
    if cfg.out_dir is None:
        return
    if cfg.model in ("nonlocal1d", "local1d"):
        snap = summary.final
        y, values = rescaled_density(snap, cfg.eps)
        write_stationary_csv(cfg.out_dir, cfg.eps, y, values)
        vgrid = VelocityGrid1D.midpoint(cfg.v_max, cfg.n_half)
        seen = set()
        for check in station_checks(snap, vgrid, _default_stations(snap, cfg.eps)):
            if check.x in seen:
                continue
            seen.add(check.x)
            write_ftilde_csv(cfg.out_dir, check.x, check.v_nodes, check.ftilde)
    if cfg.model in ("nonlocal1d", "local1d", "ks1d") and len(summary.snapshots) >= 3:
        snaps = summary.snapshots
        series = self_similar_series([s.time for s in snaps],
                                     [s.rho for s in snaps], snaps[0].axis)
        write_selfsim_csv(Path(cfg.out_dir) / "selfsim.csv",
                          series.taus, series.l1_to_final)


def _cmd_run(args) -> int:
    cfg = _resolve_config(args)
    summary = run_scenario(cfg)
    _write_study_outputs(cfg, summary)
    last = summary.records[-1]
    print(f"{cfg.name or cfg.model}: {summary.status} at t = {last.t:g} "
          f"({summary.n_steps} steps, max rho = {last.max_rho:g}, "
          f"{len(summary.refinements)} refinements)")
    return 0


def _cmd_converge(args) -> int:
    cfg = _resolve_config(args)
    sizes = _parse_list(args.levels, int, "level")
    times = (_parse_list(args.times, float, "time") if args.times
             else [cfg.t_max])
    tables = convergence_study(cfg, sizes, times)
    for t in sorted(tables):
        rows = [(row.dx, row.error, row.order) for row in tables[t]]
        print(f"t = {t:g}")
        for dx, err, order in rows:
            order_s = "-" if order is None else f"{order:.3f}"
            print(f"  dx = {dx:.6g}  e1 = {err:.6g}  order = {order_s}")
        print(f"  fitted order = {fitted_order(tables[t]):.3f}")
        if cfg.out_dir is not None:
            name = ("convergence.csv" if len(tables) == 1
                    else f"convergence_{format_label(t)}.csv")
            write_convergence_csv(Path(cfg.out_dir) / name, rows)
    return 0


def _cmd_eps_sweep(args) -> int:
    cfg = _resolve_config(args)
    eps_list = _parse_list(args.eps, float, "eps")
    rows, fitted = eps_convergence_study(cfg, eps_list)
    for row in rows:
        print(f"eps = {row.eps:g}  |f - rho F|_2 = {row.dist_f_rhoF_l2:.6g}  "
              f"|rho - rho_0|_1 = {row.dist_rho_rho0_l1:.6g}")
    print(f"fitted order in eps: {fitted:.3f}")
    if cfg.out_dir is not None:
        write_eps_sweep_csv(
            Path(cfg.out_dir) / "eps_sweep.csv",
            [(r.eps, r.dist_f_rhoF_l2, r.dist_rho_rho0_l1) for r in rows])
    return 0


def _cmd_sweep_mass(args) -> int:
    cfg = _resolve_config(args)
    masses = _parse_list(args.masses, float, "mass")
    for mass in masses:
        sub_out = (str(Path(cfg.out_dir) / f"mass_{format_label(mass)}")
                   if cfg.out_dir is not None else None)
        run_cfg = replace(cfg, mass=mass, out_dir=sub_out)
        summary = run_scenario(run_cfg)
        last = summary.records[-1]
        print(f"mass = {mass:g}: {summary.status}, "
              f"max rho / mass = {last.max_rho / mass:.6g} at t = {last.t:g}")
    return 0


def _cmd_list(_args) -> int:
    for name in scenario_names():
        print(describe(name))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apchemo",
        description="Kinetic chemotaxis and drift-diffusion limit runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario or config file")
    _add_common(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_conv = sub.add_parser("converge", help="grid refinement study")
    _add_common(p_conv)
    p_conv.add_argument("--levels", required=True,
                        help="comma list of grid sizes, coarse to fine")
    p_conv.add_argument("--times", help="comma list of evaluation times "
                        "(default: t_max)")
    p_conv.set_defaults(fn=_cmd_converge)

    p_eps = sub.add_parser("eps-sweep", help="scaling-limit distance study")
    _add_common(p_eps)
    p_eps.add_argument("--eps", required=True, help="comma list of eps values")
    p_eps.set_defaults(fn=_cmd_eps_sweep)

    p_mass = sub.add_parser("sweep-mass", help="repeat a run across masses")
    _add_common(p_mass)
    p_mass.add_argument("--masses", required=True,
                        help="comma list of total masses")
    p_mass.set_defaults(fn=_cmd_sweep_mass)

    p_list = sub.add_parser("list-scenarios", help="print the named catalog")
    p_list.set_defaults(fn=_cmd_list)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PoisonedStateError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except RefinementCapError as exc:
        print(f"stopped: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
