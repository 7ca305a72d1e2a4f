"""Command line behavior: subcommands, overrides, exit codes, CSV output."""
import math

import pytest

from apchemo.cli import main
from apchemo.scenarios import scenario_names

MASS = math.pi


def write_cfg(tmp_path, name="run.cfg", **kw):
    base = dict(model="nonlocal1d", mass=MASS, t_max=0.002, eps=0.1, n_x=100)
    base.update(kw)
    path = tmp_path / name
    path.write_text("".join(f"{k} = {v}\n" for k, v in base.items()))
    return str(path)


def test_list_scenarios_prints_catalog(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in scenario_names():
        assert name in out


def test_run_config_file(tmp_path, capsys):
    assert main(["run", write_cfg(tmp_path)]) == 0
    assert "completed" in capsys.readouterr().out


def test_run_named_scenario_with_overrides(tmp_path, capsys):
    code = main(["run", "kinetic-bounded-4pi", "--set", "t_max=0.002",
                 "--set", "n_x=200", "--out", str(tmp_path / "o")])
    assert code == 0
    assert "completed" in capsys.readouterr().out
    assert (tmp_path / "o" / "timeseries.csv").exists()
    assert (tmp_path / "o" / "stationary_0.1.csv").exists()


def test_unknown_config_exits_2(capsys):
    assert main(["run", "no-such-scenario"]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_override_exits_2(tmp_path, capsys):
    assert main(["run", write_cfg(tmp_path), "--set", "n_x=abc"]) == 2
    assert main(["run", write_cfg(tmp_path), "--set", "n_x"]) == 2
    assert main(["run", write_cfg(tmp_path), "--set", "n_y=3"]) == 2


@pytest.mark.filterwarnings("ignore")
def test_numerical_abort_exits_3(tmp_path, capsys):
    path = write_cfg(tmp_path, model="nonlocal1d", eps=1.0, n_x=400,
                     t_max=20.0, dt_policy=0.05, cfl_check="false",
                     transport="lw")
    assert main(["run", path]) == 3
    assert "numerical abort" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore")
def test_refinement_cap_exits_4(tmp_path, capsys):
    path = write_cfg(tmp_path, model="local1d", mass=5 * MASS, eps=0.4,
                     n_x=100, t_max=0.4, adaptive="true", max_levels=1,
                     dt_policy="eps-dx")
    assert main(["run", path]) == 4
    assert "blow-up suspected" in capsys.readouterr().err


def test_converge_reports_orders_and_csv(tmp_path, capsys):
    path = write_cfg(tmp_path, model="ks1d", t_max=0.002)
    code = main(["converge", path, "--levels", "50,100,200",
                 "--out", str(tmp_path / "c")])
    assert code == 0
    out = capsys.readouterr().out
    assert "order =" in out and "fitted order =" in out
    lines = (tmp_path / "c" / "convergence.csv").read_text().splitlines()
    assert lines[0] == "dx,e1,order"
    assert len(lines) == 3  # two refinement pairs from three levels


def test_converge_rejects_non_doubling_levels(tmp_path, capsys):
    path = write_cfg(tmp_path, model="ks1d", t_max=0.002)
    assert main(["converge", path, "--levels", "50,75,100"]) == 2
    assert main(["converge", path, "--levels", "50,x"]) == 2


def test_eps_sweep_cli(tmp_path, capsys):
    path = write_cfg(tmp_path, n_x=100, t_max=0.002)
    code = main(["eps-sweep", path, "--eps", "0.1,0.05",
                 "--out", str(tmp_path / "e")])
    assert code == 0
    assert "fitted order in eps" in capsys.readouterr().out
    lines = (tmp_path / "e" / "eps_sweep.csv").read_text().splitlines()
    assert lines[0] == "eps,dist_f_rhoF_l2,dist_rho_rho0_l1"
    assert len(lines) == 3


def test_sweep_mass_cli(tmp_path, capsys):
    path = write_cfg(tmp_path, model="ks1d", t_max=0.001, n_x=100)
    code = main(["sweep-mass", path, "--masses", "3.14,6.28"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert sum(line.startswith("mass = ") for line in lines) == 2
