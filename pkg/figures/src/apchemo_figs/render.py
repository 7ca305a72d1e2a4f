"""Six figure kinds over the solver CSV schemas.

Every renderer validates and loads all of its inputs before the first draw
call, so a schema failure never leaves a partial output file. Nothing here
computes new quantities; the files carry exactly what gets plotted.
"""
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend pinned first)

from .csv_io import SchemaError, read_table  # noqa: E402

KINDS = ("convergence", "timeseries", "profiles", "stationary", "selfsim",
         "mass-sweep")

# directory expansion patterns per kind, tried in order
_DIR_GLOBS = {
    "convergence": ("convergence*.csv",),
    "timeseries": ("timeseries.csv", "*/timeseries.csv"),
    "profiles": ("profile_*.csv",),
    "stationary": ("stationary_*.csv", "ftilde_*.csv"),
    "selfsim": ("selfsim.csv", "*/selfsim.csv"),
    "mass-sweep": ("mass_*/timeseries.csv",),
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    out_path: Path
    labels: tuple = field(default_factory=tuple)
    log_y: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"use one of {', '.join(KINDS)}")
        if not self.inputs:
            raise SchemaError("no input CSV files given")


def _numeric_suffix(path: Path) -> float:
    tail = path.parent.name if path.name == "timeseries.csv" else path.stem
    digits = tail.rsplit("_", 1)[-1]
    try:
        return float(digits)
    except ValueError:
        return float("inf")


def expand_inputs(kind: str, paths) -> tuple:
    """Resolve directories into the CSV files the kind expects."""
    out = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found = []
            for pattern in _DIR_GLOBS[kind]:
                found.extend(sorted(path.glob(pattern),
                                    key=lambda p: (_numeric_suffix(p), str(p))))
                if found and pattern in ("timeseries.csv", "selfsim.csv"):
                    break
            if not found:
                raise SchemaError(f"{path}: no {kind} CSV files found "
                                  f"(looked for {', '.join(_DIR_GLOBS[kind])})")
            out.extend(found)
        else:
            out.append(path)
    return tuple(out)


def _label_for(kind: str, path: Path, given, index: int) -> str:
    if index < len(given):
        return given[index]
    if path.name == "timeseries.csv":
        return path.parent.name
    stem = path.stem
    for prefix in ("profile_", "stationary_", "ftilde_", "convergence_"):
        if stem.startswith(prefix):
            return stem[len(prefix):]
    return stem


def _draw_convergence(ax, tables, labels, log_y):
    for cols, label in zip(tables, labels):
        ax.loglog(cols["dx"], cols["e1"], "o-", label=label)
    dx0 = tables[0]["dx"]
    e0 = tables[0]["e1"]
    anchor = int(dx0.argmax())
    for slope, style in ((1, ":"), (2, "--")):
        guide = 0.6 * e0[anchor] * (dx0 / dx0[anchor]) ** slope
        ax.loglog(dx0, guide, style, color="gray", label=f"slope {slope}")
    ax.set_xlabel("dx")
    ax.set_ylabel("relative l1 error")
    ax.legend()


def _draw_series(ax, tables, labels, log_y):
    for cols, label in zip(tables, labels):
        ax.plot(cols["t"], cols["max_rho"], label=label)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("max rho")
    if len(tables) > 1:
        ax.legend()


def _draw_profiles(ax, tables, labels, log_y):
    axis_name = "x"
    for cols, label in zip(tables, labels):
        axis_name = "r" if "r" in cols else "x"
        ax.plot(cols[axis_name], cols["rho"], label=f"t = {label}")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(axis_name)
    ax.set_ylabel("rho")
    ax.legend()


def _draw_selfsim(ax, tables, labels, log_y):
    for cols, label in zip(tables, labels):
        tau = cols["tau"]
        dist = cols["l1_to_final"]
        if log_y:
            keep = dist > 0
            tau, dist = tau[keep], dist[keep]
        ax.plot(tau, dist, "o-", label=label)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("tau")
    ax.set_ylabel("l1 distance to final profile")
    if len(tables) > 1:
        ax.legend()


def render_figure(spec: FigureSpec):
    """Build the matplotlib figure for a validated spec (nothing saved)."""
    labels = [_label_for(spec.kind, p, spec.labels, i)
              for i, p in enumerate(spec.inputs)]

    if spec.kind == "stationary":
        overlay = [(p, l) for p, l in zip(spec.inputs, labels)
                   if not p.name.startswith("ftilde_")]
        velocity = [(p, l) for p, l in zip(spec.inputs, labels)
                    if p.name.startswith("ftilde_")]
        over_tabs = [read_table(p, "stationary") for p, _ in overlay]
        vel_tabs = [read_table(p, "ftilde") for p, _ in velocity]
        n_panels = (1 if over_tabs else 0) + (1 if vel_tabs else 0)
        if n_panels == 0:
            raise SchemaError("stationary kind needs stationary_*.csv or "
                              "ftilde_*.csv inputs")
        fig, axes = plt.subplots(1, n_panels, figsize=(5.0 * n_panels, 3.8))
        axes = [axes] if n_panels == 1 else list(axes)
        if over_tabs:
            ax = axes.pop(0)
            for cols, (_, label) in zip(over_tabs, overlay):
                ax.plot(cols["x_rescaled"], cols["eps_rho_eps"],
                        label=f"eps = {label}")
            ax.set_xlabel("eps x")
            ax.set_ylabel("eps rho")
            ax.legend()
        if vel_tabs:
            ax = axes.pop(0)
            for cols, (_, label) in zip(vel_tabs, velocity):
                ax.plot(cols["v"], cols["ftilde"], "o-", label=f"x = {label}")
            ax.set_xlabel("v")
            ax.set_ylabel("f / rho")
            ax.legend()
        fig.tight_layout()
        return fig

    schema = {"convergence": "convergence", "timeseries": "timeseries",
              "profiles": "profile", "selfsim": "selfsim",
              "mass-sweep": "timeseries"}[spec.kind]
    tables = [read_table(p, schema) for p in spec.inputs]
    draw = {"convergence": _draw_convergence, "timeseries": _draw_series,
            "profiles": _draw_profiles, "selfsim": _draw_selfsim,
            "mass-sweep": _draw_series}[spec.kind]
    fig, ax = plt.subplots(figsize=(5.6, 3.8))
    draw(ax, tables, labels, spec.log_y)
    fig.tight_layout()
    return fig


def render_to_file(spec: FigureSpec) -> Path:
    fig = render_figure(spec)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out


__all__ = ["KINDS", "FigureSpec", "expand_inputs", "render_figure",
           "render_to_file"]
