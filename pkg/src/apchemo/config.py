"""Run configuration: the flat key = value format and its validation.

A config file is UTF-8 text, one `key = value` per line, `#` starts a
comment.  Keys mirror ExperimentConfig field names.  Peak lists are written
`peaks = weight:center:width, weight:center:width, ...` and profile times as
a comma list.  dt_policy accepts a policy name or an explicit positive
number.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

MODELS = ("nonlocal1d", "local1d", "local2d_radial", "ks1d", "ks2d_radial")
KINETIC_1D = ("nonlocal1d", "local1d")
DT_POLICIES = ("max", "dx2", "eps-dx-half", "eps-dx")


class ConfigError(ValueError):
    """Invalid configuration key, value, or combination."""


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    mass: float
    t_max: float
    name: str = ""
    eps: float = 0.1
    x_min: float = -1.0
    x_max: float = 1.0
    n_x: int = 400
    n_half: int = 32
    v_max: float = 1.0
    r_max: float = 2.0
    n_r: int = 250
    n_omega: int = 16
    n_theta: int = 16
    order: int = 2
    transport: str = "tvd"
    adaptive: bool = False
    max_levels: int = 4
    dt_policy: object = "max"
    cfl_check: bool = True
    peaks: tuple = ((1.0, 0.0, 80.0),)
    radial_width: float = 15.0
    record_every: int = 1
    profile_times: tuple = ()
    out_dir: str | None = None
    blowup_threshold: float | None = None
    stop_above_max_rho: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; "
                              f"choose one of {', '.join(MODELS)}")
        _require(self.mass > 0, "mass must be positive")
        _require(self.t_max > 0, "t_max must be positive")
        _require(self.eps > 0, "eps must be positive")
        _require(self.x_max > self.x_min, "x_max must exceed x_min")
        _require(self.n_x >= 4, "n_x must be at least 4")
        _require(self.n_half >= 1, "n_half must be at least 1")
        _require(self.v_max > 0, "v_max must be positive")
        _require(self.r_max > 0, "r_max must be positive")
        _require(self.n_r >= 4, "n_r must be at least 4")
        _require(self.n_omega >= 1, "n_omega must be at least 1")
        _require(self.n_theta >= 2 and self.n_theta % 2 == 0,
                 "n_theta must be even and at least 2")
        if self.order not in (1, 2):
            raise ConfigError("order must be 1 or 2")
        if self.model == "local2d_radial" and self.order != 1:
            raise ConfigError("the radial 2D scheme is first order; set order = 1")
        if self.transport not in ("tvd", "lw"):
            raise ConfigError("transport must be 'tvd' or 'lw'")
        if self.adaptive and self.model not in KINETIC_1D:
            raise ConfigError("adaptive refinement applies to 1D kinetic models only")
        if isinstance(self.dt_policy, (int, float)):
            _require(float(self.dt_policy) > 0, "explicit dt must be positive")
        elif self.dt_policy not in DT_POLICIES:
            raise ConfigError(f"unknown dt policy {self.dt_policy!r}; use a "
                              f"positive number or one of {', '.join(DT_POLICIES)}")
        _require(self.max_levels >= 0, "max_levels must be nonnegative")
        _require(self.record_every >= 1, "record_every must be at least 1")
        _require(self.radial_width > 0, "radial_width must be positive")
        if not self.peaks:
            raise ConfigError("at least one peak required")
        for peak in self.peaks:
            if len(peak) != 3:
                raise ConfigError("each peak needs weight:center:width")
            weight, _, width = peak
            _require(weight > 0, "peak weights must be positive")
            _require(width > 0, "peak widths must be positive")
        for t in self.profile_times:
            if not 0.0 <= t <= self.t_max:
                raise ConfigError(f"profile time {t} outside [0, t_max]")
        if self.blowup_threshold is not None:
            _require(self.blowup_threshold > 0, "blowup_threshold must be positive")
        if self.stop_above_max_rho is not None:
            _require(self.stop_above_max_rho > 0,
                     "stop_above_max_rho must be positive")


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


_FLOAT_KEYS = {"mass", "t_max", "eps", "x_min", "x_max", "v_max", "r_max",
               "radial_width", "blowup_threshold", "stop_above_max_rho"}
_INT_KEYS = {"n_x", "n_half", "n_r", "n_omega", "n_theta", "order",
             "max_levels", "record_every"}
_BOOL_KEYS = {"adaptive", "cfl_check"}
_STR_KEYS = {"model", "name", "transport", "out_dir"}


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_peaks(raw: str) -> tuple:
    peaks = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(f"peaks: expected weight:center:width, got {item!r}")
        peaks.append(tuple(_parse_float(p, "peaks") for p in parts))
    if not peaks:
        raise ConfigError("peaks: empty list")
    return tuple(peaks)


def _parse_times(raw: str) -> tuple:
    items = [item.strip() for item in raw.split(",")]
    return tuple(_parse_float(item, "profile_times") for item in items if item)


def coerce_value(key: str, raw: str):
    """Convert one raw string value to the typed field value."""
    raw = raw.strip()
    if key in _FLOAT_KEYS:
        return _parse_float(raw, key)
    if key in _INT_KEYS:
        return _parse_int(raw, key)
    if key in _BOOL_KEYS:
        return _parse_bool(raw, key)
    if key in _STR_KEYS:
        return raw
    if key == "dt_policy":
        try:
            return float(raw)
        except ValueError:
            return raw
    if key == "peaks":
        return _parse_peaks(raw)
    if key == "profile_times":
        return _parse_times(raw)
    raise ConfigError(f"unknown config key {key!r}")


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines into a raw string mapping."""
    mapping: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = stripped.split("=", 1)
        mapping[key.strip()] = raw.strip()
    return mapping


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    kwargs = {}
    for key, raw in mapping.items():
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[key] = coerce_value(key, raw) if isinstance(raw, str) else raw
    missing = [k for k in ("model", "mass", "t_max") if k not in kwargs]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_mapping(parse_config_text(text))


def with_overrides(cfg: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Rebuild a config with string overrides applied (CLI `--set key=value`)."""
    current = {f.name: getattr(cfg, f.name) for f in fields(ExperimentConfig)}
    for key, raw in overrides.items():
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown config key {key!r}")
        current[key] = coerce_value(key, raw) if isinstance(raw, str) else raw
    return ExperimentConfig(**current)


__all__ = [
    "MODELS", "KINETIC_1D", "DT_POLICIES", "ConfigError", "ExperimentConfig",
    "coerce_value", "parse_config_text", "config_from_mapping",
    "load_config", "with_overrides",
]
