"""Run configuration: a dataclass mirrored by sectioned key-value files.

Files use INI syntax with the sections geometry, window, flow,
decomposition, schwarz, solver, and output.  Unknown sections or keys are
rejected by name; command-line flags override file values.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields as dc_fields

from .errors import ConfigError
from .schwarz import SchwarzConfig

__all__ = ["RunConfig", "load_run_config", "save_run_config"]

BACKENDS = ("cnn", "stream", "laplace")


@dataclass
class RunConfig:
    # geometry
    geometry_file: str | None = None
    preset: str = "random"  # random | straight
    seed: int = 0
    n_segment: int | None = None
    factor: int = 1
    scale_mode: str = "duplicate"
    # window
    height: int = 128
    # flow
    v_max: float = 0.3
    # decomposition
    width: int = 256
    xi: int = 10
    delta: int | None = None  # None -> 2*xi
    cover: str = "max"
    w_global: int | None = None  # None -> canonical window (laplace: 512)
    # schwarz
    epsilon: float = 1e-5
    max_iterations: int = 200
    init: str = "parabolic"
    stagnation_window: int = 5
    stagnation_threshold: float = 1e-3
    divergence_run: int = 5
    divergence_factor: float = 10.0
    # solver
    backend: str = "stream"
    weights: str | None = None
    constrained: bool = True
    # output
    out: str = "out"
    figures: bool = True
    snapshot_every: int = 0
    reference_vx: str | None = None
    reference_vy: str | None = None

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; "
                              f"expected one of {', '.join(BACKENDS)}")
        if self.preset not in ("random", "straight"):
            raise ConfigError(f"unknown geometry preset {self.preset!r}")
        if self.backend == "cnn" and not self.weights:
            raise ConfigError("backend cnn requires a weights file")

    def schwarz_config(self) -> SchwarzConfig:
        return SchwarzConfig(self.epsilon, self.max_iterations, self.init,
                             self.stagnation_window, self.stagnation_threshold,
                             self.divergence_run, self.divergence_factor)


_SECTIONS = {
    "geometry": ("geometry_file", "preset", "seed", "n_segment", "factor",
                 "scale_mode"),
    "window": ("height",),
    "flow": ("v_max",),
    "decomposition": ("width", "xi", "delta", "cover", "w_global"),
    "schwarz": ("epsilon", "max_iterations", "init", "stagnation_window",
                "stagnation_threshold", "divergence_run", "divergence_factor"),
    "solver": ("backend", "weights", "constrained"),
    "output": ("out", "figures", "snapshot_every", "reference_vx",
               "reference_vy"),
}

_TYPES = {f.name: f.type for f in dc_fields(RunConfig)}


def _parse_value(key: str, raw: str):
    t = _TYPES[key]
    raw = raw.strip()
    # 'none' clears optional fields only; elsewhere it may be a literal
    # value (e.g. init = none names the zero-field start)
    if "| None" in t and raw.lower() in ("none", ""):
        return None
    if t in ("int", "int | None"):
        return int(raw)
    if t == "float":
        return float(raw)
    if t == "bool":
        if raw.lower() in ("true", "yes", "1", "on"):
            return True
        if raw.lower() in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"key {key}: expected a boolean, got {raw!r}")
    return raw


def load_run_config(path: str) -> RunConfig:
    # interpolation off: '%' is legal in path-like values
    parser = configparser.ConfigParser(interpolation=None)
    try:
        if not parser.read(path):
            raise OSError(f"cannot read config file {path}")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser[section].items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                values[key] = _parse_value(key, raw)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"key {key}: {exc}") from exc
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def save_run_config(path: str, cfg: RunConfig) -> None:
    parser = configparser.ConfigParser(interpolation=None)
    for section, keys in _SECTIONS.items():
        parser[section] = {}
        for key in keys:
            value = getattr(cfg, key)
            if value is None:
                continue
            parser[section][key] = repr(value) if isinstance(value, float) \
                else str(value)
    with open(path, "w", encoding="ascii") as fh:
        parser.write(fh)
