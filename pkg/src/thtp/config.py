"""Run configuration: defaults, ``key = value`` config files, overrides."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, fields
from pathlib import Path

from .agent import BEST_OBSERVED, BEST_POLICIES
from .geometry import density_from_neighbours
from .mobility import kmh_to_mps
from .spreading import INHIBIT_CARRIED, INHIBITION_POLICIES, INHIBITION_SCOPES, SCOPE_BRANCH

ROUTING_CHOICES = ("none", "inverted", "hybrid")
REPORT_CHOICES = ("localization", "periodic")
ATTENUATION_CHOICES = ("linear",)


class ConfigError(ValueError):
    """Invalid configuration. ``key`` names the offending setting."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.key = key
        self.line = line


class ConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int = 300
    d_trx: float = 100.0  # m
    d_dtx: float = 25.0  # m
    target_speed: float = 6.0  # km/h
    propagation_period: float = 1.0  # s between hops of spreads and agents
    density: float = density_from_neighbours(10)  # nodes / m^2
    max_intensity: float = 300.0
    spreading_penalty: float = 1.0
    decay_rate: float = 1.0  # intensity units / s
    attenuation: str = "linear"
    inhibition: str = INHIBIT_CARRIED
    inhibition_scope: str = SCOPE_BRANCH
    agents: int = 1
    best_estimation: str = BEST_OBSERVED
    # local maxima at or above max_intensity - fresh_window are never marked
    # bad; negative means propagation_period * decay_rate
    fresh_window: float = -1.0
    visited_mark_lifetime: float = 60.0  # s
    bad_mark_lifetime: float = 300.0  # s
    routing: str = "none"
    report: str = "localization"
    report_period: float = 30.0  # s, when report = periodic
    sink_speed: float = 0.0  # km/h; 0 parks the sink
    sink_dwell: float = 60.0  # s between detection refreshes of a parked sink
    ttl: int = 0  # result-message hop limit; 0 = 10 x hop-diameter estimate
    clock_skew: float = 0.0  # max per-node clock offset, s
    t_end: float = 1200.0  # s
    seed: int = 0

    def __post_init__(self):
        validate(self)

    @property
    def target_speed_mps(self) -> float:
        return kmh_to_mps(self.target_speed)

    @property
    def sink_speed_mps(self) -> float:
        return kmh_to_mps(self.sink_speed)

    @property
    def side(self) -> float:
        return math.sqrt(self.n / self.density)

    @property
    def fresh_threshold(self) -> float:
        window = self.fresh_window
        if window < 0:
            window = self.propagation_period * self.decay_rate
        return self.max_intensity - window

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_POSITIVE = (
    "n", "d_trx", "d_dtx", "target_speed", "propagation_period", "density",
    "max_intensity", "decay_rate", "agents", "visited_mark_lifetime",
    "bad_mark_lifetime", "report_period", "sink_dwell",
)
_NONNEGATIVE = ("spreading_penalty", "sink_speed", "ttl", "clock_skew", "t_end", "seed")
_CHOICES = {
    "attenuation": ATTENUATION_CHOICES,
    "inhibition": INHIBITION_POLICIES,
    "inhibition_scope": INHIBITION_SCOPES,
    "best_estimation": BEST_POLICIES,
    "routing": ROUTING_CHOICES,
    "report": REPORT_CHOICES,
}


def validate(cfg: SimConfig) -> None:
    for key in _POSITIVE:
        v = getattr(cfg, key)
        if not (v > 0) or not math.isfinite(v):
            raise ConfigError(f"{key} must be positive, got {v!r}", key)
    for key in _NONNEGATIVE:
        v = getattr(cfg, key)
        if not (v >= 0) or not math.isfinite(v):
            raise ConfigError(f"{key} must be nonnegative, got {v!r}", key)
    for key, choices in _CHOICES.items():
        v = getattr(cfg, key)
        if v not in choices:
            raise ConfigError(f"{key} must be one of {', '.join(choices)}; got {v!r}", key)
    if cfg.d_trx / cfg.target_speed_mps <= cfg.propagation_period:
        warnings.warn(
            f"target crosses a radio hop ({cfg.d_trx} m) in "
            f"{cfg.d_trx / cfg.target_speed_mps:.3g} s, not longer than the "
            f"propagation period {cfg.propagation_period} s",
            ConfigWarning,
            stacklevel=3,
        )


def _format(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


_TYPES = {f.name: f.type for f in fields(SimConfig)}


def _coerce(key: str, raw, line: int | None = None):
    if key not in _TYPES:
        raise ConfigError(f"unknown key {key!r}", key, line)
    typ = _TYPES[key]
    if not isinstance(raw, str):
        raw = str(raw)
    raw = raw.strip()
    try:
        if typ == "int":
            f = float(raw)
            if f != int(f):
                raise ValueError
            return int(f)
        if typ == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key} expects {typ}, got {raw!r}", key, line) from None
    return raw


def read_config_file(path) -> dict:
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        values[key] = _coerce(key, raw, lineno)
    return values


def parse_config(path=None, overrides: dict | None = None) -> SimConfig:
    """Defaults, then the file at ``path`` (if any), then ``overrides``."""
    values = read_config_file(path) if path is not None else {}
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        values[key] = _coerce(key, raw)
    return SimConfig(**values)
