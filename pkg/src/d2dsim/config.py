"""Simulation configuration and its key=value file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

SUBFRAME_S = 1e-3


class ConfigError(ValueError):
    pass


def _matrix(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(v) for v in row.split(",")) for row in text.split(";") if row.strip())


def _steps(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        dist, rate = item.split(":")
        out.append((float(dist), float(rate)))
    return tuple(out)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _fmt_matrix(m) -> str:
    return ";".join(",".join(repr(float(v)) for v in row) for row in m)


def _fmt_steps(s) -> str:
    return ",".join(f"{d!r}:{r!r}" for d, r in s)


@dataclass
class SimConfig:
    n_users: int = 20
    n_intervals: int = 50
    rb_per_subframe: int = 100
    subframes_per_frame: int = 10
    frames_per_interval: int = 200
    overlay_rb_pool: int = 20

    alpha: float = 0.0
    gamma: float = 1e-6

    # J per RB for LTE modes 0-2, J per bit for WiFi (mode 3)
    p_tx_0: float = 5e-6
    p_rx_0: float = 2e-6
    p_tx_1: float = 3e-6
    p_rx_1: float = 2e-6
    p_tx_2: float = 3e-6
    p_rx_2: float = 2e-6
    p_tx_3: float = 1e-8
    p_rx_3: float = 1e-8
    beta_wifi: float = 0.6

    # rows: current class (dormant, cellular); columns: next (dormant, cellular, seeking D2D)
    transition_matrix: tuple = ((0.7, 0.15, 0.15), (0.15, 0.7, 0.15))
    pair_break_prob: float = 0.05
    initial_states: tuple = ()

    cell_radius: float = 250.0
    d2d_range: float = 50.0
    speed: float = 1.0
    topology_file: str = ""

    path_loss_exponent: float = 3.5
    shadowing_sigma_db: float = 0.0
    noise_power: float = 1e-10
    user_tx_power: float = 0.2
    enb_tx_power: float = 20.0
    wifi_rate_steps: tuple = ((10.0, 54e6), (30.0, 24e6), (50.0, 6e6))

    pf_ewma: float = 0.01
    pf_floor: float = 1.0
    exact_max_pairs: int = 24

    seed: int = 1

    @property
    def subframes_per_interval(self) -> int:
        return self.frames_per_interval * self.subframes_per_frame

    @property
    def interval_duration_T(self) -> float:
        return self.subframes_per_interval * SUBFRAME_S

    def p_tx(self, mode: int) -> float:
        return getattr(self, f"p_tx_{int(mode)}")

    def p_rx(self, mode: int) -> float:
        return getattr(self, f"p_rx_{int(mode)}")

    def validate(self) -> None:
        if self.n_users < 0:
            raise ConfigError("n_users must be >= 0")
        if self.n_intervals < 0:
            raise ConfigError("n_intervals must be >= 0")
        for name in ("rb_per_subframe", "subframes_per_frame", "frames_per_interval"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.overlay_rb_pool < self.rb_per_subframe:
            raise ConfigError(
                f"overlay_rb_pool must lie strictly between 0 and rb_per_subframe "
                f"({self.overlay_rb_pool} vs {self.rb_per_subframe})"
            )
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if not self.gamma > 0:
            raise ConfigError("gamma must be > 0")
        for mode in range(4):
            if self.p_tx(mode) < 0 or self.p_rx(mode) < 0:
                raise ConfigError(f"energy parameters of mode {mode} must be >= 0")
        if self.beta_wifi < 0:
            raise ConfigError("beta_wifi must be >= 0")
        if len(self.transition_matrix) != 2 or any(len(r) != 3 for r in self.transition_matrix):
            raise ConfigError("transition_matrix needs 2 rows of 3 probabilities")
        for row in self.transition_matrix:
            if any(not 0 <= p <= 1 for p in row) or abs(sum(row) - 1) > 1e-9:
                raise ConfigError(f"transition_matrix row {row} is not a distribution")
        if not 0 <= self.pair_break_prob <= 1:
            raise ConfigError("pair_break_prob must be in [0, 1]")
        if self.initial_states and len(self.initial_states) != self.n_users:
            raise ConfigError("initial_states must list one state per user")
        if self.cell_radius <= 0 or self.d2d_range < 0 or self.speed < 0:
            raise ConfigError("cell_radius must be > 0, d2d_range and speed >= 0")
        if self.noise_power <= 0 or self.user_tx_power < 0 or self.enb_tx_power < 0:
            raise ConfigError("noise_power must be > 0 and transmit powers >= 0")
        if self.shadowing_sigma_db < 0:
            raise ConfigError("shadowing_sigma_db must be >= 0")
        if not 0 < self.pf_ewma <= 1 or self.pf_floor <= 0:
            raise ConfigError("pf_ewma must be in (0, 1] and pf_floor > 0")

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


_PARSERS = {
    "transition_matrix": _matrix,
    "wifi_rate_steps": _steps,
    "initial_states": _ints,
}
_FORMATTERS = {
    "transition_matrix": _fmt_matrix,
    "wifi_rate_steps": _fmt_steps,
    "initial_states": lambda v: ",".join(str(x) for x in v),
}


def parse_value(key: str, text: str):
    fields = {f.name: f for f in dataclasses.fields(SimConfig)}
    if key not in fields:
        raise ConfigError(f"unknown config key {key!r}")
    text = text.strip()
    try:
        if key in _PARSERS:
            return _PARSERS[key](text)
        kind = type(fields[key].default)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None


def parse_config(text: str, source: str = "<string>") -> SimConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = parse_value(key.strip(), value)
    cfg = SimConfig(**values)
    cfg.validate()
    return cfg


def load_config(path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    cfg = parse_config(text, str(path))
    if cfg.topology_file and not Path(cfg.topology_file).is_absolute():
        cfg.topology_file = str(path.parent / cfg.topology_file)
    if cfg.topology_file and not Path(cfg.topology_file).is_file():
        raise ConfigError(f"cannot read topology file {cfg.topology_file}")
    return cfg


def dump_config(cfg: SimConfig) -> str:
    """Fully resolved key=value text; parsing it back yields an equal config."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if f.name in _FORMATTERS:
            text = _FORMATTERS[f.name](value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
