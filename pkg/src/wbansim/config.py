"""Experiment configuration: schema, strict validation, defaults, hashing.

Config files are JSON with one nested section per concern.  Validation is
strict: unknown fields are rejected with their path, type mismatches and
cross-field violations are reported together.  Paper-stated constants keep
their stated defaults (K = 10 sensors, 5 m box, -10 dBm transmit power);
everything else is an artifact default and freely overridable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    """Config file failed schema or cross-field validation."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass
class ScenarioConfig:
    n_wbans: int = 3
    k_sensors: int = 10
    box_size: float = 5.0
    body_radius: float = 0.8
    mobility_step_scale: float = 1.0  # mobility dt = scale * beacon interval


@dataclass
class ChannelConfig:
    path_loss_exponent: float = 3.38
    reference_loss_db: float = 45.0
    noise_floor_dbm: float = -95.0
    shadowing_sigma_db: float = 0.0


@dataclass
class TimingConfig:
    bi: float = 0.1
    ts: float = 0.005
    t_fr: float = 1.152e-3
    t_b: float = 0.6e-3
    sifs: float = 0.192e-3
    nfrs: int = 3
    p_frames: int = 3


@dataclass
class ProtocolConfig:
    theta_db: float = 10.0
    n_channels: int = 16
    switch_cost_factor: float = 2.0
    retry_energy_factor: float = 3.0
    # interference lists ride a compact control payload (2 bytes at 250 kb/s)
    ctrl_airtime: float = 6.4e-5
    # rounds a conflict-free sensor holds its channel before rejoining default
    channel_hold_rounds: int = 24
    # channel renegotiation cadence in superframes (code patterns update
    # every superframe; channel negotiation is heavier and runs less often)
    sms_update_period: int = 4
    # orthogonal channels are separated by radio filtering, not algebra:
    # cross-channel interference survives at this attenuation
    channel_isolation_db: float = 30.0
    capture_threshold_db: float = 10.0
    drift_ppm: float = 20.0


@dataclass
class RunConfig:
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3])
    horizon_superframes: int = 500
    resample_offsets: bool = True
    align_superframes: bool = False
    # beacon gating: sensors transmit only after their own beacon survived;
    # turning it off forces traffic for controlled slot-collision fixtures
    beacon_gating: bool = True
    sweep_axis: str = "n_wbans"
    sweep_values: list[float] = field(default_factory=lambda: [2, 4, 6, 8])


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    timing: TimingConfig = field(default_factory=TimingConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    run: RunConfig = field(default_factory=RunConfig)
    out_dir: str = "out"

    def validate(self) -> None:
        problems = cross_field_problems(self)
        if problems:
            raise ConfigError(problems)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


_SECTIONS = {
    "scenario": ScenarioConfig,
    "channel": ChannelConfig,
    "timing": TimingConfig,
    "protocol": ProtocolConfig,
    "run": RunConfig,
}


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def cross_field_problems(cfg: ExperimentConfig) -> list[str]:
    problems = []
    s, t, p, r = cfg.scenario, cfg.timing, cfg.protocol, cfg.run
    if s.n_wbans < 1:
        problems.append("scenario.n_wbans must be >= 1")
    if s.k_sensors < 1:
        problems.append("scenario.k_sensors must be >= 1")
    if s.box_size <= 2 * s.body_radius:
        problems.append("scenario.box_size must exceed twice the body radius")
    for name in ("bi", "ts", "t_fr", "t_b", "sifs"):
        if getattr(t, name) <= 0:
            problems.append(f"timing.{name} must be > 0")
            return problems
    if s.k_sensors * t.ts > t.bi / 2:
        problems.append(
            f"active period K*TS = {s.k_sensors * t.ts:.6g} s exceeds half the "
            f"beacon interval {t.bi / 2:.6g} s"
        )
    if t.t_fr + t.sifs > t.ts:
        problems.append("timing: one frame plus SIFS must fit in a slot")
    if t.nfrs < 1 or t.p_frames < 1:
        problems.append("timing.nfrs and timing.p_frames must be >= 1")
    if p.n_channels < 1:
        problems.append("protocol.n_channels must be >= 1")
    if p.switch_cost_factor < 0 or p.retry_energy_factor < 0:
        problems.append("protocol cost factors must be >= 0")
    if p.ctrl_airtime <= 0:
        problems.append("protocol.ctrl_airtime must be > 0")
    if p.channel_hold_rounds < 0:
        problems.append("protocol.channel_hold_rounds must be >= 0")
    if p.sms_update_period < 1:
        problems.append("protocol.sms_update_period must be >= 1")
    if p.channel_isolation_db < 0:
        problems.append("protocol.channel_isolation_db must be >= 0")
    if not r.seeds:
        problems.append("run.seeds must not be empty")
    if r.horizon_superframes < 1:
        problems.append("run.horizon_superframes must be >= 1")
    if r.sweep_axis not in ("n_wbans", "theta", "time"):
        problems.append("run.sweep_axis must be one of n_wbans, theta, time")
    return problems


def _coerce_section(cls, data: dict, path: str, problems: list[str]):
    known = {f.name: f.type for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            problems.append(f"{path}.{key}: unknown field")
            continue
        kwargs[key] = value
    try:
        obj = cls(**kwargs)
    except TypeError as exc:
        problems.append(f"{path}: {exc}")
        return cls()
    for f in fields(cls):
        value = getattr(obj, f.name)
        expected: tuple[type, ...]
        if f.name in ("seeds", "sweep_values"):
            if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
            ):
                problems.append(f"{path}.{f.name}: expected a list of numbers")
            continue
        default = getattr(cls(), f.name)
        if isinstance(default, bool):
            expected = (bool,)
        elif isinstance(default, int):
            expected = (int,)
        elif isinstance(default, float):
            expected = (int, float)
        else:
            expected = (str,)
        if not isinstance(value, expected) or (
            expected == (int,) and isinstance(value, bool)
        ):
            problems.append(
                f"{path}.{f.name}: expected {expected[0].__name__}, "
                f"got {type(value).__name__}"
            )
    return obj


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build and validate a config from parsed JSON; strict about unknowns."""
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["top level must be an object"])
    sections = {}
    for key, value in data.items():
        if key == "out_dir":
            if not isinstance(value, str):
                problems.append("out_dir: expected string")
            continue
        if key not in _SECTIONS:
            problems.append(f"{key}: unknown section")
            continue
        if not isinstance(value, dict):
            problems.append(f"{key}: expected an object")
            continue
        sections[key] = _coerce_section(_SECTIONS[key], value, key, problems)
    out_dir = data.get("out_dir", "out")
    cfg = ExperimentConfig(
        **sections, out_dir=out_dir if isinstance(out_dir, str) else "out"
    )
    if problems:
        raise ConfigError(problems)
    problems = cross_field_problems(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"]) from exc
    return config_from_dict(data)


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
