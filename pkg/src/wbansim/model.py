"""Physical scenario model: networks, sensors, channel, received power, SINR.

Positions are metres in a bounded box (default 5 x 5 x 5 m).  Propagation is
log-distance path loss; every sensor transmits at the same -10 dBm.  Bodies
move as rigid units so on-body geometry survives mobility.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .codes import Code

TX_POWER_DBM = -10.0
MIN_DISTANCE_M = 0.01  # degenerate-geometry clamp
DEFAULT_BOX_M = 5.0
SPEED_RANGE_MS = (0.1, 1.0)


@dataclass
class Sensor:
    wban_id: int
    sensor_id: int
    position: np.ndarray  # (3,) metres
    tx_power_dbm: float = TX_POWER_DBM
    assigned_slot: int = 0
    code_schedule: dict[int, Code | None] = field(default_factory=dict)

    @property
    def key(self) -> tuple[int, int]:
        return (self.wban_id, self.sensor_id)

    def active_code(self) -> Code | None:
        return self.code_schedule.get(self.assigned_slot)


@dataclass
class Wban:
    id: int
    coordinator_position: np.ndarray
    sensors: list[Sensor]
    superframe_offset: float = 0.0
    beacon_interval: float = 0.1
    slot_length: float = 0.005
    code: Code | None = None

    @property
    def k_sensors(self) -> int:
        return len(self.sensors)


@dataclass(frozen=True)
class ChannelModel:
    """Log-distance path loss with optional log-normal shadowing."""

    path_loss_exponent: float = 3.38
    reference_loss_db: float = 45.0
    noise_floor_dbm: float = -95.0
    shadowing_sigma_db: float = 0.0

    def __post_init__(self):
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be > 0")
        if self.noise_floor_dbm >= 0:
            raise ValueError("noise_floor_dbm must be < 0")


@dataclass
class MobilityState:
    """Per-network waypoint targets and speeds for random-waypoint motion."""

    targets: np.ndarray  # (N, 3) coordinator destinations
    speeds: np.ndarray  # (N,) m/s


@dataclass
class NetworkState:
    wbans: list[Wban]
    box_size: float = DEFAULT_BOX_M
    mobility: MobilityState | None = None

    @property
    def n_wbans(self) -> int:
        return len(self.wbans)

    def wban_by_id(self, wban_id: int) -> Wban:
        for w in self.wbans:
            if w.id == wban_id:
                return w
        raise KeyError(f"no WBAN with id {wban_id}")

    def all_sensors(self) -> list[Sensor]:
        return [s for w in self.wbans for s in w.sensors]

    def sensor_by_key(self, key: tuple[int, int]) -> Sensor:
        for s in self.wban_by_id(key[0]).sensors:
            if s.sensor_id == key[1]:
                return s
        raise KeyError(f"no sensor {key}")


@dataclass
class PowerTable:
    """Received power delta[(l, m)] in dBm at one coordinator, plus own minimum."""

    owner: int
    entries: dict[tuple[int, int], float]
    rho_min: float


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * np.log10(mw)


def path_loss_db(distance_m: float, channel: ChannelModel) -> float:
    d = max(float(distance_m), MIN_DISTANCE_M)
    return channel.reference_loss_db + 10.0 * channel.path_loss_exponent * np.log10(d)


def received_power(
    tx: Sensor,
    rx_position: np.ndarray,
    channel: ChannelModel,
    rng: np.random.Generator | None = None,
) -> float:
    """Power in dBm from ``tx`` at ``rx_position``; deterministic at zero sigma."""
    distance = float(np.linalg.norm(np.asarray(tx.position) - np.asarray(rx_position)))
    if distance < MIN_DISTANCE_M:
        warnings.warn(
            f"tx/rx distance {distance:.4f} m clamped to {MIN_DISTANCE_M} m",
            stacklevel=2,
        )
        distance = MIN_DISTANCE_M
    power = tx.tx_power_dbm - path_loss_db(distance, channel)
    if channel.shadowing_sigma_db > 0.0:
        if rng is None:
            raise ValueError("shadowing requires an rng")
        power -= float(rng.normal(0.0, channel.shadowing_sigma_db))
    return power


def build_power_table(
    wban: Wban,
    network: NetworkState,
    channel: ChannelModel,
    rng: np.random.Generator | None = None,
) -> PowerTable:
    """One delta entry per sensor in the network, measured at this coordinator."""
    entries: dict[tuple[int, int], float] = {}
    for sensor in network.all_sensors():
        entries[sensor.key] = received_power(
            sensor, wban.coordinator_position, channel, rng
        )
    own = [entries[s.key] for s in wban.sensors]
    return PowerTable(owner=wban.id, entries=entries, rho_min=min(own))


def _interference_gain(signal_code: Code | None, interferer_code: Code | None) -> float:
    # Ideal despreading: a cyclic-orthogonal code removes the interferer
    # entirely; a balanced code also integrates narrowband interference to 0.
    # A spread interferer heard by a narrowband receiver lands only ~1/L of
    # its power in band (spreading trades power density for bandwidth).
    if signal_code is None:
        if interferer_code is None:
            return 1.0
        return 1.0 / interferer_code.length
    if interferer_code is None:
        return 0.0 if signal_code.is_balanced() else 1.0
    return 0.0 if interferer_code != signal_code else 1.0


def sinr(
    at: np.ndarray,
    signal: Sensor,
    interferers,
    channel: ChannelModel,
    code_aware: bool = False,
    rng: np.random.Generator | None = None,
) -> float:
    """SINR in dB at position ``at`` for ``signal`` against ``interferers``."""
    p_signal = dbm_to_mw(received_power(signal, at, channel, rng))
    noise = dbm_to_mw(channel.noise_floor_dbm)
    total_interference = 0.0
    sig_code = signal.active_code()
    for interferer in interferers:
        if interferer.key == signal.key:
            raise ValueError("signal sensor listed among its interferers")
        gain = (
            _interference_gain(sig_code, interferer.active_code())
            if code_aware
            else 1.0
        )
        if gain == 0.0:
            continue
        total_interference += gain * dbm_to_mw(
            received_power(interferer, at, channel, rng)
        )
    return 10.0 * float(np.log10(p_signal / (noise + total_interference)))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _body_offsets(wban: Wban) -> np.ndarray:
    return np.array(
        [np.asarray(s.position) - np.asarray(wban.coordinator_position) for s in wban.sensors]
    )


def step_mobility(network: NetworkState, dt: float, rng) -> NetworkState:
    """Advance every network one random-waypoint step of ``dt`` seconds.

    Each body translates rigidly toward its waypoint; arriving bodies draw a
    fresh waypoint and speed.  Translations are clipped so every on-body
    point stays inside the box, which preserves rigid geometry exactly.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    gen = _as_rng(rng)
    box = network.box_size

    mob = network.mobility
    if mob is None:
        targets = gen.uniform(0.0, box, size=(network.n_wbans, 3))
        speeds = gen.uniform(*SPEED_RANGE_MS, size=network.n_wbans)
        mob = MobilityState(targets=targets, speeds=speeds)

    new_wbans: list[Wban] = []
    targets = mob.targets.copy()
    speeds = mob.speeds.copy()
    for idx, wban in enumerate(network.wbans):
        pos = np.asarray(wban.coordinator_position, dtype=float)
        if dt > 0:
            to_target = targets[idx] - pos
            dist = float(np.linalg.norm(to_target))
            step = speeds[idx] * dt
            if dist <= step or dist == 0.0:
                delta = to_target
                targets[idx] = gen.uniform(0.0, box, size=3)
                speeds[idx] = gen.uniform(*SPEED_RANGE_MS)
            else:
                delta = to_target * (step / dist)
            offsets = _body_offsets(wban)
            body = np.vstack([np.zeros(3), offsets]) + pos
            lo = -(body.min(axis=0) + delta)
            hi = box - (body.max(axis=0) + delta)
            correction = np.clip(lo, 0.0, None) + np.clip(hi, None, 0.0)
            delta = delta + correction
        else:
            delta = np.zeros(3)
        new_pos = pos + delta
        new_sensors = [
            replace(s, position=np.asarray(s.position) + delta) for s in wban.sensors
        ]
        new_wbans.append(replace(wban, coordinator_position=new_pos, sensors=new_sensors))

    return NetworkState(
        wbans=new_wbans,
        box_size=box,
        mobility=MobilityState(targets=targets, speeds=speeds),
    )
