"""Monte-Carlo superframe simulator with per-protocol metric collection.

Each run drives a fixed number of beacon intervals.  Per round: bodies take a
mobility step, the selected protocol recomputes its assignments, every
network transmits its beacon and — only if that beacon survived, since
sensors need it for synchronisation — its TDMA frame bursts.  Beacons collide
on temporal overlap with any foreign transmission; data frames are lost when
their slot-average SINR at the own coordinator falls below the capture
threshold.  Orthogonal codes and channel separation enter purely through the
interference sum.

Everything is deterministic given (config, protocol, seed): the event queue
breaks timestamp ties by (kind priority, wban id, sensor id), random streams
are split off one seed sequence, and beacon outcomes resolve in chronological
order so the "did that network actually transmit" feedback is causal.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from . import codes as codes_mod
from .config import ExperimentConfig
from .model import ChannelModel, dbm_to_mw, step_mobility
from .protocols import (
    ProtocolKind,
    run_ocaim_round_detailed,
    run_sms_round_detailed,
)
from .scenarios import random_scenario


class EventKind(IntEnum):
    # numeric value doubles as the tie-break priority
    MOBILITY_STEP = 0
    PROTOCOL_ROUND = 1
    BEACON_TX = 2
    SLOT_START = 3
    FRAME_TX = 4
    FRAME_END = 5
    SUPERFRAME_BOUNDARY = 6


class Event(NamedTuple):
    """Queue entry; tuple ordering is the total (time, kind, wban, sensor) order."""

    time: float
    kind: EventKind
    wban: int = -1
    sensor: int = -1


class EventQueue:
    def __init__(self):
        self._heap: list[Event] = []

    def push(self, event: Event) -> None:
        heapq.heappush(self._heap, event)

    def pop(self) -> Event:
        return heapq.heappop(self._heap)

    def __len__(self) -> int:
        return len(self._heap)


@dataclass
class RoundRecord:
    round: int
    wban: int
    beacons_sent: int = 0
    beacons_collided: int = 0
    frames_generated: int = 0
    frames_sent: int = 0
    frames_delivered: int = 0
    frames_collided: int = 0
    sinr_sum_db: float = 0.0
    min_sinr_db: float = math.nan
    energy_mws: float = 0.0
    codes_assigned: int = 0
    channel_switches: int = 0

    @property
    def mean_sinr_db(self) -> float:
        return self.sinr_sum_db / self.frames_sent if self.frames_sent else math.nan


@dataclass
class MetricsLog:
    protocol: str
    seed: int
    n_wbans: int
    records: list[RoundRecord] = field(default_factory=list)

    def totals(self) -> dict:
        sent = sum(r.frames_sent for r in self.records)
        delivered = sum(r.frames_delivered for r in self.records)
        collided = sum(r.frames_collided for r in self.records)
        b_sent = sum(r.beacons_sent for r in self.records)
        b_coll = sum(r.beacons_collided for r in self.records)
        mins = [r.min_sinr_db for r in self.records if not math.isnan(r.min_sinr_db)]
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "n_wbans": self.n_wbans,
            "frames_generated": sum(r.frames_generated for r in self.records),
            "frames_sent": sent,
            "frames_delivered": delivered,
            "frames_collided": collided,
            "frames_in_flight": sent - delivered - collided,
            "fdr": delivered / sent if sent else 1.0,
            "beacons_sent": b_sent,
            "beacons_collided": b_coll,
            "beacon_success": (b_sent - b_coll) / b_sent if b_sent else 1.0,
            "mean_sinr_db": (
                sum(r.sinr_sum_db for r in self.records) / sent if sent else math.nan
            ),
            "min_sinr_db": min(mins) if mins else math.nan,
            "energy_mws": sum(r.energy_mws for r in self.records),
            "codes_assigned": sum(r.codes_assigned for r in self.records),
            "channel_switches": sum(r.channel_switches for r in self.records),
        }


@dataclass
class BeaconStats:
    probability: float
    ci_halfwidth: float
    attempts: int
    low_sample_warning: bool


def measure_beacon_success(log: MetricsLog, min_attempts: int = 1000) -> BeaconStats:
    """Uncollided beacon fraction with a binomial 95% confidence half-width."""
    attempts = sum(r.beacons_sent for r in log.records)
    collided = sum(r.beacons_collided for r in log.records)
    if attempts == 0:
        return BeaconStats(1.0, 0.0, 0, True)
    p = (attempts - collided) / attempts
    ci = 1.96 * math.sqrt(max(p * (1 - p), 1e-12) / attempts)
    return BeaconStats(p, ci, attempts, attempts < min_attempts)


@dataclass
class _Round:
    """Materialised schedule and outcomes for one beacon interval."""

    offsets: np.ndarray  # (N,)
    beacon_start: np.ndarray  # (N,)
    beacon_success: np.ndarray  # (N,) bool
    frame_start: np.ndarray  # (F,) F = N*K*ntx
    frame_wban: np.ndarray  # (F,)
    frame_src: np.ndarray  # (F,) global sensor index
    frame_code: np.ndarray  # (F,) code rank or -1
    frame_channel: np.ndarray  # (F,)
    frame_exists: np.ndarray  # (F,) bool, set at beacon resolution
    p_sensors: np.ndarray  # (N, N*K) mW received at each coordinator
    codes_assigned: np.ndarray  # (N,)
    switches: np.ndarray  # (N,)
    list_sizes: np.ndarray  # (N,) interference-list entries broadcast
    negotiated: bool = True  # SMS only renegotiates on its cadence


class _Engine:
    def __init__(self, config: ExperimentConfig, protocol: ProtocolKind, seed: int):
        self.cfg = config
        self.protocol = protocol
        t = config.timing
        self.n = config.scenario.n_wbans
        self.k = config.scenario.k_sensors
        self.bi, self.ts = t.bi, t.ts
        self.t_fr, self.t_b, self.sifs = t.t_fr, t.t_b, t.sifs
        self.ntx = min(math.floor(t.ts / (t.t_fr + t.sifs)), int(t.nfrs))
        self.generated_per_sensor = int(t.p_frames)
        self.capture_db = config.protocol.capture_threshold_db
        self.noise_mw = dbm_to_mw(config.channel.noise_floor_dbm)
        self.tx_mw = dbm_to_mw(-10.0)
        self.channel = ChannelModel(
            path_loss_exponent=config.channel.path_loss_exponent,
            reference_loss_db=config.channel.reference_loss_db,
            noise_floor_dbm=config.channel.noise_floor_dbm,
            shadowing_sigma_db=config.channel.shadowing_sigma_db,
        )
        self.drift_bound = config.protocol.drift_ppm * 1e-6 * self.bi
        self.isolation_gain = 10.0 ** (-config.protocol.channel_isolation_db / 10.0)

        ss = np.random.SeedSequence([int(seed), 0x5EED])
        scen_ss, mob_ss, off_ss, drift_ss = ss.spawn(4)
        self.rng_mobility = np.random.default_rng(mob_ss)
        self.rng_offsets = np.random.default_rng(off_ss)
        self.rng_drift = np.random.default_rng(drift_ss)
        self.network = random_scenario(
            self.n,
            self.k,
            np.random.default_rng(scen_ss),
            box_size=config.scenario.box_size,
            body_radius=config.scenario.body_radius,
            slot_length=self.ts,
            beacon_interval=self.bi,
        )
        self.wban_ids = [w.id for w in self.network.wbans]
        self.persistent_offsets = self.rng_offsets.uniform(0.0, self.bi, self.n)
        if config.run.align_superframes:
            self.persistent_offsets[:] = 0.0

        if protocol is ProtocolKind.OCAIM:
            self.cowhc = codes_mod.network_code_set(self.n)
            self.balanced = np.array(
                [c.is_balanced() for c in self.cowhc.codes], dtype=bool
            )
            self.psd_gain = 1.0 / self.cowhc.matrix_order
        else:
            self.cowhc = None
            self.balanced = np.zeros(1, dtype=bool)
            self.psd_gain = 1.0

        self.prev_channels: dict = {}
        self.sms_streak: dict = {}
        self.rounds: dict[int, _Round] = {}
        self.records: dict[tuple[int, int], RoundRecord] = {}
        self.log = MetricsLog(protocol=protocol.value, seed=seed, n_wbans=self.n)

    def _rec(self, rnd: int, wi: int) -> RoundRecord:
        key = (rnd, wi)
        if key not in self.records:
            self.records[key] = RoundRecord(round=rnd, wban=self.wban_ids[wi])
        return self.records[key]

    # -- schedule ------------------------------------------------------------

    def _received_power_matrix(self) -> np.ndarray:
        coords = np.array([w.coordinator_position for w in self.network.wbans])
        sensors = np.array([s.position for w in self.network.wbans for s in w.sensors])
        ch = self.channel
        d = np.maximum(
            np.linalg.norm(coords[:, None, :] - sensors[None, :, :], axis=2), 0.01
        )
        loss = ch.reference_loss_db + 10 * ch.path_loss_exponent * np.log10(d)
        return dbm_to_mw(-10.0 - loss)

    def _run_protocol(self, rnd: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        nk = self.n * self.k
        code = -np.ones(nk, dtype=int)
        chan = np.zeros(nk, dtype=int)
        codes_assigned = np.zeros(self.n, dtype=int)
        switches = np.zeros(self.n, dtype=int)
        list_sizes = np.zeros(self.n, dtype=int)
        theta = self.cfg.protocol.theta_db
        if self.protocol is ProtocolKind.OCAIM:
            detail = run_ocaim_round_detailed(
                self.network,
                self.channel,
                theta,
                cowhc=self.cowhc,
                drift_bound=self.drift_bound,
                rng=self.rng_drift,
            )
            rank = {wid: i for i, wid in enumerate(sorted(self.wban_ids))}
            for wi, w in enumerate(self.network.wbans):
                list_sizes[wi] = len(detail.lists[w.id].members)
                pattern = detail.patterns[w.id]
                for si, sensor in enumerate(w.sensors):
                    a = pattern.per_slot.get(sensor.assigned_slot)
                    if a is not None and a.spread:
                        code[wi * self.k + si] = rank[w.id]
                        codes_assigned[wi] += 1
        elif self.protocol is ProtocolKind.SMS:
            if rnd % self.cfg.protocol.sms_update_period != 0:
                # between negotiation rounds the radios stay where they are
                for wi, w in enumerate(self.network.wbans):
                    for si, sensor in enumerate(w.sensors):
                        chan[wi * self.k + si] = self.prev_channels.get(sensor.key, 0)
                return code, chan, codes_assigned, switches, list_sizes
            detail = run_sms_round_detailed(
                self.network,
                self.channel,
                theta,
                self.cfg.protocol.n_channels,
                previous=self.prev_channels,
            )
            hold = self.cfg.protocol.channel_hold_rounds
            for wi, w in enumerate(self.network.wbans):
                list_sizes[wi] = detail.list_sizes.get(w.id, 0)
                for si, sensor in enumerate(w.sensors):
                    key = sensor.key
                    c = detail.channels[key]
                    prev = self.prev_channels.get(key, 0)
                    if key in detail.managed:
                        self.sms_streak[key] = 0
                    else:
                        # conflict-free: hold the tuned channel a while before
                        # drifting back to default, so assignments don't flap
                        streak = self.sms_streak.get(key, 0) + 1
                        self.sms_streak[key] = streak
                        if prev != 0 and streak <= hold:
                            c = prev
                    chan[wi * self.k + si] = c
                    if c != prev:
                        switches[wi] += 1
                    self.prev_channels[key] = c
        return code, chan, codes_assigned, switches, list_sizes

    def _schedule_round(self, rnd: int, queue: EventQueue) -> None:
        if self.cfg.run.resample_offsets:
            offsets = self.rng_offsets.uniform(0.0, self.bi, self.n)
        else:
            offsets = self.persistent_offsets.copy()
        for wi, w in enumerate(self.network.wbans):
            w.superframe_offset = float(offsets[wi])

        code, chan, codes_assigned, switches, list_sizes = self._run_protocol(rnd)
        p_sensors = self._received_power_matrix()

        starts = []
        frame_wban = []
        frame_src = []
        base = rnd * self.bi
        step = self.t_fr + self.sifs
        for wi in range(self.n):
            queue.push(Event(float(offsets[wi] + base), EventKind.BEACON_TX, wi))
            for si in range(self.k):
                slot_start = offsets[wi] + base + self.t_b + si * self.ts
                queue.push(Event(float(slot_start), EventKind.SLOT_START, wi, si))
                for j in range(self.ntx):
                    t0 = float(slot_start + j * step)
                    queue.push(Event(t0, EventKind.FRAME_TX, wi, si))
                    queue.push(Event(t0 + self.t_fr, EventKind.FRAME_END, wi, si))
                    starts.append(t0)
                    frame_wban.append(wi)
                    frame_src.append(wi * self.k + si)

        negotiated = (
            self.protocol is not ProtocolKind.SMS
            or rnd % self.cfg.protocol.sms_update_period == 0
        )
        src = np.array(frame_src, dtype=int)
        self.rounds[rnd] = _Round(
            offsets=np.asarray(offsets, dtype=float),
            beacon_start=np.asarray(offsets) + base,
            beacon_success=np.zeros(self.n, dtype=bool),
            frame_start=np.array(starts),
            frame_wban=np.array(frame_wban, dtype=int),
            frame_src=src,
            frame_code=code[src],
            frame_channel=chan[src],
            frame_exists=np.zeros(len(starts), dtype=bool),
            p_sensors=p_sensors,
            codes_assigned=codes_assigned,
            switches=switches,
            list_sizes=list_sizes,
            negotiated=negotiated,
        )

    # -- resolution ------------------------------------------------------------

    def _resolve_beacons(self, rnd: int) -> None:
        """Chronological per-beacon success; a success unlocks that superframe's frames."""
        state = self.rounds[rnd]
        blocks = [b for b in (self.rounds.get(rnd - 1), state) if b is not None]
        order = sorted(range(self.n), key=lambda wi: (state.beacon_start[wi], wi))
        for wi in order:
            b0 = float(state.beacon_start[wi])
            b1 = b0 + self.t_b
            collided = False
            for block in blocks:
                for li in range(self.n):
                    if li == wi:
                        continue
                    s = float(block.beacon_start[li])
                    if max(b0, s) < min(b1, s + self.t_b):
                        collided = True
                        break
                if collided:
                    break
                live = block.frame_exists & (block.frame_wban != wi)
                if np.any(
                    live
                    & (block.frame_start < b1)
                    & (block.frame_start + self.t_fr > b0)
                ):
                    collided = True
                    break
            state.beacon_success[wi] = not collided
            if not collided or not self.cfg.run.beacon_gating:
                lo = wi * self.k * self.ntx
                state.frame_exists[lo : lo + self.k * self.ntx] = True
            rec = self._rec(rnd, wi)
            rec.beacons_sent += 1
            rec.beacons_collided += int(collided)
            rec.frames_generated += self.k * self.generated_per_sensor

    def _resolve_frames(self, rnd: int) -> None:
        """SINR per transmitted frame against the three-round interference window."""
        state = self.rounds[rnd]
        blocks = [self.rounds[q] for q in (rnd - 1, rnd, rnd + 1) if q in self.rounds]
        own = np.nonzero(state.frame_exists)[0]
        code_aware = self.protocol is ProtocolKind.OCAIM
        channel_aware = self.protocol is ProtocolKind.SMS

        sinr_db = np.full(state.frame_exists.shape, math.nan)
        if own.size:
            f_start = state.frame_start[own]
            f_wban = state.frame_wban[own]
            f_code = state.frame_code[own]
            f_chan = state.frame_channel[own]
            p_sig = state.p_sensors[f_wban, state.frame_src[own]]
            interference = np.zeros(own.size)
            if code_aware:
                own_spread = f_code >= 0
                own_balanced = own_spread & self.balanced[np.maximum(f_code, 0)]
            for block in blocks:
                live = np.nonzero(block.frame_exists)[0]
                if live.size:
                    i_start = block.frame_start[live]
                    overlap = np.minimum(
                        f_start[:, None] + self.t_fr, i_start[None, :] + self.t_fr
                    ) - np.maximum(f_start[:, None], i_start[None, :])
                    np.clip(overlap, 0.0, None, out=overlap)
                    weight = overlap / self.t_fr
                    weight *= f_wban[:, None] != block.frame_wban[live][None, :]
                    if code_aware:
                        i_code = block.frame_code[live][None, :]
                        suppressed = own_spread[:, None] & (
                            ((i_code >= 0) & (i_code != f_code[:, None]))
                            | ((i_code < 0) & own_balanced[:, None])
                        )
                        weight *= ~suppressed
                        # a spread interferer spends its power across L chips;
                        # a narrowband receiver only collects ~1/L of it
                        diluted = (i_code >= 0) & ~own_spread[:, None]
                        weight *= np.where(diluted, self.psd_gain, 1.0)
                    if channel_aware:
                        same = block.frame_channel[live][None, :] == f_chan[:, None]
                        weight *= np.where(same, 1.0, self.isolation_gain)
                    power = block.p_sensors[
                        f_wban[:, None], block.frame_src[live][None, :]
                    ]
                    interference += np.sum(weight * power, axis=1)

            sinr_db[own] = 10.0 * np.log10(p_sig / (self.noise_mw + interference))

        with np.errstate(invalid="ignore"):
            lost = sinr_db < self.capture_db  # nan (untransmitted) compares False
        for wi in range(self.n):
            rec = self._rec(rnd, wi)
            mask = state.frame_exists & (state.frame_wban == wi)
            sent = int(np.count_nonzero(mask))
            collided = int(np.count_nonzero(lost & mask))
            rec.frames_sent += sent
            rec.frames_collided += collided
            rec.frames_delivered += sent - collided
            if sent:
                rec.sinr_sum_db += float(np.nansum(sinr_db[mask]))
                rec.min_sinr_db = float(np.nanmin(sinr_db[mask]))
            rec.codes_assigned = int(state.codes_assigned[wi])
            rec.channel_switches = int(state.switches[wi])
            rec.energy_mws = self._energy(state, wi, sent, collided)

    def _energy(self, state: _Round, wi: int, sent: int, collided: int) -> float:
        p = self.cfg.protocol
        e = self.tx_mw * self.t_b  # beacon goes out every superframe
        e += self.tx_mw * self.t_fr * sent
        if self.protocol is ProtocolKind.OCAIM or (
            self.protocol is ProtocolKind.SMS and state.negotiated
        ):
            e += self.tx_mw * p.ctrl_airtime  # interference-list broadcast
        if self.protocol is ProtocolKind.SMS:
            e += float(state.switches[wi]) * p.switch_cost_factor * self.tx_mw * self.t_fr
        # recovery charge: every lost frame must eventually be sent again
        e += collided * p.retry_energy_factor * self.tx_mw * self.t_fr
        return float(e)

    # -- main loop -------------------------------------------------------------

    def run(self) -> MetricsLog:
        horizon = self.cfg.run.horizon_superframes
        queue = EventQueue()
        for rnd in range(horizon):
            queue.push(Event(rnd * self.bi, EventKind.MOBILITY_STEP))
            queue.push(Event(rnd * self.bi, EventKind.PROTOCOL_ROUND))
            queue.push(Event((rnd + 1) * self.bi, EventKind.SUPERFRAME_BOUNDARY))
        last_time = -math.inf
        while queue:
            event = queue.pop()
            assert event.time >= last_time, "event order regression"
            last_time = event.time
            if event.kind is EventKind.MOBILITY_STEP:
                rnd = round(event.time / self.bi)
                if rnd > 0:
                    self.network = step_mobility(
                        self.network,
                        self.bi * self.cfg.scenario.mobility_step_scale,
                        self.rng_mobility,
                    )
            elif event.kind is EventKind.PROTOCOL_ROUND:
                self._schedule_round(round(event.time / self.bi), queue)
            elif event.kind is EventKind.SUPERFRAME_BOUNDARY:
                rnd = round(event.time / self.bi) - 1
                self._resolve_beacons(rnd)
                if rnd >= 1:
                    self._resolve_frames(rnd - 1)
                self.rounds.pop(rnd - 3, None)
        if horizon >= 1:
            self._resolve_frames(horizon - 1)
        self.log.records = [self.records[k] for k in sorted(self.records)]
        return self.log


def run_simulation(
    config: ExperimentConfig, protocol: ProtocolKind | str, seed: int
) -> MetricsLog:
    """Simulate the configured horizon under one protocol; deterministic per seed."""
    if isinstance(protocol, str):
        protocol = ProtocolKind(protocol)
    config.validate()
    return _Engine(config, protocol, seed).run()


def summarize(logs: list[MetricsLog]) -> dict:
    """Aggregate seed-level totals into mean/std per metric."""
    keys = ("fdr", "mean_sinr_db", "energy_mws", "beacon_success")
    totals = [log.totals() for log in logs]
    out: dict = {
        "protocol": totals[0]["protocol"],
        "n_wbans": totals[0]["n_wbans"],
        "seeds": [t["seed"] for t in totals],
    }
    for key in keys:
        values = np.array([t[key] for t in totals], dtype=float)
        out[f"{key}_mean"] = float(np.mean(values))
        out[f"{key}_std"] = float(np.std(values))
    return out


def sweep(
    axis: str,
    values,
    protocols,
    seeds,
    config: ExperimentConfig,
) -> list[dict]:
    """Run the grid (axis value x protocol x seed) and aggregate per point.

    axis "n_wbans" and "theta" override the corresponding config field per
    value; axis "time" runs the configured scenario once per seed and reports
    per-round means so figures can plot against time.
    """
    from dataclasses import replace

    rows: list[dict] = []
    protocols = [ProtocolKind(p) if isinstance(p, str) else p for p in protocols]
    if axis == "time":
        for protocol in protocols:
            logs = [run_simulation(config, protocol, int(s)) for s in seeds]
            horizon = config.run.horizon_superframes
            for rnd in range(horizon):
                recs = [
                    r for log in logs for r in log.records if r.round == rnd
                ]
                sent = sum(r.frames_sent for r in recs)
                rows.append(
                    {
                        "axis": "time",
                        "value": rnd * config.timing.bi,
                        "protocol": protocol.value,
                        "mean_sinr_db": (
                            sum(r.sinr_sum_db for r in recs) / sent
                            if sent
                            else math.nan
                        ),
                        "fdr_mean": (
                            sum(r.frames_delivered for r in recs) / sent
                            if sent
                            else 1.0
                        ),
                        "energy_mws_mean": float(
                            np.mean([r.energy_mws for r in recs])
                        ),
                    }
                )
        return rows

    for value in values:
        if axis == "n_wbans":
            cfg = replace(config, scenario=replace(config.scenario, n_wbans=int(value)))
        elif axis == "theta":
            cfg = replace(config, protocol=replace(config.protocol, theta_db=float(value)))
        else:
            raise ValueError(f"unknown sweep axis {axis!r}")
        for protocol in protocols:
            logs = [run_simulation(cfg, protocol, int(s)) for s in seeds]
            summary = summarize(logs)
            summary["axis"] = axis
            summary["value"] = float(value)
            rows.append(summary)
    return rows
