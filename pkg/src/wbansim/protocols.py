"""Coexistence protocols: the five-phase code-assignment round plus baselines.

OCAIM: every beacon interval each coordinator measures received powers,
exchanges interference lists, correlates superframe timing, forms per-sensor
interference lists, and assigns its network-unique cyclic-orthogonal code to
exactly the sensors (own and listed peers) that collide.  OS is plain
uncoordinated TDMA.  SMS reassigns orthogonal channels (16-pool) to
sensor-level interferers regardless of slot timing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import codes as codes_mod
from .codes import Code, CowhcSet
from .dtrc import TimeshiftPattern, build_timeshift_pattern
from .interference import (
    InterferenceList,
    InterferenceSet,
    SensorInterferenceList,
    build_all_sils,
    build_interference_list,
    build_interference_set,
    pairwise_intersection,
)
from .model import ChannelModel, NetworkState, PowerTable, build_power_table

SensorKey = tuple[int, int]

DEFAULT_SMS_CHANNELS = 16


class ProtocolKind(Enum):
    OCAIM = "ocaim"
    OS = "os"
    SMS = "sms"


@dataclass
class SlotAssignment:
    spread: bool = False
    code: Code | None = None


@dataclass
class CodeAssignmentPattern:
    wban: int
    per_slot: dict[int, SlotAssignment] = field(default_factory=dict)

    def spread_slots(self) -> list[int]:
        return sorted(s for s, a in self.per_slot.items() if a.spread)


@dataclass
class OcaimRound:
    """Full trace of one protocol round, for golden diffs and manifests."""

    patterns: dict[int, CodeAssignmentPattern]
    power_tables: dict[int, PowerTable]
    lists: dict[int, InterferenceList]
    sets: dict[int, InterferenceSet]
    sils: dict[SensorKey, SensorInterferenceList]
    timeshift_patterns: dict[int, TimeshiftPattern]
    cowhc: CowhcSet

    def assigned_sensors(self) -> dict[int, set[SensorKey]]:
        out: dict[int, set[SensorKey]] = {}
        for wban_id, pattern in self.patterns.items():
            out[wban_id] = {
                (wban_id, slot)
                for slot, a in pattern.per_slot.items()
                if a.spread
            }
        return out


@dataclass
class SmsRound:
    channels: dict[SensorKey, int]
    reassigned: set[SensorKey]
    managed: set[SensorKey]  # every sensor party to an interference pair
    unresolved_pairs: list[tuple[SensorKey, SensorKey]]
    list_sizes: dict[int, int] = field(default_factory=dict)


def _phase12(network: NetworkState, channel: ChannelModel, theta: float):
    tables = {w.id: build_power_table(w, network, channel) for w in network.wbans}
    lists = {
        w.id: build_interference_list(tables[w.id], theta) for w in network.wbans
    }
    all_ids = [w.id for w in network.wbans]
    sets = {
        w.id: build_interference_set(lists[w.id], lists, expected_wbans=all_ids)
        for w in network.wbans
    }
    return tables, lists, sets


def run_ocaim_round_detailed(
    network: NetworkState,
    channel: ChannelModel,
    theta: float,
    cowhc: CowhcSet | None = None,
    drift_bound: float = 0.0,
    rng: np.random.Generator | None = None,
) -> OcaimRound:
    """Execute all five phases once and return the full round trace."""
    n = network.n_wbans
    if cowhc is None:
        cowhc = codes_mod.network_code_set(n)
    if cowhc.set_size < n:
        raise codes_mod.CodeCapacityError(n, cowhc.set_size, cowhc.matrix_order)

    # Phase 1-2: power measurement, interference lists and sets.
    tables, lists, sets = _phase12(network, channel, theta)

    # Phase 3: timeshift patterns per coordinator.
    k_slots = max(w.k_sensors for w in network.wbans)
    patterns3 = {
        w.id: build_timeshift_pattern(
            w, network.wbans, k_slots, drift_bound=drift_bound, rng=rng
        )
        for w in network.wbans
    }

    # Phase 4: per-sensor interference lists.
    sils: dict[SensorKey, SensorInterferenceList] = {}
    for w in network.wbans:
        sils.update(build_all_sils(w, network.wbans, sets, patterns3[w.id]))

    # Phase 5: code assignment.  A sensor is spread when its own list is
    # non-empty or it appears in some peer sensor's list; every spread sensor
    # of one network uses that network's unique code, in its own slot.
    wban_code = {
        w.id: cowhc.codes[rank]
        for rank, w in enumerate(sorted(network.wbans, key=lambda x: x.id))
    }
    listed_elsewhere: set[SensorKey] = set()
    for sil in sils.values():
        listed_elsewhere |= sil.members
    patterns: dict[int, CodeAssignmentPattern] = {}
    for w in network.wbans:
        pattern = CodeAssignmentPattern(wban=w.id)
        for sensor in w.sensors:
            spread = bool(sils[sensor.key].members) or sensor.key in listed_elsewhere
            pattern.per_slot[sensor.assigned_slot] = SlotAssignment(
                spread=spread, code=wban_code[w.id] if spread else None
            )
        patterns[w.id] = pattern

    return OcaimRound(
        patterns=patterns,
        power_tables=tables,
        lists=lists,
        sets=sets,
        sils=sils,
        timeshift_patterns=patterns3,
        cowhc=cowhc,
    )


def run_ocaim_round(
    network: NetworkState,
    channel: ChannelModel,
    theta: float,
    cowhc: CowhcSet | None = None,
    drift_bound: float = 0.0,
    rng: np.random.Generator | None = None,
) -> dict[int, CodeAssignmentPattern]:
    return run_ocaim_round_detailed(
        network, channel, theta, cowhc=cowhc, drift_bound=drift_bound, rng=rng
    ).patterns


def run_os_round(
    network: NetworkState, channel: ChannelModel
) -> dict[int, CodeAssignmentPattern]:
    """Uncoordinated TDMA: no codes, no channel moves, ever."""
    patterns = {}
    for w in network.wbans:
        pattern = CodeAssignmentPattern(wban=w.id)
        for sensor in w.sensors:
            pattern.per_slot[sensor.assigned_slot] = SlotAssignment()
        patterns[w.id] = pattern
    return patterns


def run_sms_round_detailed(
    network: NetworkState,
    channel: ChannelModel,
    theta: float,
    n_channels: int = DEFAULT_SMS_CHANNELS,
    previous: dict[SensorKey, int] | None = None,
) -> SmsRound:
    """Sensor-level channel separation from a fixed orthogonal pool.

    Interfering sensor pairs are the cross products of each pairwise set
    intersection.  Greedy lowest-free-channel colouring runs in sensor-key
    order (coordinators negotiate in network-id order); a sensor keeps its
    previous channel whenever it is still conflict-free, so assignments do
    not churn while geometry is stable.  Exhausted palettes leave pairs
    co-channel, reported as unresolved.
    """
    if n_channels < 1:
        raise ValueError("n_channels must be >= 1")
    _, lists, sets = _phase12(network, channel, theta)

    edges: set[tuple[SensorKey, SensorKey]] = set()
    ids = sorted(w.id for w in network.wbans)
    for idx, i in enumerate(ids):
        for l in ids[idx + 1 :]:
            common = pairwise_intersection(sets[i], sets[l])
            for a in sorted(k for k in common if k[0] == i):
                for b in sorted(k for k in common if k[0] == l):
                    edges.add((a, b))

    neighbours: dict[SensorKey, set[SensorKey]] = {}
    for a, b in edges:
        neighbours.setdefault(a, set()).add(b)
        neighbours.setdefault(b, set()).add(a)

    channels = {s.key: 0 for w in network.wbans for s in w.sensors}
    reassigned: set[SensorKey] = set()
    coloured: set[SensorKey] = set()
    unresolved: list[tuple[SensorKey, SensorKey]] = []
    previous = previous or {}
    for key in sorted(neighbours):
        taken = {channels[n] for n in neighbours[key] if n in coloured}
        preferred = previous.get(key, 0)
        candidates = [preferred] + [c for c in range(n_channels) if c != preferred]
        free = next((c for c in candidates if c not in taken), None)
        if free is None:
            unresolved.extend(
                (key, n) for n in sorted(neighbours[key]) if channels[n] == channels[key]
            )
        else:
            channels[key] = free
            if free != 0:
                reassigned.add(key)
        coloured.add(key)
    return SmsRound(
        channels=channels,
        reassigned=reassigned,
        managed=set(neighbours),
        unresolved_pairs=unresolved,
        list_sizes={wid: len(lst.members) for wid, lst in lists.items()},
    )


def run_sms_round(
    network: NetworkState,
    channel: ChannelModel,
    theta: float,
    n_channels: int = DEFAULT_SMS_CHANNELS,
    previous: dict[SensorKey, int] | None = None,
) -> dict[SensorKey, int]:
    return run_sms_round_detailed(network, channel, theta, n_channels, previous).channels


def apply_patterns(network: NetworkState, patterns: dict[int, CodeAssignmentPattern]):
    """Reflect a round's assignments into the sensors' code schedules."""
    for w in network.wbans:
        pattern = patterns.get(w.id)
        for sensor in w.sensors:
            assignment = pattern.per_slot.get(sensor.assigned_slot) if pattern else None
            code = assignment.code if assignment and assignment.spread else None
            sensor.code_schedule[sensor.assigned_slot] = code
        if pattern is not None:
            spread_codes = [a.code for a in pattern.per_slot.values() if a.spread]
            if spread_codes:
                w.code = spread_codes[0]
