"""Interference lists, interference sets, and per-sensor interference lists.

A coordinator admits foreign sensors whose received power clears its own
minimum minus the threshold theta, broadcasts that list, folds peers' lists
into its interference set, and finally — per slot — collects the foreign
sensors that both collide in time and touch the pairwise intersection
IN = IS_i & IS_l.

Membership in IN is tested through indicator functions combined with OR:
a colliding foreign sensor joins SIL_{i,k} when *either* endpoint of the
pair belongs to IN.  (The worked three-network example only reproduces
under OR; AND leaves every listed per-sensor list empty except one.)
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dtrc import TimeshiftPattern
from .model import PowerTable, Sensor, Wban

SensorKey = tuple[int, int]


class IncompleteBroadcastError(ValueError):
    """A peer's interference list is missing; the set cannot be formed."""


@dataclass
class InterferenceList:
    owner: int
    members: set[SensorKey]
    threshold_theta: float


@dataclass
class InterferenceSet:
    owner: int
    members: set[SensorKey]


@dataclass
class SensorInterferenceList:
    owner_sensor: SensorKey
    members: set[SensorKey] = field(default_factory=set)


def build_interference_list(table: PowerTable, theta: float) -> InterferenceList:
    """Foreign sensors received above rho_min - theta at this coordinator."""
    bar = table.rho_min - theta
    members = {
        key for key, power in table.entries.items() if key[0] != table.owner and power > bar
    }
    return InterferenceList(owner=table.owner, members=members, threshold_theta=theta)


def build_interference_set(
    own_list: InterferenceList,
    all_lists: dict[int, InterferenceList],
    expected_wbans=None,
) -> InterferenceSet:
    """Own list plus own sensors that show up in any peer's list."""
    if expected_wbans is not None:
        missing = [w for w in expected_wbans if w not in all_lists]
        if missing:
            raise IncompleteBroadcastError(
                f"interference lists missing for WBANs {missing}"
            )
    members = set(own_list.members)
    for peer_id, peer_list in all_lists.items():
        if peer_id == own_list.owner:
            continue
        members.update(
            key for key in peer_list.members if key[0] == own_list.owner
        )
    return InterferenceSet(owner=own_list.owner, members=members)


def pairwise_intersection(is_i: InterferenceSet, is_l: InterferenceSet) -> set[SensorKey]:
    return is_i.members & is_l.members


def build_sil(
    sensor: Sensor,
    peer: Wban,
    is_i: InterferenceSet,
    is_l: InterferenceSet,
    overlaps: TimeshiftPattern,
) -> set[SensorKey]:
    """This peer's contribution to the sensor's interference list.

    A peer sensor is added iff its slot collides with the sensor's slot
    under the overlap pattern and at least one of the two sensors belongs
    to IN = IS_i & IS_l.
    """
    entry = overlaps.entries.get(peer.id)
    if entry is None:
        return set()
    intersection = pairwise_intersection(is_i, is_l)
    own_in = sensor.key in intersection
    own_slot = sensor.assigned_slot
    contribution: set[SensorKey] = set()
    for peer_sensor in peer.sensors:
        if (own_slot, peer_sensor.assigned_slot) not in entry.colliding_pairs:
            continue
        if own_in or peer_sensor.key in intersection:
            contribution.add(peer_sensor.key)
    return contribution


def build_all_sils(
    wban: Wban,
    peers: list[Wban],
    sets: dict[int, InterferenceSet],
    overlaps: TimeshiftPattern,
) -> dict[SensorKey, SensorInterferenceList]:
    """SIL_{i,k} for every sensor of one network, unioned over all peers."""
    sils = {
        sensor.key: SensorInterferenceList(owner_sensor=sensor.key)
        for sensor in wban.sensors
    }
    for peer in peers:
        if peer.id == wban.id:
            continue
        for sensor in wban.sensors:
            sils[sensor.key].members |= build_sil(
                sensor, peer, sets[wban.id], sets[peer.id], overlaps
            )
    return sils
