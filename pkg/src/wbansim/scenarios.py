"""Scenario construction: random coexistence layouts and the worked example.

``three_wban_example`` hand-places three 4-sensor networks in a row so the
default channel yields exactly the textbook interference memberships used by
the golden regression check (one boundary sensor of each network pushed
toward a neighbouring coordinator).  Superframes are aligned and sensor k
sits in slot k, so same-index sensors transmit simultaneously.
"""

from __future__ import annotations

import numpy as np

from .model import DEFAULT_BOX_M, NetworkState, Sensor, Wban

GOLDEN_THETA_DB = 10.0

# (wban id, sensor id) -> position; boundary sensors 1,4/2,3/2,4/3,1 carry the
# cross-network interference.
_GOLDEN_COORDINATORS = {
    1: (1.0, 2.5, 2.5),
    2: (2.4, 2.5, 2.5),
    3: (3.8, 2.5, 2.5),
}
_GOLDEN_SENSORS = {
    (1, 1): (0.6, 2.5, 2.5),
    (1, 2): (1.0, 2.1, 2.5),
    (1, 3): (1.0, 2.5, 2.1),
    (1, 4): (1.45, 2.5, 2.5),
    (2, 1): (2.4, 2.9, 2.5),
    (2, 2): (2.4, 2.5, 2.9),
    (2, 3): (2.95, 2.5, 2.5),
    (2, 4): (1.8, 2.5, 2.5),
    (3, 1): (3.25, 2.5, 2.5),
    (3, 2): (3.8, 2.1, 2.5),
    (3, 3): (3.8, 2.9, 2.5),
    (3, 4): (4.2, 2.5, 2.5),
}


def _wban(
    wban_id: int,
    coordinator,
    sensor_positions,
    slot_length: float,
    beacon_interval: float,
    offset: float,
) -> Wban:
    sensors = [
        Sensor(
            wban_id=wban_id,
            sensor_id=sensor_id,
            position=np.array(pos, dtype=float),
            assigned_slot=sensor_id,
        )
        for sensor_id, pos in sensor_positions
    ]
    return Wban(
        id=wban_id,
        coordinator_position=np.array(coordinator, dtype=float),
        sensors=sensors,
        superframe_offset=offset,
        beacon_interval=beacon_interval,
        slot_length=slot_length,
    )


def three_wban_example(
    slot_length: float = 0.005, beacon_interval: float | None = None
) -> NetworkState:
    """The committed three-network fixture behind the golden check."""
    k = 4
    bi = beacon_interval if beacon_interval is not None else 2 * k * slot_length
    wbans = []
    for wban_id, coord in _GOLDEN_COORDINATORS.items():
        positions = [
            (sid, pos) for (wid, sid), pos in _GOLDEN_SENSORS.items() if wid == wban_id
        ]
        wbans.append(_wban(wban_id, coord, positions, slot_length, bi, offset=0.0))
    return NetworkState(wbans=wbans)


def random_scenario(
    n_wbans: int,
    k_sensors: int,
    rng: np.random.Generator,
    box_size: float = DEFAULT_BOX_M,
    body_radius: float = 0.5,
    slot_length: float = 0.005,
    beacon_interval: float | None = None,
    align_superframes: bool = False,
) -> NetworkState:
    """Networks dropped uniformly in the box, sensors on a body-sized sphere."""
    if n_wbans < 1 or k_sensors < 1:
        raise ValueError("need at least one WBAN and one sensor")
    bi = beacon_interval if beacon_interval is not None else 2 * k_sensors * slot_length
    margin = body_radius
    wbans = []
    for wban_id in range(1, n_wbans + 1):
        coord = rng.uniform(margin, box_size - margin, size=3)
        positions = []
        for sensor_id in range(1, k_sensors + 1):
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            radius = rng.uniform(0.15, body_radius)
            positions.append((sensor_id, coord + direction * radius))
        offset = 0.0 if align_superframes else float(rng.uniform(0.0, bi))
        wbans.append(_wban(wban_id, coord, positions, slot_length, bi, offset))
    return NetworkState(wbans=wbans, box_size=box_size)


GOLDEN_INTERFERENCE_LISTS = {
    1: {(2, 4)},
    2: {(1, 4), (3, 1)},
    3: {(2, 3)},
}
GOLDEN_INTERFERENCE_SETS = {
    1: {(1, 4), (2, 4)},
    2: {(2, 3), (2, 4), (1, 4), (3, 1)},
    3: {(3, 1), (2, 3)},
}
# Per-sensor lists for network 2.  The (2, 3) entry follows from the OR
# membership rule: S_{2,3} itself sits in IN_{2,3}, which admits the
# slot-3 collider S_{3,3} even though S_{3,3} is in no interference set.
GOLDEN_SILS_WBAN2 = {
    (2, 1): {(3, 1)},
    (2, 2): set(),
    (2, 3): {(3, 3)},
    (2, 4): {(1, 4)},
}
GOLDEN_CODE_ASSIGNMENTS = {
    1: {(1, 4)},
    2: {(2, 1), (2, 3), (2, 4)},
    3: {(3, 1), (3, 3)},
}
