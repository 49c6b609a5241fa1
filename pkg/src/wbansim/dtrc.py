"""Distributed time reference correlation: superframe offsets and slot overlap.

Coordinators timestamp each other's beacons and recover the relative shift
between superframes, then derive which of their own TDMA slots temporally
collide with which peer slots.  The production classifier is plain interval
geometry on a common timeline; the published case analysis (which only covers
negative shifts and garbles its index windows for part of that range) is kept
as a secondary implementation for cross-checking.

Sign convention: ``timeshift`` is own superframe start minus peer superframe
start, so a peer that starts later yields a negative value.  A peer beacon
arriving half a slot late therefore recovers timeshift = -TS/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class MalformedTimestampError(ValueError):
    """Timestamp set violates basic ordering/positivity requirements."""


@dataclass(frozen=True)
class FrameTimestamps:
    """PHY/MAC timestamps collected around one received beacon (seconds)."""

    ptp: float  # sender: last bit on air
    mtp: float  # sender: last bit left the MAC
    prt: float  # receiver: first-to-last bit at the PHY
    mrt: float  # receiver: first-to-last bit at the MAC
    ppt: float  # receiver: PHY processing latency
    l_prop: float  # propagation delay
    frt: float  # receiver: last bit arrived at the MAC (receiver clock)


@dataclass
class PatternEntry:
    timeshift: float
    colliding_pairs: set[tuple[int, int]]


@dataclass
class TimeshiftPattern:
    """Per-coordinator map of peer superframe shifts and colliding slot pairs."""

    owner: int
    entries: dict[int, PatternEntry] = field(default_factory=dict)

    def to_manifest(self) -> dict:
        return {
            "owner": self.owner,
            "entries": {
                str(peer): {
                    "timeshift": e.timeshift,
                    "colliding_pairs": sorted(e.colliding_pairs),
                }
                for peer, e in sorted(self.entries.items())
            },
        }


def compute_timeshift(stamps: FrameTimestamps) -> float:
    """Recover the superframe shift from one beacon's timestamp set.

    Diff = PTP - MTP is the sender-side PHY latency; the receiver subtracts
    its own receive chain and the propagation delay from the MAC arrival
    time, leaving the shift between the two superframe references.
    """
    for name in ("prt", "mrt", "ppt", "l_prop"):
        if getattr(stamps, name) < 0:
            raise MalformedTimestampError(f"{name} must be >= 0")
    if stamps.ptp < stamps.mtp:
        raise MalformedTimestampError("ptp precedes mtp on the sender clock")
    diff = stamps.ptp - stamps.mtp
    return stamps.frt - (stamps.mrt + stamps.ppt + stamps.prt + stamps.l_prop + diff)


def timestamps_for_offset(
    timeshift: float,
    airtime: float = 0.6e-3,
    l_prop: float = 1.0e-8,
    ppt: float = 50e-6,
    phy_latency: float = 20e-6,
    jitter: float = 0.0,
) -> FrameTimestamps:
    """Forward-simulate the stamps a receiver would collect for a known shift.

    Stamps are laid out so ``compute_timeshift`` recovers exactly
    ``timeshift + jitter``; the sign convention (own start minus peer start)
    is carried by the caller.  ``jitter`` perturbs the MAC arrival stamp,
    modelling clock drift and timing uncertainty.
    """
    mtp = timeshift
    ptp = mtp + phy_latency
    prt = airtime
    mrt = airtime
    frt = mtp + phy_latency + l_prop + prt + ppt + mrt + jitter
    return FrameTimestamps(
        ptp=ptp, mtp=mtp, prt=prt, mrt=mrt, ppt=ppt, l_prop=l_prop, frt=frt
    )


def normalize_timeshift(raw: float, bi: float) -> float:
    """Wrap a shift into [-BI/2, BI/2); superframes repeat, so shifts are modular."""
    return float((raw + bi / 2.0) % bi - bi / 2.0)


def classify_overlap(
    timeshift: float, ts: float, bi: float, k: int
) -> set[tuple[int, int]]:
    """Colliding (own slot, peer slot) pairs for one peer superframe instance.

    Own slots z = 1..K occupy [(z-1)*TS, z*TS); the peer's occupy the same
    grid displaced by -timeshift.  A pair collides iff the open intervals
    intersect with positive length.  Slots are 1-based.
    """
    if abs(timeshift) >= bi:
        raise ValueError(f"|timeshift| {abs(timeshift)} must be < BI {bi}")
    if k < 1 or ts <= 0 or bi <= 0:
        raise ValueError("need k >= 1, ts > 0, bi > 0")
    peer_start = -timeshift
    pairs: set[tuple[int, int]] = set()
    for z in range(1, k + 1):
        own_lo = (z - 1) * ts
        own_hi = z * ts
        # candidate peer slots sit within one slot of the displaced position
        centre = (own_lo - peer_start) / ts
        for t in range(max(1, math.floor(centre) - 1), min(k, math.ceil(centre) + 3) + 1):
            peer_lo = peer_start + (t - 1) * ts
            peer_hi = peer_start + t * ts
            if max(own_lo, peer_lo) < min(own_hi, peer_hi):
                pairs.add((z, t))
    return pairs


def algorithm1_cases(
    timeshift: float, ts: float, bi: float, k: int
) -> set[tuple[int, int]] | None:
    """Literal switch-case classification; None outside its covered domain.

    The published rules only treat timeshift <= 0.  Their index windows are
    Cartesian products, restricted here to the slot pairs that actually
    intersect in time.  For TS < |timeshift| < BI/2 the window
    (z > K - ID, t <= ID) drops geometrically colliding pairs whenever
    ID < (K + 1) / 2; ``classify_overlap`` is the production answer.
    """
    if timeshift == 0.0:
        return {(z, z) for z in range(1, k + 1)}
    if timeshift > 0.0:
        return None
    magnitude = abs(timeshift)
    geometric = classify_overlap(timeshift, ts, bi, k)
    intrfrn_slots = magnitude / ts
    slot_id = math.ceil(intrfrn_slots)
    if magnitude < ts:
        return {(z, t) for (z, t) in geometric if z >= slot_id and t >= slot_id}
    if ts < magnitude < bi / 2.0:
        return {(z, t) for (z, t) in geometric if z > k - slot_id and t <= slot_id}
    return None


def build_timeshift_pattern(
    own,
    peers,
    k_slots: int,
    drift_bound: float = 0.0,
    rng: np.random.Generator | None = None,
) -> TimeshiftPattern:
    """Run the beacon-exchange estimate against every peer and classify.

    ``own`` and ``peers`` carry superframe_offset / beacon_interval /
    slot_length (model.Wban does).  With a positive drift bound each
    recovered shift picks up a uniform error of at most that many seconds.
    """
    pattern = TimeshiftPattern(owner=own.id)
    for peer in peers:
        if peer.id == own.id:
            continue
        true_shift = own.superframe_offset - peer.superframe_offset
        jitter = 0.0
        if drift_bound > 0.0:
            if rng is None:
                raise ValueError("drift_bound > 0 requires an rng")
            jitter = float(rng.uniform(-drift_bound, drift_bound))
        recovered = compute_timeshift(
            timestamps_for_offset(true_shift, jitter=jitter)
        )
        shift = normalize_timeshift(recovered, own.beacon_interval)
        pairs = classify_overlap(
            shift, own.slot_length, own.beacon_interval, k_slots
        )
        pattern.entries[peer.id] = PatternEntry(timeshift=shift, colliding_pairs=pairs)
    return pattern
