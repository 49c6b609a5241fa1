"""Interference list/set/SIL formation tests, including the golden scenario."""

import numpy as np
import pytest

from wbansim.dtrc import (
    PatternEntry,
    TimeshiftPattern,
    build_timeshift_pattern,
    classify_overlap,
)
from wbansim.interference import (
    IncompleteBroadcastError,
    build_all_sils,
    build_interference_list,
    build_interference_set,
    build_sil,
    pairwise_intersection,
)
from wbansim.model import ChannelModel, PowerTable, build_power_table
from wbansim.scenarios import (
    GOLDEN_INTERFERENCE_LISTS,
    GOLDEN_INTERFERENCE_SETS,
    GOLDEN_SILS_WBAN2,
    GOLDEN_THETA_DB,
    random_scenario,
    three_wban_example,
)

CH = ChannelModel()


def golden_tables():
    net = three_wban_example()
    return net, {w.id: build_power_table(w, net, CH) for w in net.wbans}


def golden_lists_and_sets():
    net, tables = golden_tables()
    lists = {
        w.id: build_interference_list(tables[w.id], GOLDEN_THETA_DB)
        for w in net.wbans
    }
    sets = {
        w.id: build_interference_set(lists[w.id], lists, expected_wbans=[1, 2, 3])
        for w in net.wbans
    }
    return net, lists, sets


class TestInterferenceList:
    def test_huge_theta_admits_every_foreign_sensor(self):
        _, tables = golden_tables()
        got = build_interference_list(tables[1], theta=1e6)
        assert got.members == {
            key for key in tables[1].entries if key[0] != 1
        }

    def test_tiny_theta_admits_none(self):
        _, tables = golden_tables()
        got = build_interference_list(tables[1], theta=-1e6)
        assert got.members == set()

    def test_golden_lists(self):
        _, lists, _ = golden_lists_and_sets()
        for wid, want in GOLDEN_INTERFERENCE_LISTS.items():
            assert lists[wid].members == want, wid

    def test_no_own_sensors_ever(self):
        _, lists, _ = golden_lists_and_sets()
        for wid, lst in lists.items():
            assert all(key[0] != wid for key in lst.members)

    def test_theta_monotonicity(self):
        table = PowerTable(
            owner=1,
            entries={(1, 1): -45.0, (2, 1): -52.0, (2, 2): -60.0, (3, 1): -70.0},
            rho_min=-45.0,
        )
        previous = set()
        for theta in (0.0, 6.0, 12.0, 20.0, 30.0):
            members = build_interference_list(table, theta).members
            assert previous <= members
            previous = members


class TestInterferenceSet:
    def test_all_empty_lists_give_empty_set(self):
        _, lists, _ = golden_lists_and_sets()
        empty = {
            wid: build_interference_list(
                PowerTable(owner=wid, entries={(wid, 1): -40.0}, rho_min=-40.0),
                theta=-1e6,
            )
            for wid in (1, 2, 3)
        }
        got = build_interference_set(empty[1], empty)
        assert got.members == set()

    def test_golden_sets(self):
        _, _, sets = golden_lists_and_sets()
        for wid, want in GOLDEN_INTERFERENCE_SETS.items():
            assert sets[wid].members == want, wid

    def test_missing_peer_list_raises(self):
        _, lists, _ = golden_lists_and_sets()
        partial = {1: lists[1], 2: lists[2]}
        with pytest.raises(IncompleteBroadcastError):
            build_interference_set(lists[1], partial, expected_wbans=[1, 2, 3])

    def test_intersection_symmetric(self):
        _, _, sets = golden_lists_and_sets()
        for i in (1, 2, 3):
            for l in (1, 2, 3):
                assert pairwise_intersection(sets[i], sets[l]) == (
                    pairwise_intersection(sets[l], sets[i])
                )


class TestSilFormation:
    def test_golden_sils_for_wban_two(self):
        net, _, sets = golden_lists_and_sets()
        wban2 = net.wban_by_id(2)
        pattern = build_timeshift_pattern(wban2, net.wbans, k_slots=4)
        sils = build_all_sils(wban2, net.wbans, sets, pattern)
        got = {key: sil.members for key, sil in sils.items()}
        assert got == GOLDEN_SILS_WBAN2

    def test_absent_from_intersection_contributes_nothing(self):
        net, _, sets = golden_lists_and_sets()
        wban2 = net.wban_by_id(2)
        pattern = build_timeshift_pattern(wban2, net.wbans, k_slots=4)
        # slot 2 of network 2 collides with slot 2 everywhere, but neither
        # endpoint of any candidate pair is in an intersection
        sensor = next(s for s in wban2.sensors if s.sensor_id == 2)
        for peer in net.wbans:
            if peer.id == 2:
                continue
            got = build_sil(sensor, peer, sets[2], sets[peer.id], pattern)
            assert got == set()

    def test_slot_non_overlap_contributes_nothing(self):
        net, _, sets = golden_lists_and_sets()
        wban2 = net.wban_by_id(2)
        # peer 1 shifted exactly half a beacon interval: active periods are
        # complementary, so the overlap pattern is empty even though both
        # indicator functions hold for the (2,4)/(1,4) pair
        bi, ts = wban2.beacon_interval, wban2.slot_length
        pattern = TimeshiftPattern(owner=2)
        pattern.entries[1] = PatternEntry(
            timeshift=-bi / 2,
            colliding_pairs=classify_overlap(-bi / 2, ts, bi, 4),
        )
        assert pattern.entries[1].colliding_pairs == set()
        sensor = next(s for s in wban2.sensors if s.sensor_id == 4)
        got = build_sil(sensor, net.wban_by_id(1), sets[2], sets[1], pattern)
        assert got == set()

    def test_or_membership_soundness(self):
        """Every SIL member pairs with its owner such that at least one of the
        two sensors lies in the pairwise intersection, and their slots collide."""
        rng = np.random.default_rng(33)
        for trial in range(10):
            net = random_scenario(4, 5, rng)
            tables = {w.id: build_power_table(w, net, CH) for w in net.wbans}
            lists = {w.id: build_interference_list(tables[w.id], 12.0) for w in net.wbans}
            sets = {w.id: build_interference_set(lists[w.id], lists) for w in net.wbans}
            for w in net.wbans:
                pattern = build_timeshift_pattern(w, net.wbans, k_slots=5)
                sils = build_all_sils(w, net.wbans, sets, pattern)
                slot_of = {
                    s.key: s.assigned_slot
                    for peer in net.wbans
                    for s in peer.sensors
                }
                for key, sil in sils.items():
                    for member in sil.members:
                        common = pairwise_intersection(sets[w.id], sets[member[0]])
                        assert key in common or member in common
                        entry = pattern.entries[member[0]]
                        assert (slot_of[key], slot_of[member]) in entry.colliding_pairs
