"""Walsh matrix, cyclic-orthogonal subset, and spread/despread tests."""

import itertools

import numpy as np
import pytest

from wbansim.codes import (
    Code,
    CodeCapacityError,
    CowhcSet,
    WalshSizeError,
    all_shift_orthogonal,
    cowhc_capacity,
    cowhc_for_network,
    despread,
    extract_cowhc,
    generate_walsh,
    network_code_set,
    periodic_cross_correlation,
    spread,
)

M4_BY_HAND = np.array(
    [
        [1, 1, 1, 1],
        [1, -1, 1, -1],
        [1, 1, -1, -1],
        [1, -1, -1, 1],
    ]
)


class TestGenerateWalsh:
    def test_order_one(self):
        assert generate_walsh(0).rows.tolist() == [[1]]

    def test_order_two(self):
        assert generate_walsh(1).rows.tolist() == [[1, 1], [1, -1]]

    def test_order_four_matches_hand_kronecker(self):
        assert np.array_equal(generate_walsh(2).rows, M4_BY_HAND)

    @pytest.mark.parametrize("n", range(0, 9))
    def test_rows_orthogonal_exhaustive(self, n):
        m = generate_walsh(n).rows.astype(np.int64)
        gram = m @ m.T
        assert np.array_equal(gram, np.eye(2**n, dtype=np.int64) * 2**n)

    def test_row_zero_all_ones(self):
        for n in range(0, 6):
            assert np.all(generate_walsh(n).rows[0] == 1)

    def test_resource_guard(self):
        with pytest.raises(WalshSizeError):
            generate_walsh(17)
        with pytest.raises(ValueError):
            generate_walsh(-1)


def brute_force_all_shift_orthogonal(a, b):
    L = len(a)
    return all(
        sum(a[t] * b[(t + phi) % L] for t in range(L)) == 0 for phi in range(L)
    )


class TestExtractCowhc:
    def test_m2_pair_zero_at_both_shifts(self):
        got = extract_cowhc(generate_walsh(1), 2)
        a, b = got.codes[0].chips, got.codes[1].chips
        # shift 0: 1*1 + 1*(-1) = 0; shift 1: 1*(-1) + 1*1 = 0
        assert list(a) == [1, 1] and list(b) == [1, -1]
        assert periodic_cross_correlation(a, b).tolist() == [0, 0]

    def test_singleton_is_vacuous(self):
        got = extract_cowhc(generate_walsh(3), 1)
        assert got.set_size == 1

    def test_m4_wanted_four_capacity_error(self):
        # oracle: the single C(4,4) subset fails the all-shift check
        rows = generate_walsh(2).rows
        for subset in itertools.combinations(range(4), 4):
            assert not all(
                brute_force_all_shift_orthogonal(rows[a], rows[b])
                for a, b in itertools.combinations(subset, 2)
            )
        with pytest.raises(CodeCapacityError) as err:
            extract_cowhc(generate_walsh(2), 4)
        assert err.value.max_achievable == 3

    @pytest.mark.parametrize("n", range(1, 7))
    def test_extracted_sets_all_shift_orthogonal(self, n):
        got = extract_cowhc(generate_walsh(n), n + 1)
        for a, b in itertools.combinations(got.codes, 2):
            assert np.all(periodic_cross_correlation(a.chips, b.chips) == 0)

    def test_deterministic(self):
        m = generate_walsh(4)
        first = extract_cowhc(m, 5)
        second = extract_cowhc(m, 5)
        assert [c.source_row for c in first.codes] == [
            c.source_row for c in second.codes
        ]

    @pytest.mark.parametrize("n,expected", [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)])
    def test_capacity_is_log2_plus_one(self, n, expected):
        assert cowhc_capacity(n) == expected

    def test_auto_sizing_picks_smallest_sufficient_order(self):
        got = cowhc_for_network(4)
        assert got.matrix_order == 8  # capacity 4 first appears at order 8
        assert got.set_size == 4

    def test_network_set_skips_constant_row(self):
        got = network_code_set(3)
        assert all(c.is_balanced() for c in got.codes)
        assert got.set_size == 3


class TestSpreadDespread:
    def make_code(self, chips):
        return Code(chips=np.array(chips, dtype=np.int8), source_row=-1)

    def test_unit_symbol(self):
        assert spread([1.0], self.make_code([1, -1])).chips.tolist() == [1.0, -1.0]

    def test_zero_symbols(self):
        assert spread([0.0, 0.0], self.make_code([1, 1])).chips.tolist() == [0, 0, 0, 0]

    def test_per_symbol_expansion(self):
        got = spread([2.0, -1.0], self.make_code([1, 1]))
        assert got.chips.tolist() == [2.0, 2.0, -1.0, -1.0]

    def test_empty_symbols_rejected(self):
        with pytest.raises(ValueError):
            spread([], self.make_code([1, -1]))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            despread(np.ones(5), self.make_code([1, -1]))

    def test_round_trip_exact(self):
        rng = np.random.default_rng(7)
        matrix = generate_walsh(4)
        for row in (0, 3, 7, 15):
            code = matrix.row(row)
            symbols = rng.integers(-5, 6, size=9).astype(float)
            assert despread(spread(symbols, code), code).tolist() == symbols.tolist()

    def test_single_orthogonal_interferer_rejected_at_aligned_phase(self):
        cowhc = extract_cowhc(generate_walsh(2), 3)
        w_i, w_j = cowhc.codes[1], cowhc.codes[2]
        mixed = spread([3.0], w_i).chips + spread([-2.0], w_j).chips
        assert despread(mixed, w_i).tolist() == [3.0]

    def test_full_superposition_any_offsets_recovers_exactly(self):
        """Interferers carry constant symbols, as in the one-slot superposition."""
        cowhc = extract_cowhc(generate_walsh(3), 4)
        own = cowhc.codes[1]
        L = own.length
        rng = np.random.default_rng(17)
        symbols = rng.integers(-4, 5, size=6).astype(float)
        clean = spread(symbols, own).chips
        for trial in range(25):
            total = clean.copy()
            for j, interferer in enumerate(c for c in cowhc.codes if c is not own):
                phi = int(rng.integers(0, L))
                amplitude = float(rng.integers(-3, 4))
                shifted = np.roll(interferer.chips, phi).astype(float)
                total += amplitude * np.tile(shifted, len(symbols))
            assert despread(total, own).tolist() == symbols.tolist()

    def test_interferer_at_every_single_offset(self):
        cowhc = extract_cowhc(generate_walsh(3), 4)
        own, other = cowhc.codes[1], cowhc.codes[3]
        L = own.length
        clean = spread([2.0, -1.0, 4.0], own).chips
        for phi in range(L):
            noisy = clean + 5.0 * np.tile(np.roll(other.chips, phi), 3)
            assert despread(noisy, own).tolist() == [2.0, -1.0, 4.0]


class TestHelpers:
    def test_periodic_cross_correlation_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            L = int(rng.choice([4, 8, 16]))
            a = rng.choice([-1, 1], size=L)
            b = rng.choice([-1, 1], size=L)
            got = periodic_cross_correlation(a, b)
            want = [
                sum(int(a[t]) * int(b[(t + phi) % L]) for t in range(L))
                for phi in range(L)
            ]
            assert got.tolist() == want

    def test_all_shift_orthogonal_agrees_with_brute_force_large(self):
        rows = generate_walsh(6).rows
        rng = np.random.default_rng(5)
        for _ in range(30):
            i, j = rng.integers(0, 64, size=2)
            if i == j:
                continue
            assert all_shift_orthogonal(rows[i], rows[j]) == (
                brute_force_all_shift_orthogonal(rows[i].tolist(), rows[j].tolist())
            )

    def test_cowhc_manifest_round_trip(self):
        got = extract_cowhc(generate_walsh(2), 3)
        manifest = got.to_manifest()
        assert manifest["matrix_order"] == 4
        assert manifest["rows"] == [0, 1, 2]
        assert isinstance(got, CowhcSet)
