"""Walsh-Hadamard spreading codes and cyclic-orthogonal subsets.

Walsh matrices are built by the Sylvester/Kronecker recursion and their rows
are orthogonal at zero phase.  Cyclic orthogonality (zero periodic
cross-correlation at *every* shift) only holds for special row subsets; this
module extracts such subsets and provides the spread/despread primitives the
protocols use.  Empirically an order-2^k matrix yields exactly k + 1 cyclic
orthogonal rows (row 0 plus the power-of-two rows); see ``cowhc_capacity``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_WALSH_LOG2 = 16  # resource guard: 2^16 x 2^16 chips is already 4 GiB


class WalshSizeError(ValueError):
    """Requested Walsh matrix order exceeds the resource guard."""


class CodeCapacityError(ValueError):
    """No cyclic-orthogonal subset of the requested size exists.

    Carries ``max_achievable`` so callers can retry with a larger matrix.
    """

    def __init__(self, wanted: int, max_achievable: int, order: int):
        self.wanted = wanted
        self.max_achievable = max_achievable
        self.order = order
        super().__init__(
            f"matrix of order {order} admits at most {max_achievable} "
            f"cyclic-orthogonal codes, {wanted} requested"
        )


@dataclass(frozen=True)
class WalshMatrix:
    """Sylvester-ordered Walsh-Hadamard matrix with +/-1 chips."""

    order: int
    rows: np.ndarray  # (order, order) int8

    def row(self, index: int) -> "Code":
        return Code(chips=self.rows[index].astype(np.int8), source_row=index)


@dataclass(frozen=True)
class Code:
    """One spreading code: a +/-1 chip sequence taken from a Walsh row."""

    chips: np.ndarray
    source_row: int

    @property
    def length(self) -> int:
        return int(self.chips.shape[0])

    def is_balanced(self) -> bool:
        """True when the chips sum to zero (every row except row 0)."""
        return int(self.chips.sum()) == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Code):
            return NotImplemented
        return self.source_row == other.source_row and np.array_equal(
            self.chips, other.chips
        )

    def __hash__(self) -> int:
        return hash((self.source_row, self.chips.tobytes()))


@dataclass(frozen=True)
class CowhcSet:
    """An ordered set of codes with zero cross-correlation at all cyclic shifts."""

    codes: tuple[Code, ...]
    matrix_order: int

    @property
    def set_size(self) -> int:
        return len(self.codes)

    def to_manifest(self) -> dict:
        return {
            "matrix_order": self.matrix_order,
            "rows": [c.source_row for c in self.codes],
            "chips": [c.chips.tolist() for c in self.codes],
        }


@dataclass(frozen=True)
class SpreadSignal:
    """Chip-rate samples of one or more symbols multiplied by a code."""

    chips: np.ndarray
    symbols_carried: int
    code_used: Code


def generate_walsh(n: int) -> WalshMatrix:
    """Build the order-2^n Walsh matrix by the Kronecker recursion.

    M_1 = (1), M_2 = ((1, 1), (1, -1)), M_{2^n} = M_2 (x) M_{2^(n-1)}.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n > MAX_WALSH_LOG2:
        raise WalshSizeError(
            f"n={n} exceeds the resource guard of {MAX_WALSH_LOG2}"
        )
    m = np.array([[1]], dtype=np.int8)
    m2 = np.array([[1, 1], [1, -1]], dtype=np.int8)
    for _ in range(n):
        m = np.kron(m2, m).astype(np.int8)
    return WalshMatrix(order=2**n, rows=m)


def periodic_cross_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integer cross-correlation sum_t a[t]*b[(t+phi) mod L] for all phi."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("sequences must have equal length")
    L = a.shape[0]
    doubled = np.concatenate([b, b[:-1]])
    rolled = np.lib.stride_tricks.sliding_window_view(doubled, L)  # row phi = roll(b, -phi)
    return rolled @ a


def all_shift_orthogonal(a: np.ndarray, b: np.ndarray) -> bool:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape[0] >= 64:
        # FFT screen: correlations are integers bounded by L, so rounding the
        # float result decides exactly; verify positives with integer math.
        spec = np.fft.rfft(a) * np.conj(np.fft.rfft(b))
        corr = np.fft.irfft(spec, n=a.shape[0])
        if np.any(np.abs(corr) > 0.5):
            return False
    return bool(np.all(periodic_cross_correlation(a, b) == 0))


def extract_cowhc(matrix: WalshMatrix, wanted: int) -> CowhcSet:
    """Extract ``wanted`` rows that stay orthogonal under every cyclic shift.

    Deterministic: greedy over rows in ascending index, accepting a row iff
    its periodic cross-correlation with every accepted row is zero at all
    shifts.  If greedy falls short, an exhaustive lexicographic backtracking
    search runs before declaring a capacity shortfall.
    """
    if wanted < 1:
        raise ValueError(f"wanted must be >= 1, got {wanted}")
    rows = matrix.rows.astype(np.int64)
    order = matrix.order

    accepted = _greedy(rows, wanted)
    if len(accepted) < wanted:
        exact = _search_subset(rows, wanted)
        if exact is not None:
            accepted = exact
        else:
            best = _search_largest(rows)
            raise CodeCapacityError(wanted, len(best), order)

    codes = tuple(matrix.row(r) for r in accepted[:wanted])
    return CowhcSet(codes=codes, matrix_order=order)


def cowhc_capacity(order_log2: int) -> int:
    """Largest cyclic-orthogonal subset size found in the order-2^n matrix.

    Exhaustive branch-and-bound; meant for orders up to 2^8.
    """
    matrix = generate_walsh(order_log2)
    return len(_search_largest(matrix.rows.astype(np.int64)))


def _greedy(rows: np.ndarray, wanted: int) -> list[int]:
    """Lowest-index-first greedy, FFT-screened in batch, exact on acceptance."""
    order = rows.shape[0]
    accepted: list[int] = []
    spectra: list[np.ndarray] = []
    fft = np.fft.rfft(rows, axis=1)
    for r in range(order):
        if accepted:
            corr = np.fft.irfft(fft[r][None, :] * np.conj(np.vstack(spectra)), n=order)
            if np.any(np.abs(corr) > 0.5):
                continue
            if not all(all_shift_orthogonal(rows[r], rows[s]) for s in accepted):
                continue
        accepted.append(r)
        spectra.append(fft[r])
        if len(accepted) >= wanted:
            break
    return accepted


def cowhc_for_network(n_wbans: int, max_order_log2: int = 12) -> CowhcSet:
    """Smallest-order set serving ``n_wbans`` coexisting networks.

    Walks matrix orders upward probing with the cheap greedy search (which
    empirically attains the true capacity k + 1 at order 2^k), then extracts
    at the first sufficient order.
    """
    if n_wbans < 1:
        raise ValueError("n_wbans must be >= 1")
    last_found = 0
    for k in range(max_order_log2 + 1):
        matrix = generate_walsh(k)
        found = _greedy(matrix.rows.astype(np.int64), n_wbans)
        last_found = max(last_found, len(found))
        if len(found) >= n_wbans:
            return extract_cowhc(matrix, n_wbans)
    raise CodeCapacityError(n_wbans, last_found, 2**max_order_log2)


def _compatible(rows: np.ndarray, a: int, b: int, cache: dict) -> bool:
    key = (a, b) if a < b else (b, a)
    hit = cache.get(key)
    if hit is None:
        hit = all_shift_orthogonal(rows[a], rows[b])
        cache[key] = hit
    return hit


def _search_subset(rows: np.ndarray, wanted: int) -> list[int] | None:
    """First subset of exactly ``wanted`` rows in lexicographic order, or None."""
    order = rows.shape[0]
    cache: dict = {}

    def extend(cur: list[int], start: int) -> list[int] | None:
        if len(cur) == wanted:
            return cur
        for r in range(start, order):
            if order - r < wanted - len(cur):
                break
            if all(_compatible(rows, r, s, cache) for s in cur):
                hit = extend(cur + [r], r + 1)
                if hit is not None:
                    return hit
        return None

    return extend([], 0)


def _search_largest(rows: np.ndarray) -> list[int]:
    """Largest compatible subset, lexicographically first among maximums."""
    order = rows.shape[0]
    cache: dict = {}
    best: list[int] = []

    def extend(cur: list[int], cand: list[int]) -> None:
        nonlocal best
        if len(cur) > len(best):
            best = list(cur)
        for i, r in enumerate(cand):
            if len(cur) + len(cand) - i <= len(best):
                break
            extend(cur + [r], [s for s in cand[i + 1 :] if _compatible(rows, r, s, cache)])

    extend([], list(range(order)))
    return best


def spread(symbols, code: Code) -> SpreadSignal:
    """Expand each symbol s into L chips s * code[t]."""
    sym = np.asarray(symbols, dtype=np.float64)
    if sym.ndim != 1 or sym.size == 0:
        raise ValueError("symbols must be a non-empty 1-D sequence")
    chips = np.outer(sym, code.chips.astype(np.float64)).ravel()
    return SpreadSignal(chips=chips, symbols_carried=sym.size, code_used=code)


def despread(received, code: Code) -> np.ndarray:
    """Correlate chip windows against ``code`` and normalise by 1/L.

    A clean signal spread with the same code comes back at unit gain; any
    superposed signal whose code has zero cross-correlation with ``code`` at
    the aligned phase contributes exactly nothing.
    """
    chips = received.chips if isinstance(received, SpreadSignal) else np.asarray(
        received, dtype=np.float64
    )
    L = code.length
    if chips.ndim != 1 or chips.size == 0 or chips.size % L != 0:
        raise ValueError(
            f"chip count {chips.size} is not a positive multiple of code length {L}"
        )
    windows = chips.reshape(-1, L)
    return windows @ code.chips.astype(np.float64) / L


# spreading factor floor for assignment codes: longer codes buy spectral
# density reduction against narrowband receivers (interference ~ 1/L)
MIN_ASSIGNMENT_ORDER_LOG2 = 8


@lru_cache(maxsize=8)
def _cached_network_set(n_wbans: int, min_order_log2: int) -> CowhcSet:
    # the constant row spreads nothing (no narrowband rejection), so the
    # per-network assignment pool draws one spare code and drops it
    for k in range(min_order_log2, 17):
        matrix = generate_walsh(k)
        found = _greedy(matrix.rows.astype(np.int64), n_wbans + 1)
        if len(found) >= n_wbans + 1:
            full = extract_cowhc(matrix, n_wbans + 1)
            break
    else:
        full = cowhc_for_network(n_wbans + 1)
    balanced = tuple(c for c in full.codes if c.is_balanced())
    if len(balanced) >= n_wbans:
        return CowhcSet(codes=balanced[:n_wbans], matrix_order=full.matrix_order)
    return CowhcSet(codes=full.codes[:n_wbans], matrix_order=full.matrix_order)


def network_code_set(
    n_wbans: int, min_order_log2: int = MIN_ASSIGNMENT_ORDER_LOG2
) -> CowhcSet:
    """Cached auto-sized assignment set; deterministic, so sharing is safe."""
    return _cached_network_set(n_wbans, min_order_log2)
