"""Closed-form beacon/data transmission probability model.

Derives, for N coexisting networks with identical superframe timing:
per-sensor channel occupancy, the beacon collision window and probability,
the self-consistent beacon success probability (success feeds back into how
many peers actually transmit), and the resulting data-frame success figures.
Every probability leaving this module is clamped to [0, 1]; each clamp is
reported through validity flags, never applied silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 100_000

# Artifact timing defaults (36-byte frame at 250 kb/s and companion gaps);
# configurable, not normative.
DEFAULT_T_FR = 1.152e-3
DEFAULT_T_B = 0.6e-3
DEFAULT_SIFS = 0.192e-3
DEFAULT_TS = 5e-3
DEFAULT_K = 10
DEFAULT_NFRS = 3


class FixedPointError(ArithmeticError):
    """Damped iteration failed to converge (unexpected for pr_bcoll < 1)."""


@dataclass(frozen=True)
class AnalyticParams:
    n_wbans: int = 2
    k_sensors: int = DEFAULT_K
    bi: float = 2 * DEFAULT_K * DEFAULT_TS
    ts: float = DEFAULT_TS
    t_fr: float = DEFAULT_T_FR
    t_b: float = DEFAULT_T_B
    sifs: float = DEFAULT_SIFS
    nfrs: tuple[float, ...] | float = DEFAULT_NFRS
    p_frames: tuple[float, ...] | float | None = None  # defaults to nfrs

    def __post_init__(self):
        for name in ("bi", "ts", "t_fr", "t_b", "sifs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.k_sensors * self.ts > self.bi:
            raise ValueError("K slots must fit inside the beacon interval")
        if np.any(self.nfrs_array() < 1):
            raise ValueError("nfrs must be >= 1")

    def nfrs_array(self) -> np.ndarray:
        return np.broadcast_to(
            np.asarray(self.nfrs, dtype=float), (self.k_sensors,)
        ).copy()

    def p_frames_array(self) -> np.ndarray:
        source = self.p_frames if self.p_frames is not None else self.nfrs
        return np.broadcast_to(np.asarray(source, dtype=float), (self.k_sensors,)).copy()

    def with_n(self, n_wbans: int) -> "AnalyticParams":
        return replace(self, n_wbans=n_wbans)


@dataclass
class FixedPointResult:
    p_star: float
    open_loop: float
    w_succ: float
    iterations: int


@dataclass
class AnalyticResults:
    td: np.ndarray
    t_bcoll: float
    pr_bcoll: float
    pr_bsucc_openloop: float
    pr_bsucc: float
    w_succ: float
    d_succ: float
    d_coll: float
    pr_wbansucc: float
    ntxfrs: np.ndarray
    pr_frsucc_per_sensor: np.ndarray
    validity_flags: list[str] = field(default_factory=list)


def occupancy(params: AnalyticParams) -> np.ndarray:
    """Per-sensor channel occupancy: slot length caps the frame train."""
    nfrs = params.nfrs_array()
    busy = nfrs * params.t_fr + (nfrs - 1) * params.sifs
    return np.minimum(params.ts, busy)


def beacon_collision_probability(
    params: AnalyticParams, flags: list[str] | None = None
) -> tuple[float, float]:
    """Vulnerable window against one peer superframe and its probability.

    The window sums the peer beacon (twice the beacon airtime, since either
    transmission may lead) and, per slot, the occupancy plus the beacon
    airtime.  Values beyond the beacon interval mean the model left its
    validity region; the probability is clamped and flagged.
    """
    td = occupancy(params)
    t_bcoll = 2 * params.t_b + float(np.sum(td + params.t_b))
    pr = t_bcoll / params.bi
    if pr > 1.0:
        pr = 1.0
        if flags is not None:
            flags.append("pr_bcoll_clamped")
    return t_bcoll, pr


def beacon_success_fixed_point(pr_bcoll: float, n: int) -> FixedPointResult:
    """Self-consistent beacon success probability.

    Solves p = (1 - c)^((N-1) p) by damped iteration from p = 1: only peers
    whose own beacons succeeded occupy the channel, so the effective number
    of interfering networks is (N-1) p rather than N-1.
    """
    if not 0.0 <= pr_bcoll < 1.0:
        raise ValueError(f"pr_bcoll must be in [0, 1), got {pr_bcoll}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    open_loop = (1.0 - pr_bcoll) ** (n - 1)
    if pr_bcoll == 0.0 or n == 1:
        return FixedPointResult(p_star=1.0, open_loop=open_loop, w_succ=float(n - 1), iterations=0)
    base = 1.0 - pr_bcoll
    p = 1.0
    for iteration in range(1, FIXED_POINT_MAX_ITER + 1):
        nxt = 0.5 * (p + base ** ((n - 1) * p))
        if abs(nxt - p) < FIXED_POINT_TOL:
            return FixedPointResult(
                p_star=nxt,
                open_loop=open_loop,
                w_succ=(n - 1) * nxt,
                iterations=iteration,
            )
        p = nxt
    raise FixedPointError(
        f"no convergence after {FIXED_POINT_MAX_ITER} iterations (c={pr_bcoll}, n={n})"
    )


def data_success(
    params: AnalyticParams,
    pr_bcoll: float,
    w_succ: float,
    flags: list[str] | None = None,
) -> tuple[float, float, float, np.ndarray, np.ndarray]:
    """Collision-free duration, per-network success, and frame success rates."""
    p_frames = params.p_frames_array()
    if np.any(p_frames <= 0):
        raise ValueError("p_frames must be > 0")
    n = params.n_wbans
    pr_bsucc = w_succ / (n - 1) if n > 1 else 1.0

    td = occupancy(params)
    d_succ = params.bi * (1.0 - pr_bcoll) ** w_succ
    d_coll = float(np.sum(td + params.t_fr))
    pr_wbansucc = (d_succ - d_coll) / d_succ
    if pr_wbansucc < 0.0:
        pr_wbansucc = 0.0
        if flags is not None:
            flags.append("pr_wbansucc_floored")

    ntxfrs = np.minimum(
        math.floor(params.ts / (params.t_fr + params.sifs)), params.nfrs_array()
    ).astype(int)
    pr_frsucc = pr_bsucc * ntxfrs * pr_wbansucc**w_succ / p_frames
    if np.any(pr_frsucc > 1.0):
        pr_frsucc = np.minimum(pr_frsucc, 1.0)
        if flags is not None:
            flags.append("pr_frsucc_clamped")
    return d_succ, d_coll, pr_wbansucc, ntxfrs, pr_frsucc


def evaluate(params: AnalyticParams) -> AnalyticResults:
    """Run the whole chain for one parameter set."""
    flags: list[str] = []
    td = occupancy(params)
    t_bcoll, pr_bcoll = beacon_collision_probability(params, flags)
    if pr_bcoll >= 1.0:
        fp = FixedPointResult(p_star=0.0, open_loop=0.0, w_succ=0.0, iterations=0)
        flags.append("pr_bcoll_saturated")
    else:
        fp = beacon_success_fixed_point(pr_bcoll, params.n_wbans)
    d_succ, d_coll, pr_wbansucc, ntxfrs, pr_frsucc = data_success(
        params, pr_bcoll, fp.w_succ, flags
    )
    return AnalyticResults(
        td=td,
        t_bcoll=t_bcoll,
        pr_bcoll=pr_bcoll,
        pr_bsucc_openloop=fp.open_loop,
        pr_bsucc=fp.p_star,
        w_succ=fp.w_succ,
        d_succ=d_succ,
        d_coll=d_coll,
        pr_wbansucc=pr_wbansucc,
        ntxfrs=ntxfrs,
        pr_frsucc_per_sensor=pr_frsucc,
        validity_flags=flags,
    )


def frame_success_vs_n(
    params: AnalyticParams, n_values
) -> list[dict]:
    """Upper-bound frame success curve assuming every beacon is received.

    Occupancy here uses the buffered-frame count (no slot cap), the
    collision window adds one frame airtime per slot, and coexisting with
    N-1 networks exponentiates the single-peer success probability.
    """
    p_frames = params.p_frames_array()
    td = p_frames * params.t_fr + (p_frames - 1) * params.sifs
    d_coll = float(np.sum(td + params.t_fr))
    rows = []
    for n in n_values:
        flags: list[str] = []
        pr_single = (params.bi - d_coll) / params.bi
        if pr_single < 0.0:
            pr_single = 0.0
            flags.append("pr_frsucc_single_floored")
        rows.append(
            {
                "n_wbans": int(n),
                "d_coll": d_coll,
                "pr_frsucc_single": pr_single,
                "pr_frsucc": pr_single ** (n - 1),
                "validity_flags": flags,
            }
        )
    return rows


def beacon_curve(params: AnalyticParams, n_values) -> list[dict]:
    """Beacon collision/success figures per network count, for CSV output."""
    rows = []
    for n in n_values:
        p = params.with_n(int(n))
        res = evaluate(p)
        rows.append(
            {
                "n_wbans": int(n),
                "pr_bcoll": res.pr_bcoll,
                "pr_bsucc_openloop": res.pr_bsucc_openloop,
                "pr_bsucc_fixedpoint": res.pr_bsucc,
                "pr_frsucc": float(np.mean(res.pr_frsucc_per_sensor)),
                "validity_flags": list(res.validity_flags),
            }
        )
    return rows
