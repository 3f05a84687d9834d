"""MAC decision procedures and the contention/handshaking timing model.

Every planner takes one RateTable per frame and returns ``(F1, F2)``
plans. Allocations are ``(m1, m2)`` stream counts; the silent allocation
``(0, 0)`` is never a candidate since each frame must carry traffic.
Equal-sum candidates are ranked by the larger per-link minimum, then by
fewer total streams, then by the lexicographically smaller allocation.
"""

from collections.abc import Iterable

import numpy as np
from loguru import logger

from .exceptions import ConfigurationError, InvariantError
from .link_adapt import RateTable, allocations, single_link_rate, single_link_streams
from .models import Frame, FramePlan, Mode, Scheme, StreamConfig, TimingModel

Allocation = tuple[int, int]
FramePair = tuple[FramePlan, FramePlan]
TablePair = tuple[RateTable, RateTable]

CONTROL_SEQUENCE: dict[Scheme, tuple[str, ...]] = {
    "single": ("RTS", "CTS", "PAYLOAD", "ACK"),
    "concurrent": ("RTS", "RTS", "CTS", "DTS", "PAYLOAD", "ACK", "ACK"),
}


def candidate_allocations(table: RateTable) -> list[Allocation]:
    return [a for a in allocations(table.n_antennas) if a != (0, 0)]


def _rank(n1: int, n2: int, streams: Iterable[int]) -> tuple:
    streams = tuple(streams)
    return (n1 + n2, min(n1, n2), -sum(streams), tuple(-m for m in streams))


def best_allocation(table: RateTable, candidates: Iterable[Allocation]) -> Allocation:
    return max(candidates, key=lambda a: _rank(*table.counts[a], a))


def make_plan(frame: Frame, table: RateTable, alloc: Allocation, handshake: Scheme | None = None) -> FramePlan:
    m1, m2 = alloc
    scheme: Scheme = "concurrent" if m1 and m2 else "single"
    return FramePlan(
        frame=frame,
        scheme=scheme,
        handshake=handshake or scheme,
        config=StreamConfig(
            m1=m1,
            m2=m2,
            mcs1=table.choice(1, m1, m2).mcs_indices(),
            mcs2=table.choice(2, m1, m2).mcs_indices(),
        ),
        mdus=table.counts[alloc],
    )


def _default_single(tables: TablePair) -> FramePair:
    t1, t2 = tables
    return (
        make_plan("F1", t1, (single_link_streams(t1, 1), 0)),
        make_plan("F2", t2, (0, single_link_streams(t2, 2))),
    )


# --- Reference MACs ---

def plan_single_link_mac(tables: TablePair) -> FramePair:
    """Round-robin: link 1 owns F1, link 2 owns F2, each with its best stream count."""
    return _default_single(tables)


def plan_mima_mac(tables: TablePair) -> FramePair:
    t1, t2 = tables
    if t1.n_antennas % 2:
        raise ConfigurationError(f"MIMA needs an even antenna count, got {t1.n_antennas}")
    half = t1.n_antennas // 2
    return (
        make_plan("F1", t1, (half, half), "concurrent"),
        make_plan("F2", t2, (half, half), "concurrent"),
    )


def plan_mst_mac(tables: TablePair) -> FramePair:
    t1, t2 = tables
    return (
        make_plan("F1", t1, best_allocation(t1, candidate_allocations(t1))),
        make_plan("F2", t2, best_allocation(t2, candidate_allocations(t2))),
    )


# --- Adaptive switching ---

def plan_adaptive_ideal(tables: TablePair) -> FramePair:
    """Non-causal switching over both frames at once.

    Maximizes the two-frame sum while each link keeps at least the rate it
    would get from its own single-link frame.
    """
    t1, t2 = tables
    sl1 = single_link_rate(t1, 1)
    sl2 = single_link_rate(t2, 2)

    best: tuple[Allocation, Allocation] | None = None
    best_rank = None
    for a in candidate_allocations(t1):
        for b in candidate_allocations(t2):
            n1 = t1.count(1, *a) + t2.count(1, *b)
            n2 = t1.count(2, *a) + t2.count(2, *b)
            if n1 < sl1 or n2 < sl2:
                continue
            rank = _rank(n1, n2, (*a, *b))
            if best_rank is None or rank > best_rank:
                best, best_rank = (a, b), rank

    if best is None:
        logger.debug("No allocation pair meets both single-link rates, using default single-link plan")
        return _default_single(tables)
    return make_plan("F1", t1, best[0]), make_plan("F2", t2, best[1])


def plan_adaptive_practical_f1(table_f1: RateTable) -> FramePlan:
    """Causal F1 decision using F1's (estimated) table only."""
    t = table_f1
    sl1 = single_link_rate(t, 1)
    sl2 = single_link_rate(t, 2)
    feasible = [
        a for a in candidate_allocations(t)
        if 2 * t.count(1, *a) >= sl1 and 2 * t.count(2, *a) >= sl2
    ]
    if feasible:
        m1, m2 = best_allocation(t, feasible)
        if m1 > 0 and m2 > 0:
            return make_plan("F1", t, (m1, m2), "concurrent")
    return make_plan("F1", t, (single_link_streams(t, 1), 0))


def single_link_ratios(table: RateTable, alloc: Allocation, sl1: int, sl2: int) -> tuple[float, float]:
    """Each link's doubled frame rate over its single-link rate (1 when that rate is 0)."""
    r1 = 2 * table.count(1, *alloc) / sl1 if sl1 else 1.0
    r2 = 2 * table.count(2, *alloc) / sl2 if sl2 else 1.0
    return r1, r2


def max_single_link_ratio(table: RateTable) -> float:
    sl1 = single_link_rate(table, 1)
    sl2 = single_link_rate(table, 2)
    return min(1.0, max(min(single_link_ratios(table, a, sl1, sl2)) for a in candidate_allocations(table)))


def plan_adaptive_practical_f2(table_f2: RateTable) -> FramePlan:
    """F2 configuration after a concurrent F1: keep the largest guaranteeable share of single-link rates."""
    t = table_f2
    sl1 = single_link_rate(t, 1)
    sl2 = single_link_rate(t, 2)
    r_max = max_single_link_ratio(t)
    feasible = [
        a for a in candidate_allocations(t)
        if min(single_link_ratios(t, a, sl1, sl2)) >= r_max
    ]
    if not feasible:
        raise InvariantError(f"no allocation reaches the maximum single-link ratio {r_max}")
    alloc = best_allocation(t, feasible)
    if min(single_link_ratios(t, alloc, sl1, sl2)) < r_max:
        raise InvariantError("chosen F2 allocation violates the single-link ratio guarantee")
    return make_plan("F2", t, alloc, "concurrent")


def plan_adaptive_practical(tables: TablePair) -> FramePair:
    t1, t2 = tables
    f1 = plan_adaptive_practical_f1(t1)
    if f1.scheme == "concurrent":
        return f1, plan_adaptive_practical_f2(t2)
    return f1, make_plan("F2", t2, (0, single_link_streams(t2, 2)))


# --- Contention and handshaking ---

def packet_duration_us(packet: str, timing: TimingModel) -> float:
    durations = {
        "RTS": timing.rts_us,
        "CTS": timing.cts_us,
        "DTS": timing.dts_us,
        "ACK": timing.ack_us,
    }
    return durations[packet]


def overhead_us(scheme: Scheme, timing: TimingModel) -> float:
    """Control packets plus one inter-packet gap between consecutive ones."""
    control = [p for p in CONTROL_SEQUENCE[scheme] if p != "PAYLOAD"]
    return sum(packet_duration_us(p, timing) for p in control) + (len(control) - 1) * timing.gap_us


def draw_backoff_slots(timing: TimingModel, rng: np.random.Generator) -> int:
    return int(rng.integers(0, timing.cw_min + 1))


def mean_backoff_slots(timing: TimingModel) -> float:
    return timing.cw_min / 2


def payload_duration(scheme: Scheme, timing: TimingModel, mode: Mode, backoff_slots: float = 0) -> float:
    if mode == "ideal":
        return timing.frame_us / 1e6
    payload_us = timing.frame_us - backoff_slots * timing.slot_us - overhead_us(scheme, timing)
    if payload_us <= 0:
        raise InvariantError(
            f"{scheme} handshake with N_T={timing.n_training} leaves no payload time ({payload_us:.1f} us)"
        )
    return payload_us / 1e6


def handshake_efficiency(scheme: Scheme, timing: TimingModel, backoff_slots: float = 0) -> float:
    return payload_duration(scheme, timing, "practical", backoff_slots) / (timing.frame_us / 1e6)
