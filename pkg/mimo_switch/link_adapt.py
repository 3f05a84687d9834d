"""Effective PPSNR, MCS selection, MDU aggregation and per-allocation rate tables."""

import math
from collections.abc import Mapping, Sequence
from typing_extensions import Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .channel import FadingRealization
from .exceptions import DimensionError, InvariantError
from .models import DEFAULT_MCS_TABLE, BackoffConfig, McsEntry, SystemParams
from .phy import PpsnrGrid, mmse_ppsnr

DEFAULT_SYSTEM = SystemParams()
NO_BACKOFF = BackoffConfig()

# absorbs float error in duration / symbol-time ratios such as 5 ms / 4 us
_FLOOR_EPS = 1e-9


def effective_ppsnr(
    grid: PpsnrGrid,
    stream: int,
    backoff: BackoffConfig = NO_BACKOFF,
    alpha: float = 0.125,
) -> float:
    if not 0 <= stream < grid.n_streams:
        raise DimensionError(f"stream {stream} out of range for {grid.n_streams} streams")
    db = grid.db()[:, stream]
    # population variance over subcarriers
    return float(db.mean() - alpha * db.var() - backoff.backoff_db)


def select_mcs(eff_db: float, table: Sequence[McsEntry] = DEFAULT_MCS_TABLE) -> McsEntry | None:
    chosen = None
    for entry in table:
        if entry.threshold_db <= eff_db:
            chosen = entry
    return chosen


def mdus_per_stream(
    mcs: McsEntry | None,
    payload_duration_s: float,
    params: SystemParams = DEFAULT_SYSTEM,
) -> int:
    if mcs is None:
        return 0
    if payload_duration_s <= 0:
        raise InvariantError(f"payload duration must be positive, got {payload_duration_s}")
    n_symbols = math.floor(payload_duration_s / params.symbol_s + _FLOOR_EPS)
    bits = n_symbols * params.n_subcarriers * mcs.bits_per_symbol
    return math.floor(bits / (8 * params.mdu_bytes) + _FLOOR_EPS)


class LinkChoice(BaseModel):
    """Per-stream effective PPSNR and the MCS picked from it for one link."""

    model_config = ConfigDict(frozen=True)

    eff_db: tuple[float, ...] = ()
    mcs: tuple[McsEntry | None, ...] = ()

    def mcs_indices(self) -> tuple[int | None, ...]:
        return tuple(None if m is None else m.index for m in self.mcs)


def allocations(n_antennas: int) -> list[tuple[int, int]]:
    """Every (m1, m2) with m1, m2 >= 0 and m1 + m2 <= N_A."""
    return [(m1, m2) for m1 in range(n_antennas + 1) for m2 in range(n_antennas + 1 - m1)]


class RateTable(BaseModel):
    """MDU counts of both links for every stream allocation.

    Keys are always ``(m1, m2)``: link 1 streams first. ``choices`` holds
    the MCS decisions behind the counts and is empty for tables built
    directly from counts.
    """

    model_config = ConfigDict(frozen=True)

    n_antennas: int = Field(ge=1)
    counts: dict[tuple[int, int], tuple[int, int]]
    choices: dict[tuple[int, int], tuple[LinkChoice, LinkChoice]] = {}

    @model_validator(mode="after")
    def _check_counts(self) -> Self:
        expected = set(allocations(self.n_antennas))
        if set(self.counts) != expected:
            raise InvariantError("rate table must cover every feasible allocation")
        for (m1, m2), (n1, n2) in self.counts.items():
            if n1 < 0 or n2 < 0:
                raise InvariantError(f"negative MDU count at ({m1}, {m2})")
            if (m1 == 0 and n1 != 0) or (m2 == 0 and n2 != 0):
                raise InvariantError(f"silent link credited with MDUs at ({m1}, {m2})")
        return self

    @classmethod
    def from_counts(cls, counts: Mapping[tuple[int, int], tuple[int, int]], n_antennas: int = 4) -> "RateTable":
        return cls(n_antennas=n_antennas, counts=dict(counts))

    def count(self, link: int, m1: int, m2: int) -> int:
        return self.counts[(m1, m2)][link - 1]

    def choice(self, link: int, m1: int, m2: int) -> LinkChoice:
        if not self.choices:
            return LinkChoice()
        return self.choices[(m1, m2)][link - 1]


def link_choice(
    channels: FadingRealization,
    link: int,
    m_own: int,
    m_other: int,
    backoff: BackoffConfig = NO_BACKOFF,
    params: SystemParams = DEFAULT_SYSTEM,
    mcs_table: Sequence[McsEntry] = DEFAULT_MCS_TABLE,
) -> LinkChoice:
    if m_own == 0:
        return LinkChoice()
    other = 2 if link == 1 else 1
    grid = mmse_ppsnr(
        channels.pair(link, link),
        channels.pair(link, other) if m_other else None,
        m_own,
        m_other,
        params.noise_mw,
    )
    effs = tuple(effective_ppsnr(grid, s, backoff, params.alpha) for s in range(m_own))
    return LinkChoice(eff_db=effs, mcs=tuple(select_mcs(e, mcs_table) for e in effs))


def build_rate_table(
    channels: FadingRealization,
    payload_duration_s: float,
    backoff: BackoffConfig = NO_BACKOFF,
    params: SystemParams = DEFAULT_SYSTEM,
    mcs_table: Sequence[McsEntry] = DEFAULT_MCS_TABLE,
) -> RateTable:
    counts: dict[tuple[int, int], tuple[int, int]] = {}
    choices: dict[tuple[int, int], tuple[LinkChoice, LinkChoice]] = {}
    for m1, m2 in allocations(channels.n_antennas):
        c1 = link_choice(channels, 1, m1, m2, backoff, params, mcs_table)
        c2 = link_choice(channels, 2, m2, m1, backoff, params, mcs_table)
        choices[(m1, m2)] = (c1, c2)
        counts[(m1, m2)] = (
            sum(mdus_per_stream(m, payload_duration_s, params) for m in c1.mcs),
            sum(mdus_per_stream(m, payload_duration_s, params) for m in c2.mcs),
        )
    return RateTable(n_antennas=channels.n_antennas, counts=counts, choices=choices)


def single_link_streams(table: RateTable, link: int) -> int:
    """Stream count behind the link's best interference-free rate (smallest on ties)."""
    return max(range(1, table.n_antennas + 1), key=lambda m: (_solo_count(table, link, m), -m))


def single_link_rate(table: RateTable, link: int) -> int:
    return max(_solo_count(table, link, m) for m in range(1, table.n_antennas + 1))


def _solo_count(table: RateTable, link: int, m: int) -> int:
    return table.count(1, m, 0) if link == 1 else table.count(2, 0, m)


def credited_mdus(
    chosen: LinkChoice,
    truth: LinkChoice,
    payload_duration_s: float,
    params: SystemParams = DEFAULT_SYSTEM,
) -> int:
    """MDUs delivered when streams use ``chosen`` MCSes over the true channel.

    A stream's MDUs count only if its true effective PPSNR reaches the
    threshold of the MCS it was sent with.
    """
    if len(chosen.mcs) != len(truth.eff_db):
        raise DimensionError("chosen and true stream counts differ")
    return sum(
        mdus_per_stream(mcs, payload_duration_s, params)
        for mcs, true_db in zip(chosen.mcs, truth.eff_db)
        if mcs is not None and true_db >= mcs.threshold_db
    )
