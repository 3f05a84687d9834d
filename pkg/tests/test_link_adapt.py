import numpy as np
import pytest
from pydantic import ValidationError

from mimo_switch.channel import FadingRealization, draw_fading, random_topology
from mimo_switch.exceptions import DimensionError, InvariantError
from mimo_switch.link_adapt import (
    LinkChoice,
    RateTable,
    allocations,
    build_rate_table,
    credited_mdus,
    effective_ppsnr,
    mdus_per_stream,
    select_mcs,
    single_link_rate,
    single_link_streams,
)
from mimo_switch.models import DEFAULT_MCS_TABLE, BackoffConfig, SystemParams
from mimo_switch.phy import PpsnrGrid

FRAME_S = 5e-3


def grid_from_db(db):
    return PpsnrGrid(10 ** (np.asarray(db, dtype=float) / 10))

def diagonal_realization(gain_db: float, n_subcarriers: int = 64) -> FadingRealization:
    """Identity direct channels and no cross coupling, scaled to ``gain_db`` over the noise."""
    noise = SystemParams().noise_mw
    matrices = np.zeros((2, 2, n_subcarriers, 4, 4), dtype=complex)
    amplitude = np.sqrt(noise * 10 ** (gain_db / 10))
    matrices[0, 0] = amplitude * np.eye(4)
    matrices[1, 1] = amplitude * np.eye(4)
    return FadingRealization(frame_id=1, matrices=matrices)


def test_effective_ppsnr_penalizes_spread():
    grid = grid_from_db([[8.0], [12.0]])
    assert effective_ppsnr(grid, 0) == pytest.approx(9.5)
    assert effective_ppsnr(grid, 0, BackoffConfig(backoff_db=1.0)) == pytest.approx(8.5)

def test_effective_ppsnr_flat_channel():
    grid = grid_from_db(np.full((64, 2), 15.0))
    assert effective_ppsnr(grid, 1) == pytest.approx(15.0)

def test_effective_ppsnr_stream_out_of_range():
    with pytest.raises(DimensionError):
        effective_ppsnr(grid_from_db([[10.0]]), 1)

@pytest.mark.parametrize("eff_db,index", [(12.5, 4), (1.4, 0), (18.8, 7), (40.0, 7), (4.39, 0)])
def test_select_mcs(eff_db, index):
    assert select_mcs(eff_db).index == index

def test_select_mcs_below_lowest_threshold():
    assert select_mcs(0.0) is None

def test_mdus_per_stream():
    assert mdus_per_stream(DEFAULT_MCS_TABLE[0], FRAME_S) == 50
    assert mdus_per_stream(DEFAULT_MCS_TABLE[7], FRAME_S) == 500
    assert mdus_per_stream(DEFAULT_MCS_TABLE[4], FRAME_S) == 300
    assert mdus_per_stream(None, FRAME_S) == 0

def test_mdus_floor_partial_symbols():
    # 4808 us holds 1202 symbols
    assert mdus_per_stream(DEFAULT_MCS_TABLE[7], 4808e-6) == 480

def test_mdus_rejects_nonpositive_duration():
    with pytest.raises(InvariantError):
        mdus_per_stream(DEFAULT_MCS_TABLE[0], 0.0)

def test_allocations():
    allocs = allocations(4)
    assert len(allocs) == 15
    assert (0, 0) in allocs and (4, 0) in allocs and (2, 2) in allocs
    assert all(m1 + m2 <= 4 for m1, m2 in allocs)

def test_rate_table_requires_full_coverage():
    with pytest.raises(InvariantError, match="every feasible allocation"):
        RateTable.from_counts({(0, 0): (0, 0)})

def test_rate_table_rejects_credit_to_silent_link():
    counts = {a: (0, 0) for a in allocations(4)}
    counts[(0, 2)] = (10, 0)
    with pytest.raises(InvariantError, match="silent link"):
        RateTable.from_counts(counts)

def test_build_rate_table_interference_free():
    table = build_rate_table(diagonal_realization(30.0), FRAME_S)
    # identity channels, 30 dB total power split over m streams; every split clears MCS 7
    for m in range(1, 5):
        assert table.count(1, m, 0) == 500 * m
        assert table.count(2, 0, m) == 500 * m
    assert table.counts[(0, 0)] == (0, 0)
    assert table.count(2, 3, 0) == 0
    assert table.choice(1, 2, 2).mcs_indices() == (7, 7)
    assert single_link_rate(table, 1) == 2000
    assert single_link_streams(table, 2) == 4

def test_build_rate_table_backoff_lowers_mcs():
    plain = build_rate_table(diagonal_realization(13.0), FRAME_S)
    backed_off = build_rate_table(diagonal_realization(13.0), FRAME_S, BackoffConfig(backoff_db=2.0))
    assert plain.choice(1, 1, 0).mcs_indices() == (4,)
    assert backed_off.choice(1, 1, 0).mcs_indices() == (3,)

def test_single_link_streams_prefers_fewer_on_ties():
    counts = {a: (0, 0) for a in allocations(4)}
    counts[(2, 0)] = (400, 0)
    counts[(3, 0)] = (400, 0)
    counts[(0, 1)] = (0, 100)
    table = RateTable.from_counts(counts)
    assert single_link_streams(table, 1) == 2
    assert single_link_rate(table, 1) == 400
    assert single_link_streams(table, 2) == 1

def test_credited_mdus_checks_true_channel():
    mcs4 = DEFAULT_MCS_TABLE[4]
    chosen = LinkChoice(eff_db=(12.5, 12.5), mcs=(mcs4, mcs4))
    truth = LinkChoice(eff_db=(13.0, 11.0), mcs=(mcs4, DEFAULT_MCS_TABLE[3]))
    assert credited_mdus(chosen, truth, FRAME_S) == 300

def test_credited_mdus_stream_count_mismatch():
    with pytest.raises(DimensionError):
        credited_mdus(LinkChoice(eff_db=(1.0,), mcs=(None,)), LinkChoice(), FRAME_S)

def test_mdus_shorter_than_one_symbol():
    assert mdus_per_stream(DEFAULT_MCS_TABLE[7], 3e-6) == 0

def test_single_link_rate_takes_best_stream_count():
    counts = {a: (0, 0) for a in allocations(4)}
    for m, n in zip(range(1, 5), (50, 80, 90, 84)):
        counts[(m, 0)] = (n, 0)
    table = RateTable.from_counts(counts)
    assert single_link_rate(table, 1) == 90
    assert single_link_rate(table, 2) == 0

def test_select_mcs_monotone():
    picks = [select_mcs(x) for x in np.linspace(-5.0, 30.0, 3501)]
    indices = [-1 if m is None else m.index for m in picks]
    assert indices[0] == -1 and indices[-1] == 7
    assert all(b >= a for a, b in zip(indices, indices[1:]))

def mirrored(real: FadingRealization) -> FadingRealization:
    """Swap the roles of link 1 and link 2."""
    return FadingRealization(frame_id=real.frame_id, matrices=real.matrices[::-1, ::-1].copy())

def test_rate_table_symmetric_under_mirrored_links(rng):
    real = draw_fading(random_topology(rng), 1, rng)
    table = build_rate_table(real, FRAME_S)
    swapped = build_rate_table(mirrored(real), FRAME_S)
    for (m1, m2), (n1, n2) in table.counts.items():
        assert swapped.counts[(m2, m1)] == (n2, n1)

def test_interference_never_raises_count_on_flat_channels(rng):
    # with one tap every subcarrier is identical, so the variance penalty vanishes
    params = SystemParams(n_taps=1)
    for _ in range(30):
        table = build_rate_table(draw_fading(random_topology(rng, params), 1, rng, params), FRAME_S, params=params)
        for m1 in range(1, 4):
            for m2 in range(1, 5 - m1):
                assert table.count(1, m1, 0) >= table.count(1, m1, m2)
                assert table.count(2, 0, m1) >= table.count(2, m2, m1)

def test_rate_table_is_frozen(make_rate_table, rng):
    table = make_rate_table(rng)
    with pytest.raises(ValidationError):
        table.n_antennas = 2
    with pytest.raises(ValidationError):
        LinkChoice().eff_db = (1.0,)

def test_rate_table_rejects_malformed_counts():
    counts = {a: (0, 0) for a in allocations(4)}
    counts[(1, 0)] = (10,)
    with pytest.raises(ValidationError):
        RateTable.from_counts(counts)
