import pytest
from pydantic import ValidationError

from mimo_switch.models import (
    DEFAULT_MCS_TABLE,
    AppConfig,
    EstimationConfig,
    FramePlan,
    McsEntry,
    RunConfig,
    StreamConfig,
    SystemParams,
    TimingModel,
    Topology,
    TrialRecord,
)


def test_system_defaults():
    params = SystemParams()
    assert params.symbol_s == pytest.approx(4e-6)
    assert params.tx_power_mw == pytest.approx(10 ** 2.5)
    assert params.subcarrier_power_mw == pytest.approx(10 ** 2.5 / 64)
    assert params.noise_mw == pytest.approx(10 ** -11.3)

def test_system_rejects_more_taps_than_subcarriers():
    with pytest.raises(ValidationError, match="n_taps"):
        SystemParams(n_taps=65)

def test_mcs_table_must_have_eight_entries():
    with pytest.raises(ValidationError, match="8 entries"):
        AppConfig(mcs=DEFAULT_MCS_TABLE[:7])

def test_mcs_thresholds_strictly_increasing():
    entries = list(DEFAULT_MCS_TABLE)
    entries[3] = McsEntry(index=3, modulation="16QAM", code_rate=0.5, bits_per_symbol=2.0, threshold_db=6.5)
    with pytest.raises(ValidationError, match="strictly increasing"):
        AppConfig(mcs=tuple(entries))

def test_estimation_variance():
    cfg = EstimationConfig(n_training=4, l_max=8, noise_power=1.0, n_subcarriers=64)
    assert cfg.error_variance == pytest.approx(1 / 32)
    assert EstimationConfig(n_training=1, noise_power=1.0).error_variance == pytest.approx(4 * cfg.error_variance)
    assert EstimationConfig(n_training=None, noise_power=1.0).error_variance == 0.0

def test_estimation_rejects_paths_beyond_subcarriers():
    with pytest.raises(ValidationError, match="l_max"):
        EstimationConfig(l_max=65, noise_power=1.0)

def test_timing_packet_lengths():
    timing = TimingModel(n_training=4, n_antennas=4)
    assert timing.rts_us == 88
    assert timing.cts_us == 40
    assert timing.dts_us == 32
    assert timing.ack_us == 32

def test_run_config_always_includes_single_in_canonical_order():
    run = RunConfig(protocols=("adaptive", "mima"))
    assert run.protocols == ("single", "mima", "adaptive")

def test_run_config_backoff_defaults_by_mode():
    assert RunConfig(mode="ideal").effective_backoff_db == 0.0
    assert RunConfig(mode="practical").effective_backoff_db == 1.0
    assert RunConfig(mode="practical", backoff_db=2.5).effective_backoff_db == 2.5

def test_run_config_rejects_zero_trials():
    with pytest.raises(ValidationError):
        RunConfig(n_trials=0)

def test_app_config_applies_run_training_to_timing():
    cfg = AppConfig(run=RunConfig(n_training=8))
    assert cfg.timing_for_run().n_training == 8
    assert cfg.estimation_for_run().n_training == 8

def test_topology_rejects_close_nodes():
    with pytest.raises(ValidationError, match="closer than"):
        Topology(tx=((0, 0), (10, 10)), rx=((0, 0.05), (20, 20)))

def test_topology_distance():
    topo = Topology(tx=((0, 0), (10, 0)), rx=((3, 4), (10, 5)))
    assert topo.distance(1, 1) == pytest.approx(5.0)
    assert topo.distance(2, 2) == pytest.approx(5.0)

def test_frame_plan_scheme_must_match_streams():
    with pytest.raises(ValidationError, match="exactly one link"):
        FramePlan(frame="F1", scheme="single", handshake="single", config=StreamConfig(m1=2, m2=2), mdus=(0, 0))
    with pytest.raises(ValidationError, match="both links"):
        FramePlan(frame="F1", scheme="concurrent", handshake="concurrent", config=StreamConfig(m1=4, m2=0), mdus=(0, 0))

def test_trial_record_rejects_negative_throughput():
    with pytest.raises(ValidationError, match="negative"):
        TrialRecord(
            trial=0,
            throughput_mbps={"single": (-1.0, 2.0)},
            rt_ratio={"single": (1.0, 1.0)},
            concurrent={"single": (False, False)},
        )
