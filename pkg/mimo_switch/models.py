import math
from pathlib import Path
from typing import Literal

from typing_extensions import Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Mode = Literal["ideal", "practical"]
Protocol = Literal["single", "mima", "mst", "adaptive"]
TopologyMode = Literal["random", "a", "b"]
Scheme = Literal["single", "concurrent"]
Frame = Literal["F1", "F2"]

PROTOCOL_ORDER: tuple[Protocol, ...] = ("single", "mima", "mst", "adaptive")


class SystemParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_antennas: int = Field(4, ge=1)
    n_subcarriers: int = Field(64, ge=1)
    bandwidth_hz: float = Field(20e6, gt=0)
    guard_ratio: float = Field(0.25, ge=0)
    tx_power_dbm: float = 25.0
    noise_dbm: float = -113.0
    n_taps: int = Field(8, ge=1)
    pdp_span_db: float = Field(20.0, ge=0)
    mdu_bytes: int = Field(100, ge=1)
    area_m: float = Field(200.0, gt=0)
    wavelength_m: float = Field(0.125, gt=0)
    ref_distance_m: float = Field(1.0, gt=0)
    path_loss_exponent: float = Field(3.0, gt=0)
    alpha: float = Field(0.125, ge=0)
    min_separation_m: float = Field(0.1, gt=0)

    @model_validator(mode="after")
    def _taps_fit(self) -> Self:
        if self.n_taps > self.n_subcarriers:
            raise ValueError("n_taps cannot exceed n_subcarriers")
        return self

    @property
    def symbol_s(self) -> float:
        return self.n_subcarriers / self.bandwidth_hz * (1 + self.guard_ratio)

    @property
    def tx_power_mw(self) -> float:
        return 10 ** (self.tx_power_dbm / 10)

    @property
    def subcarrier_power_mw(self) -> float:
        """Per-node transmit power spread evenly over the subcarriers."""
        return self.tx_power_mw / self.n_subcarriers

    @property
    def noise_mw(self) -> float:
        return 10 ** (self.noise_dbm / 10)


class McsEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0)
    modulation: str
    code_rate: float = Field(gt=0, le=1)
    bits_per_symbol: float = Field(gt=0)
    threshold_db: float = Field(allow_inf_nan=False)


DEFAULT_MCS_TABLE: tuple[McsEntry, ...] = (
    McsEntry(index=0, modulation="BPSK", code_rate=1 / 2, bits_per_symbol=0.5, threshold_db=1.4),
    McsEntry(index=1, modulation="QPSK", code_rate=1 / 2, bits_per_symbol=1.0, threshold_db=4.4),
    McsEntry(index=2, modulation="QPSK", code_rate=3 / 4, bits_per_symbol=1.5, threshold_db=6.5),
    McsEntry(index=3, modulation="16QAM", code_rate=1 / 2, bits_per_symbol=2.0, threshold_db=8.6),
    McsEntry(index=4, modulation="16QAM", code_rate=3 / 4, bits_per_symbol=3.0, threshold_db=12.0),
    McsEntry(index=5, modulation="64QAM", code_rate=2 / 3, bits_per_symbol=4.0, threshold_db=15.8),
    McsEntry(index=6, modulation="64QAM", code_rate=3 / 4, bits_per_symbol=4.5, threshold_db=17.2),
    McsEntry(index=7, modulation="64QAM", code_rate=5 / 6, bits_per_symbol=5.0, threshold_db=18.8),
)


class BackoffConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    backoff_db: float = Field(0.0, ge=0, allow_inf_nan=False)


class EstimationConfig(BaseModel):
    """Training-based channel estimation settings.

    ``n_training=None`` is the perfect-estimate limit (infinitely many
    training symbols): the error term vanishes.
    """

    model_config = ConfigDict(frozen=True)

    n_training: int | None = Field(4, ge=1)
    l_max: int = Field(8, ge=1)
    noise_power: float = Field(gt=0)
    n_subcarriers: int = Field(64, ge=1)

    @model_validator(mode="after")
    def _paths_fit(self) -> Self:
        if self.l_max > self.n_subcarriers:
            raise ValueError("l_max cannot exceed n_subcarriers")
        return self

    @property
    def error_variance(self) -> float:
        if self.n_training is None:
            return 0.0
        return self.l_max * self.noise_power / (self.n_subcarriers * self.n_training)


class TimingModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_training: int = Field(4, ge=1)
    n_antennas: int = Field(4, ge=1)
    symbol_us: float = Field(4.0, gt=0)
    slot_us: float = Field(9.0, gt=0)
    cw_min: int = Field(7, ge=0)
    cw_max: int = Field(63, ge=0)
    gap_us: float = Field(16.0, ge=0)
    frame_us: float = Field(5000.0, gt=0)

    @model_validator(mode="after")
    def _window_order(self) -> Self:
        if self.cw_max < self.cw_min:
            raise ValueError("cw_max must be >= cw_min")
        return self

    @property
    def rts_us(self) -> float:
        return (6 + self.n_training * self.n_antennas) * self.symbol_us

    @property
    def cts_us(self) -> float:
        return (6 + self.n_training) * self.symbol_us

    @property
    def dts_us(self) -> float:
        return (4 + self.n_training) * self.symbol_us

    @property
    def ack_us(self) -> float:
        return (6 + 2) * self.symbol_us


class RunConfig(BaseModel):
    mode: Mode = "ideal"
    protocols: tuple[Protocol, ...] = PROTOCOL_ORDER
    n_trials: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0)
    n_training: int = Field(4, ge=1)
    backoff_db: float | None = Field(None, ge=0, allow_inf_nan=False)
    topology: TopologyMode = "random"
    out_dir: Path = Path("results")
    workers: int = Field(1, ge=1)
    trace: bool = False
    dump_channels: bool = False

    @field_validator("protocols")
    @classmethod
    def _canonical_protocols(cls, value: tuple[Protocol, ...]) -> tuple[Protocol, ...]:
        # RT ratios are always measured against the single-link MAC
        wanted = set(value) | {"single"}
        return tuple(p for p in PROTOCOL_ORDER if p in wanted)

    @property
    def effective_backoff_db(self) -> float:
        if self.backoff_db is not None:
            return self.backoff_db
        return 1.0 if self.mode == "practical" else 0.0


class AppConfig(BaseModel):
    system: SystemParams = SystemParams()
    timing: TimingModel = TimingModel()
    run: RunConfig = RunConfig()
    mcs: tuple[McsEntry, ...] = DEFAULT_MCS_TABLE

    @field_validator("mcs")
    @classmethod
    def _valid_mcs_table(cls, value: tuple[McsEntry, ...]) -> tuple[McsEntry, ...]:
        if len(value) != 8:
            raise ValueError(f"MCS table needs exactly 8 entries, got {len(value)}")
        if [e.index for e in value] != list(range(8)):
            raise ValueError("MCS indices must be 0..7 in order")
        for lo, hi in zip(value, value[1:]):
            if hi.threshold_db <= lo.threshold_db:
                raise ValueError("MCS thresholds must be strictly increasing")
            if hi.bits_per_symbol < lo.bits_per_symbol:
                raise ValueError("MCS rates must be nondecreasing")
        return value

    def timing_for_run(self) -> TimingModel:
        return self.timing.model_copy(
            update={"n_training": self.run.n_training, "n_antennas": self.system.n_antennas}
        )

    def estimation_for_run(self) -> EstimationConfig:
        return EstimationConfig(
            n_training=self.run.n_training,
            l_max=self.system.n_taps,
            noise_power=self.system.noise_mw,
            n_subcarriers=self.system.n_subcarriers,
        )


class Topology(BaseModel):
    """Node positions in meters, ordered (T1, T2) and (R1, R2)."""

    model_config = ConfigDict(frozen=True)

    tx: tuple[tuple[float, float], tuple[float, float]]
    rx: tuple[tuple[float, float], tuple[float, float]]
    min_separation_m: float = 0.1

    @model_validator(mode="after")
    def _separated(self) -> Self:
        nodes = [*self.tx, *self.rx]
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                if math.dist(a, b) < self.min_separation_m:
                    raise ValueError(f"nodes {a} and {b} closer than {self.min_separation_m} m")
        return self

    def distance(self, rx: int, tx: int) -> float:
        return math.dist(self.rx[rx - 1], self.tx[tx - 1])


class StreamConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    m1: int = Field(ge=0)
    m2: int = Field(ge=0)
    mcs1: tuple[int | None, ...] = ()
    mcs2: tuple[int | None, ...] = ()


class FramePlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    frame: Frame
    scheme: Scheme
    handshake: Scheme
    config: StreamConfig
    mdus: tuple[int, int]

    @model_validator(mode="after")
    def _scheme_matches_streams(self) -> Self:
        active = (self.config.m1 > 0) + (self.config.m2 > 0)
        if self.scheme == "single" and active != 1:
            raise ValueError("single-link frame must carry exactly one link")
        if self.scheme == "concurrent" and active != 2:
            raise ValueError("concurrent frame must carry both links")
        if min(self.mdus) < 0:
            raise ValueError("MDU counts must be nonnegative")
        return self


class TrialRecord(BaseModel):
    trial: int = Field(ge=0)
    throughput_mbps: dict[Protocol, tuple[float, float]]
    rt_ratio: dict[Protocol, tuple[float | None, float | None]]
    concurrent: dict[Protocol, tuple[bool, bool]]

    @field_validator("throughput_mbps")
    @classmethod
    def _nonnegative(cls, value: dict[Protocol, tuple[float, float]]) -> dict[Protocol, tuple[float, float]]:
        for protocol, pair in value.items():
            if min(pair) < 0:
                raise ValueError(f"negative throughput for {protocol}")
        return value
