"""Topologies, path loss, frequency-selective fading and channel estimates."""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt
from loguru import logger

from .exceptions import ConfigurationError, DimensionError, NumericalError, OutputError
from .models import EstimationConfig, SystemParams, Topology
from .phy import ChannelStack

DEFAULT_SYSTEM = SystemParams()

# (rx k, tx l) node pairs, 1-based
PAIRS: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2))

LINK_LENGTH_M = 150.0
LINK_SPACING_M = 5.0


@dataclass(frozen=True)
class FadingRealization:
    """Channel matrices between every (R_k, T_l) pair for one frame.

    ``matrices`` is shaped ``(2, 2, N_C, N_A, N_A)`` and indexed
    ``[k - 1, l - 1]``; path loss and transmit power are already folded in.
    """

    frame_id: int
    matrices: npt.NDArray[np.complex128]
    estimated: bool = False

    def __post_init__(self):
        if self.matrices.ndim != 5 or self.matrices.shape[:2] != (2, 2):
            raise DimensionError(f"expected (2, 2, N_C, N_A, N_A) matrices, got {self.matrices.shape}")
        if not np.all(np.isfinite(self.matrices)):
            raise NumericalError("channel realization contains non-finite entries")

    def pair(self, rx: int, tx: int) -> ChannelStack:
        return self.matrices[rx - 1, tx - 1]

    @property
    def n_subcarriers(self) -> int:
        return self.matrices.shape[2]

    @property
    def n_antennas(self) -> int:
        return self.matrices.shape[3]


def random_topology(rng: np.random.Generator, params: SystemParams = DEFAULT_SYSTEM) -> Topology:
    while True:
        pts = rng.uniform(0.0, params.area_m, size=(4, 2))
        nodes = [tuple(float(c) for c in p) for p in pts]
        if all(
            math.dist(a, b) >= params.min_separation_m
            for i, a in enumerate(nodes)
            for b in nodes[i + 1:]
        ):
            return Topology(
                tx=(nodes[0], nodes[1]),
                rx=(nodes[2], nodes[3]),
                min_separation_m=params.min_separation_m,
            )


def fixed_topology(kind: str, params: SystemParams = DEFAULT_SYSTEM) -> Topology:
    """Two parallel 150 m links 5 m apart.

    ``a``: both links point the same way. ``b``: opposite directions, so
    each receiver sits 5 m from the other link's transmitter.
    """
    x0 = (params.area_m - LINK_LENGTH_M) / 2
    x1 = x0 + LINK_LENGTH_M
    y1 = params.area_m / 2
    y2 = y1 + LINK_SPACING_M
    if kind == "a":
        tx = ((x0, y1), (x0, y2))
        rx = ((x1, y1), (x1, y2))
    elif kind == "b":
        tx = ((x0, y1), (x1, y2))
        rx = ((x1, y1), (x0, y2))
    else:
        raise ValueError(f"unknown representative topology '{kind}'")
    return Topology(tx=tx, rx=rx, min_separation_m=params.min_separation_m)


def path_loss_gain(dist_m: float, params: SystemParams = DEFAULT_SYSTEM) -> float:
    d0 = params.ref_distance_m
    if dist_m < d0:
        logger.warning(f"Node distance {dist_m:.3f} m below reference distance, clamped to {d0} m")
        dist_m = d0
    return (params.wavelength_m / (4 * math.pi * d0)) ** 2 * (d0 / dist_m) ** params.path_loss_exponent


def power_delay_profile(params: SystemParams = DEFAULT_SYSTEM) -> npt.NDArray[np.float64]:
    """Exponential tap powers, last tap ``pdp_span_db`` below the first, unit sum."""
    if params.n_taps == 1:
        return np.ones(1)
    decay_db = params.pdp_span_db * np.arange(params.n_taps) / (params.n_taps - 1)
    powers = 10 ** (-decay_db / 10)
    return powers / powers.sum()


def _complex_normal(rng: np.random.Generator, size: tuple[int, ...]) -> npt.NDArray[np.complex128]:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def draw_fading(
    topology: Topology,
    frame_id: int,
    rng: np.random.Generator,
    params: SystemParams = DEFAULT_SYSTEM,
) -> FadingRealization:
    n_a, n_c, n_l = params.n_antennas, params.n_subcarriers, params.n_taps
    taps = _complex_normal(rng, (2, 2, n_l, n_a, n_a))
    taps *= np.sqrt(power_delay_profile(params))[:, np.newaxis, np.newaxis]
    response = np.fft.fft(taps, n=n_c, axis=2)

    scale = np.array(
        [
            [math.sqrt(path_loss_gain(topology.distance(k, l), params) * params.subcarrier_power_mw) for l in (1, 2)]
            for k in (1, 2)
        ]
    )
    return FadingRealization(frame_id=frame_id, matrices=response * scale[:, :, None, None, None])


def estimate_channel(
    truth: FadingRealization,
    cfg: EstimationConfig,
    rng: np.random.Generator,
) -> FadingRealization:
    sigma = math.sqrt(cfg.error_variance)
    error = sigma * _complex_normal(rng, truth.matrices.shape) if sigma > 0 else 0.0
    return FadingRealization(frame_id=truth.frame_id, matrices=truth.matrices + error, estimated=True)


def dump_channels(path: Path, realizations: dict[str, FadingRealization]) -> None:
    """Write realizations to ``.npz``, one array per node pair.

    Keys are ``"{label}_R{k}T{l}"`` with arrays shaped ``(N_C, N_A, N_A)``.
    """
    arrays = {
        f"{label}_R{k}T{l}": real.pair(k, l)
        for label, real in realizations.items()
        for k, l in PAIRS
    }
    arrays |= {f"{label}_meta": np.array([real.frame_id, int(real.estimated)]) for label, real in realizations.items()}
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, **arrays)
    except OSError as e:
        raise OutputError(path, str(e))


def load_channels(path: Path) -> dict[str, FadingRealization]:
    """Read back a file written by ``dump_channels``."""
    try:
        with np.load(path) as data:
            labels = sorted({key.rsplit("_", 1)[0] for key in data.files})
            result = {}
            for label in labels:
                frame_id, estimated = data[f"{label}_meta"]
                first = data[f"{label}_R1T1"]
                matrices = np.empty((2, 2, *first.shape), dtype=np.complex128)
                for k, l in PAIRS:
                    matrices[k - 1, l - 1] = data[f"{label}_R{k}T{l}"]
                result[label] = FadingRealization(int(frame_id), matrices, bool(estimated))
    except (OSError, ValueError, KeyError) as e:
        raise ConfigurationError(f"Cannot read channel dump {path}: {e}")
    return result
