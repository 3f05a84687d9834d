"""MMSE post-processing SNR for one receiver facing one interfering transmitter.

Channels are stacks of per-subcarrier matrices shaped ``(N_C, N_A, N_A)``
(rx antennas x tx antennas); column ``m`` of subcarrier ``i`` is
``h[i, :, m]``, the channel seen by the transmitter's ``m``-th stream.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .exceptions import DimensionError, NumericalError

ChannelStack = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class PpsnrGrid:
    """Linear-scale SINR per subcarrier (rows) and stream (columns)."""

    values: npt.NDArray[np.float64]

    def __post_init__(self):
        if self.values.ndim != 2:
            raise DimensionError(f"PPSNR grid must be 2-D, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0):
            raise NumericalError("PPSNR values must be positive and finite")

    @property
    def n_subcarriers(self) -> int:
        return self.values.shape[0]

    @property
    def n_streams(self) -> int:
        return self.values.shape[1]

    def db(self) -> npt.NDArray[np.float64]:
        return 10 * np.log10(self.values)


def _check_stack(h: ChannelStack, name: str) -> None:
    if h.ndim != 3 or h.shape[1] != h.shape[2]:
        raise DimensionError(f"{name} must be shaped (N_C, N_A, N_A), got {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NumericalError(f"{name} contains non-finite entries")


def stream_covariance(
    desired: ChannelStack,
    interferer: ChannelStack | None,
    m1: int,
    m2: int,
    noise_power: float,
) -> npt.NDArray[np.complex128]:
    """Interference-plus-noise covariance seen by each desired stream.

    Returns shape ``(m1, N_C, N_A, N_A)``: the other ``m1 - 1`` desired
    streams at power ``1/m1``, all ``m2`` interfering streams at power
    ``1/m2`` and white noise.
    """
    n_a = desired.shape[1]
    hd = desired[:, :, :m1]
    others = 1.0 - np.eye(m1)
    cov = np.einsum("ml,ial,ibl->miab", others, hd, hd.conj()) / m1
    if m2 > 0:
        hi = interferer[:, :, :m2]
        cov = cov + (hi @ hi.conj().swapaxes(-1, -2))[np.newaxis] / m2
    return cov + noise_power * np.eye(n_a)


def mmse_ppsnr(
    desired: ChannelStack,
    interferer: ChannelStack | None,
    m1: int,
    m2: int,
    noise_power: float,
) -> PpsnrGrid:
    _check_stack(desired, "desired channel")
    n_a = desired.shape[1]
    if m1 < 1 or m2 < 0 or m1 + m2 > n_a:
        raise DimensionError(f"invalid stream counts (m1={m1}, m2={m2}) for {n_a} antennas")
    if m2 > 0:
        if interferer is None:
            raise DimensionError("interferer channel required when m2 > 0")
        _check_stack(interferer, "interfering channel")
        if interferer.shape != desired.shape:
            raise DimensionError(f"channel shapes differ: {desired.shape} vs {interferer.shape}")
    if noise_power <= 0:
        raise NumericalError("noise power must be positive")

    cov = stream_covariance(desired, interferer, m1, m2, noise_power)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"covariance is not positive definite: {e}")

    # h[m, i] is column m of H(i) as an (N_A, 1) vector
    h = np.moveaxis(desired[:, :, :m1], 2, 0)[..., np.newaxis]
    y = np.linalg.solve(chol, h)
    w = np.sqrt(1 / m1) * np.linalg.solve(chol.conj().swapaxes(-1, -2), y)

    w_h = w.conj().swapaxes(-1, -2)
    gain = np.abs(w_h @ h)[..., 0, 0] ** 2 / m1
    residual = (w_h @ cov @ w)[..., 0, 0].real
    return PpsnrGrid((gain / residual).T)


def mmse_ppsnr_estimated(
    desired_est: ChannelStack,
    interferer_est: ChannelStack | None,
    m1: int,
    m2: int,
    noise_power: float,
) -> PpsnrGrid:
    """PPSNR a receiver predicts from its estimated channels.

    Same computation as :func:`mmse_ppsnr`; only the inputs differ.
    """
    return mmse_ppsnr(desired_est, interferer_est, m1, m2, noise_power)
