import numpy as np
import pytest

from mimo_switch.exceptions import DimensionError, NumericalError
from mimo_switch.phy import PpsnrGrid, mmse_ppsnr, mmse_ppsnr_estimated, stream_covariance


def complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

def closed_form(desired, interferer, m1, m2, noise):
    """(1/m1) h^H C^{-1} h evaluated one subcarrier and stream at a time."""
    n_c, n_a, _ = desired.shape
    out = np.empty((n_c, m1))
    for i in range(n_c):
        for m in range(m1):
            cov = noise * np.eye(n_a, dtype=complex)
            for j in range(m1):
                if j != m:
                    h = desired[i, :, j:j + 1]
                    cov += h @ h.conj().T / m1
            for j in range(m2):
                g = interferer[i, :, j:j + 1]
                cov += g @ g.conj().T / m2
            h = desired[i, :, m]
            out[i, m] = (h.conj() @ np.linalg.solve(cov, h)).real / m1
    return out


def test_single_antenna_snr():
    desired = np.ones((1, 1, 1), dtype=complex)
    grid = mmse_ppsnr(desired, None, 1, 0, 0.01)
    assert grid.values[0, 0] == pytest.approx(100.0)

def test_orthogonal_interferer_is_nulled():
    desired = np.zeros((1, 2, 2), dtype=complex)
    interferer = np.zeros((1, 2, 2), dtype=complex)
    desired[0, :, 0] = [1, 0]
    interferer[0, :, 0] = [0, 1]
    grid = mmse_ppsnr(desired, interferer, 1, 1, 0.01)
    assert grid.values[0, 0] == pytest.approx(100.0)

@pytest.mark.parametrize("m1,m2", [(2, 2), (1, 3), (3, 1), (4, 0)])
def test_matches_closed_form(rng, m1, m2):
    # 1000 independent 4x4 instances stacked along the subcarrier axis
    desired = complex_gaussian(rng, (1000, 4, 4))
    interferer = complex_gaussian(rng, (1000, 4, 4))
    grid = mmse_ppsnr(desired, interferer, m1, m2, 0.1)
    assert grid.values.shape == (1000, m1)
    np.testing.assert_allclose(grid.values, closed_form(desired, interferer, m1, m2, 0.1), rtol=1e-9)

def test_removing_interferer_never_hurts(rng):
    desired = complex_gaussian(rng, (64, 4, 4))
    interferer = complex_gaussian(rng, (64, 4, 4))
    with_interference = mmse_ppsnr(desired, interferer, 2, 2, 0.1).values
    alone = mmse_ppsnr(desired, None, 2, 0, 0.1).values
    assert np.all(alone >= with_interference * (1 - 1e-12))

def test_more_noise_lowers_every_value(rng):
    desired = complex_gaussian(rng, (64, 4, 4))
    interferer = complex_gaussian(rng, (64, 4, 4))
    low = mmse_ppsnr(desired, interferer, 2, 1, 0.1).values
    high = mmse_ppsnr(desired, interferer, 2, 1, 0.4).values
    assert np.all(high < low)

def test_covariance_is_hermitian(rng):
    desired = complex_gaussian(rng, (16, 4, 4))
    interferer = complex_gaussian(rng, (16, 4, 4))
    cov = stream_covariance(desired, interferer, 3, 1, 0.1)
    assert cov.shape == (3, 16, 4, 4)
    np.testing.assert_allclose(cov, cov.conj().swapaxes(-1, -2), atol=1e-12)

def test_estimated_with_exact_channels_is_identical(rng):
    desired = complex_gaussian(rng, (64, 4, 4))
    interferer = complex_gaussian(rng, (64, 4, 4))
    exact = mmse_ppsnr(desired, interferer, 2, 2, 0.1).values
    estimated = mmse_ppsnr_estimated(desired.copy(), interferer.copy(), 2, 2, 0.1).values
    np.testing.assert_array_equal(exact, estimated)

def test_estimated_converges_as_error_shrinks(rng):
    desired = complex_gaussian(rng, (64, 4, 4))
    exact = mmse_ppsnr(desired, None, 2, 0, 0.1).values
    error = complex_gaussian(rng, desired.shape)
    deviations = [
        np.max(np.abs(mmse_ppsnr_estimated(desired + scale * error, None, 2, 0, 0.1).values / exact - 1))
        for scale in (1e-2, 1e-4, 1e-6)
    ]
    assert deviations[0] > deviations[1] > deviations[2]
    assert deviations[2] < 1e-4

def test_rejects_too_many_streams(rng):
    h = complex_gaussian(rng, (4, 4, 4))
    with pytest.raises(DimensionError, match="invalid stream counts"):
        mmse_ppsnr(h, h, 3, 2, 0.1)

def test_requires_interferer_when_it_transmits(rng):
    h = complex_gaussian(rng, (4, 4, 4))
    with pytest.raises(DimensionError, match="interferer channel required"):
        mmse_ppsnr(h, None, 2, 2, 0.1)

def test_rejects_mismatched_shapes(rng):
    with pytest.raises(DimensionError, match="shapes differ"):
        mmse_ppsnr(complex_gaussian(rng, (4, 4, 4)), complex_gaussian(rng, (8, 4, 4)), 2, 2, 0.1)

def test_rejects_bad_noise_and_nan(rng):
    h = complex_gaussian(rng, (4, 4, 4))
    with pytest.raises(NumericalError, match="noise power"):
        mmse_ppsnr(h, None, 2, 0, 0.0)
    h[0, 0, 0] = np.nan
    with pytest.raises(NumericalError, match="non-finite"):
        mmse_ppsnr(h, None, 2, 0, 0.1)

def test_grid_validation():
    with pytest.raises(DimensionError):
        PpsnrGrid(np.ones(3))
    with pytest.raises(NumericalError):
        PpsnrGrid(np.zeros((2, 2)))
    np.testing.assert_allclose(PpsnrGrid(np.full((2, 1), 100.0)).db(), 20.0)
