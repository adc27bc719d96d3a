import math

import numpy as np
import numpy.testing as npt
import pytest

from models.signal import SnapshotBlock, SourceTruth
from services.crlb import population_covariance
from services.quantizer import adc_profile
from services.synth import generate_snapshots, sample_covariance, substream


def test_sample_covariance_single_snapshot():
    cov = sample_covariance(SnapshotBlock(data=[[1, 1j]]))
    npt.assert_allclose(cov, [[1, -1j], [1j, 1]])


def test_sample_covariance_is_hermitian():
    rng = substream(3)
    data = rng.standard_normal((50, 6)) + 1j * rng.standard_normal((50, 6))
    cov = sample_covariance(SnapshotBlock(data=data))
    npt.assert_array_equal(cov, cov.conj().T)


def test_noise_only_chains_are_white(ula16x2, all_ones16x2, ideal_profile16x2):
    truth = SourceTruth(theta0=0.2, gamma=0.0, snapshots=100_000)
    block = generate_snapshots(ula16x2, all_ones16x2, ideal_profile16x2, truth, seed=1)
    cov = sample_covariance(block)
    npt.assert_allclose(np.diag(cov).real, 1.0, atol=0.02)
    assert np.max(np.abs(cov - np.diag(np.diag(cov)))) < 0.02


def test_quantized_noise_keeps_aqnm_power(ula16x2, all_ones16x2):
    profile = adc_profile(m_sub=8, kappa=0.25, bits_low=2)
    truth = SourceTruth(theta0=0.2, gamma=0.0, snapshots=50_000)
    cov = sample_covariance(generate_snapshots(ula16x2, all_ones16x2, profile, truth, seed=2))
    low = np.diag(cov).real[profile.m_high:]
    expected = profile.alpha ** 2 + profile.alpha * profile.beta
    npt.assert_allclose(low, expected, rtol=0.03)


def test_unquantized_covariance_matches_population(ula16x2, coverage16x2, ideal_profile16x2):
    theta0 = math.radians(25)
    truth = SourceTruth(theta0=theta0, gamma=1.0, snapshots=20_000)
    block = generate_snapshots(ula16x2, coverage16x2, ideal_profile16x2, truth, seed=5)
    expected = population_covariance(ula16x2, coverage16x2, ideal_profile16x2, 1.0, theta0)
    npt.assert_allclose(sample_covariance(block), expected, atol=0.1)


@pytest.mark.parametrize("bits", [2, 3])
@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("theta_deg", [0.0, 30.0])
def test_quantized_covariance_follows_aqnm(ula16x2, all_ones16x2, bits, gamma, theta_deg):
    profile = adc_profile(m_sub=8, kappa=0.25, bits_low=bits)
    theta0 = math.radians(theta_deg)
    truth = SourceTruth(theta0=theta0, gamma=gamma, snapshots=100_000)
    block = generate_snapshots(ula16x2, all_ones16x2, profile, truth, seed=17)
    expected = population_covariance(ula16x2, all_ones16x2, profile, gamma, theta0)
    error = np.linalg.norm(sample_covariance(block) - expected) / np.linalg.norm(expected)
    assert error < 0.05


def test_streams_are_reproducible_and_independent(ula16x2, all_ones16x2, ideal_profile16x2):
    truth = SourceTruth(theta0=0.1, gamma=1.0, snapshots=16)
    first = generate_snapshots(ula16x2, all_ones16x2, ideal_profile16x2, truth, seed=7, stream=(1, 2))
    again = generate_snapshots(ula16x2, all_ones16x2, ideal_profile16x2, truth, seed=7, stream=(1, 2))
    other = generate_snapshots(ula16x2, all_ones16x2, ideal_profile16x2, truth, seed=7, stream=(1, 3))
    npt.assert_array_equal(first.data, again.data)
    assert not np.allclose(first.data, other.data)
    assert first.seed_trace == "7/1/2"


def test_profile_must_match_beamformer(ula16x2, all_ones16x2):
    truth = SourceTruth(theta0=0.1, gamma=1.0, snapshots=4)
    with pytest.raises(ValueError):
        generate_snapshots(ula16x2, all_ones16x2, adc_profile(4, 1.0, 3), truth, seed=0)
