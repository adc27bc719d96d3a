import math

import numpy as np
import numpy.testing as npt
import pytest

from models.array import ArrayGeometry
from models.signal import CandidateSet, SnapshotBlock, SourceTruth
from services.beamformer import beam_power_profile, design_coverage_ab
from services.errors import CoverageError, NoSourceError
from services.estimator import (
    align_residual_signs,
    candidate_angles,
    match_beam_profile,
    resolve_ambiguity,
    root_music,
    stb_root_music,
)
from services.quantizer import adc_profile
from services.synth import generate_snapshots, noiseless_snapshots, substream


def _ula_covariance(m: int, psi: float, noise: float = 0.01) -> np.ndarray:
    a = np.exp(1j * psi * np.arange(m))
    return np.outer(a, a.conj()) + noise * np.eye(m)


@pytest.mark.parametrize("psi", [-2.9, -0.4, 0.0, 1.3, 3.0])
def test_root_music_recovers_phase(psi):
    root = root_music(_ula_covariance(8, psi))
    assert abs(np.angle(root * np.exp(-1j * psi))) < 1e-7
    assert abs(root) == pytest.approx(1.0, abs=1e-6)


def test_root_music_without_signal():
    with pytest.raises(NoSourceError):
        root_music(np.eye(6))


@pytest.mark.parametrize("sources", [0, 4])
def test_root_music_source_count(sources):
    with pytest.raises(ValueError):
        root_music(_ula_covariance(4, 0.5), sources=sources)


def test_single_candidate_without_ambiguity():
    geom = ArrayGeometry.from_counts(8, 1)
    theta = math.radians(20)
    angles = candidate_angles(np.exp(1j * math.pi * math.sin(theta)), geom)
    npt.assert_allclose(angles, [theta])


def test_candidates_repeat_every_virtual_period():
    geom = ArrayGeometry.from_counts(16, 2)
    theta = math.radians(10)
    angles = candidate_angles(np.exp(2j * math.pi * math.sin(theta)), geom)
    npt.assert_allclose(np.sin(angles), [math.sin(theta) - 1, math.sin(theta)])
    assert np.all(np.diff(angles) > 0)


def test_resolve_ambiguity_picks_nearest_beam():
    candidates = CandidateSet(angles=[-0.5, 0.3], chain_powers=[1.0, 2.0], best_beam=0.2)
    assert resolve_ambiguity(candidates) == 0.3
    assert resolve_ambiguity(candidates, literal_ambiguity=True) == -0.5


def test_resolve_ambiguity_tie_prefers_broadside():
    candidates = CandidateSet(angles=[-0.25, 0.75], chain_powers=[1.0], best_beam=0.25)
    assert resolve_ambiguity(candidates) == -0.25


def test_align_residual_signs():
    psi = 0.7
    signs = np.array([-1, 1, 1, 1, -1, -1, 1, -1])
    powers = np.array([0.2, 0.5, 1.0, 0.8, 0.1, 0.1, 0.05, 0.05])
    source = substream(11).standard_normal(20) + 0j
    ramp = np.exp(1j * psi * np.arange(8))
    chains = SnapshotBlock(data=source[:, None] * (signs * ramp)[None, :])
    aligned = align_residual_signs(chains, powers).data
    npt.assert_allclose(aligned / ramp[None, :], np.repeat(source[:, None], 8, axis=1), atol=1e-12)


def test_estimator_needs_coverage_beams(ula16x2, all_ones16x2):
    block = noiseless_snapshots(ula16x2, all_ones16x2, 0.2, snapshots=8)
    with pytest.raises(CoverageError):
        stb_root_music(block, ula16x2, all_ones16x2)


@pytest.mark.parametrize("theta_deg", [23.0, 73.0, 0.0])
def test_noiseless_estimate(ula16x2, coverage16x2, theta_deg):
    block = noiseless_snapshots(ula16x2, coverage16x2, math.radians(theta_deg), snapshots=32)
    estimate = stb_root_music(block, ula16x2, coverage16x2)
    assert abs(math.degrees(estimate) - theta_deg) < 1e-6


@pytest.mark.parametrize("m_total, m_per", [(16, 2), (64, 2), (64, 4)])
def test_noiseless_estimate_over_field_of_view(m_total, m_per):
    geom = ArrayGeometry.from_counts(m_total, m_per)
    ab = design_coverage_ab(geom)
    for theta_deg in np.linspace(-80, 80, 33):
        block = noiseless_snapshots(geom, ab, math.radians(theta_deg), snapshots=16)
        estimate = math.degrees(stb_root_music(block, geom, ab))
        assert abs(estimate - theta_deg) < 1e-5, theta_deg


def test_profile_match_rejects_grating_lobe_alias(ula16x2, coverage16x2):
    theta0, gamma = math.radians(73), 100.0
    angles = candidate_angles(np.exp(2j * math.pi * math.sin(theta0)), ula16x2)
    assert angles.size == 2
    powers = gamma * beam_power_profile(ula16x2, coverage16x2, theta0)[0] + 1.0
    # The mirrored endfire beam is almost as strong as the one facing the source
    assert powers[0] == pytest.approx(powers[-1], rel=0.02)
    candidates = CandidateSet(angles=angles, chain_powers=powers, best_beam=coverage16x2.beam_angles[0])
    assert abs(math.degrees(resolve_ambiguity(candidates))) < 5.0
    assert match_beam_profile(candidates, ula16x2, coverage16x2) == pytest.approx(theta0, abs=1e-12)


def test_profile_match_tie_uses_nearest_beam(ula16x2, coverage16x2):
    candidates = CandidateSet(angles=[-0.3, 0.4], chain_powers=np.ones(8), best_beam=0.35)
    assert match_beam_profile(candidates, ula16x2, coverage16x2) == 0.4


def test_profile_match_needs_every_chain(ula16x2, coverage16x2):
    candidates = CandidateSet(angles=[0.1], chain_powers=np.ones(4), best_beam=0.0)
    with pytest.raises(ValueError):
        match_beam_profile(candidates, ula16x2, coverage16x2)


def _hits(geom, ab, profile, theta_deg, trials, seed=42):
    theta0 = math.radians(theta_deg)
    truth = SourceTruth(theta0=theta0, gamma=100.0, snapshots=32)
    hits = 0
    for trial in range(trials):
        block = generate_snapshots(geom, ab, profile, truth, seed=seed, stream=(trial,))
        estimate = stb_root_music(block, geom, ab, adc=profile)
        hits += abs(math.degrees(estimate) - theta_deg) < 0.5
    return hits


@pytest.mark.parametrize("kappa", [1.0, 0.25])
def test_near_endfire_source_is_not_aliased(ula16x2, coverage16x2, kappa):
    profile = adc_profile(m_sub=8, kappa=kappa, bits_low=3)
    assert _hits(ula16x2, coverage16x2, profile, 73.0, trials=40) == 40


@pytest.mark.slow
def test_estimates_within_half_degree_over_field_of_view(ula16x2, coverage16x2, ideal_profile16x2):
    trials = 200
    for theta_deg in np.linspace(-80, 80, 33):
        hits = _hits(ula16x2, coverage16x2, ideal_profile16x2, theta_deg, trials)
        assert hits >= 0.95 * trials, (theta_deg, hits)
