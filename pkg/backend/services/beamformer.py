"""
Beamformer - analog sub-connected beams, subarray gains and digital energy normalization
"""
import math
from typing import Optional

import numpy as np

from models.array import AnalogBeamformer, ArrayGeometry, BeamMode, DigitalCombiner
from models.signal import SnapshotBlock
from .array_model import steering_vector
from .errors import CoverageError, ZeroPowerError


def beamwidth_3db(geom: ArrayGeometry) -> float:
    """Approximate 3 dB beamwidth of one subarray, in degrees"""
    return 50.8 * geom.wavelength / (geom.m_per * geom.spacing)


def required_subarrays(geom: ArrayGeometry) -> int:
    """Smallest M_s whose beams cover [-90, 90] degrees"""
    return math.ceil(180.0 / beamwidth_3db(geom))


def coverage_beam_angles(m_sub: int) -> np.ndarray:
    """Sector centres theta_ms = ms*pi/M_s - pi/2 - pi/(2M_s), ms = 1..M_s"""
    ms = np.arange(1, m_sub + 1)
    return ms * np.pi / m_sub - np.pi / 2 - np.pi / (2 * m_sub)


def _block_diagonal(geom: ArrayGeometry, weights: np.ndarray) -> np.ndarray:
    # weights is M_s x M_a; column ms of V_A lives on the rows of subarray ms
    matrix = np.zeros((geom.m_total, geom.m_sub), dtype=complex)
    for ms in range(geom.m_sub):
        matrix[ms * geom.m_per:(ms + 1) * geom.m_per, ms] = weights[ms]
    return matrix


def design_coverage_ab(geom: ArrayGeometry) -> AnalogBeamformer:
    """
    Coverage analog beamformer: subarray ms is steered to the centre of sector ms.

    The stored column is a_a(theta_ms)/sqrt(M_a), so V_A^H applies the phase
    -2pi(m_a-1)d sin(theta_ms)/lambda to each element.
    """
    needed = required_subarrays(geom)
    if geom.m_sub < needed:
        raise CoverageError(
            f"M_s={geom.m_sub} subarrays cannot cover [-90, 90] deg with a "
            f"{beamwidth_3db(geom):.1f} deg beam; need at least {needed}"
        )
    angles = coverage_beam_angles(geom.m_sub)
    phases = 2j * np.pi * np.outer(np.sin(angles), geom.element_offsets) / geom.wavelength
    matrix = _block_diagonal(geom, np.exp(phases) / math.sqrt(geom.m_per))
    return AnalogBeamformer(phase_matrix=matrix, beam_angles=angles, mode=BeamMode.COVERAGE)


def all_ones_ab(geom: ArrayGeometry) -> AnalogBeamformer:
    """Analog beamformer with every weight equal to 1/sqrt(M_a)"""
    weights = np.full((geom.m_sub, geom.m_per), 1.0 / math.sqrt(geom.m_per), dtype=complex)
    return AnalogBeamformer(phase_matrix=_block_diagonal(geom, weights), mode=BeamMode.ALL_ONES)


def make_ab(geom: ArrayGeometry, mode: BeamMode) -> AnalogBeamformer:
    if BeamMode(mode) is BeamMode.COVERAGE:
        return design_coverage_ab(geom)
    return all_ones_ab(geom)


def apply_analog(ab: AnalogBeamformer, antenna_signal) -> np.ndarray:
    """V_A^H x for antenna samples on the last axis"""
    antenna_signal = np.asarray(antenna_signal, dtype=complex)
    if antenna_signal.shape[-1] != ab.m_total:
        raise ValueError(f"expected {ab.m_total} antenna samples, got {antenna_signal.shape[-1]}")
    return antenna_signal @ ab.phase_matrix.conj()


def beam_power_profile(geom: ArrayGeometry, ab: AnalogBeamformer, thetas) -> np.ndarray:
    """Per-chain gain |v_ms^H a(theta)|^2, one row per direction"""
    rows = [np.abs(apply_analog(ab, steering_vector(geom, t))) ** 2 for t in np.atleast_1d(thetas)]
    return np.array(rows)


def subarray_gain(geom: ArrayGeometry, theta0: float, theta_ms: float) -> complex:
    """
    Complex gain delta of a beam steered to theta_ms for a source at theta0.

    Dirichlet form; at sin(pi d u/lambda) = 0 the ratio takes its limit.
    """
    u = math.sin(theta0) - math.sin(theta_ms)
    x = math.pi * geom.spacing * u / geom.wavelength
    m_a = geom.m_per
    if abs(math.sin(x)) < 1e-12:
        k = round(x / math.pi)
        ratio = m_a * (-1.0) ** (k * (m_a - 1))
    else:
        ratio = math.sin(m_a * x) / math.sin(x)
    return complex(np.exp(1j * (m_a - 1) * x) * ratio / math.sqrt(m_a))


def chain_powers(block: SnapshotBlock) -> np.ndarray:
    """Empirical per-chain power mean_n |y_ms(n)|^2"""
    return np.mean(np.abs(block.data) ** 2, axis=0)


def _nonzero_powers(block: SnapshotBlock) -> np.ndarray:
    powers = chain_powers(block)
    silent = np.flatnonzero(powers <= 0)
    if silent.size:
        raise ZeroPowerError(f"chains {silent.tolist()} have zero empirical power")
    return powers


def digital_combiner(geom: ArrayGeometry, ab: AnalogBeamformer, block: SnapshotBlock) -> DigitalCombiner:
    """V_D from the beam angles and P_Ms from the block's chain powers"""
    if ab.beam_angles.size:
        phases = np.exp(1j * np.pi * (geom.m_per - 1) * geom.spacing * np.sin(ab.beam_angles) / geom.wavelength)
    else:
        phases = np.ones(ab.m_sub, dtype=complex)
    return DigitalCombiner(phase_diag=phases, energy_diag=np.sqrt(_nonzero_powers(block)))


def energy_normalize(chains: SnapshotBlock, combiner: Optional[DigitalCombiner] = None) -> SnapshotBlock:
    """P_Ms^-1 V_D y(n): phase-compensate and scale every chain to unit empirical power"""
    powers = _nonzero_powers(chains)
    if combiner is None:
        combiner = DigitalCombiner(phase_diag=np.ones(chains.m_sub), energy_diag=np.sqrt(powers))
    if combiner.phase_diag.size != chains.m_sub:
        raise ValueError(f"combiner has {combiner.phase_diag.size} chains, block has {chains.m_sub}")
    data = chains.data * (combiner.phase_diag / combiner.energy_diag)[None, :]
    return SnapshotBlock(data=data, seed_trace=chains.seed_trace)
