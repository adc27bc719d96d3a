"""
Synth - seeded snapshot blocks of the full receive chain and sample covariances
"""
import math
from typing import Tuple

import numpy as np

from models.array import AnalogBeamformer, ArrayGeometry
from models.signal import AdcProfile, SnapshotBlock, SourceTruth
from .array_model import steering_vector
from .beamformer import apply_analog
from .quantizer import mixed_adc_apply


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for (seed, keys...); independent of execution order"""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=tuple(keys)))
    )


def _complex_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    draws = rng.standard_normal(tuple(shape) + (2,))
    return math.sqrt(variance / 2.0) * (draws[..., 0] + 1j * draws[..., 1])


def chain_gains(geom: ArrayGeometry, ab: AnalogBeamformer, theta0: float) -> np.ndarray:
    """Post-AB source response V_A^H a(theta0)"""
    return apply_analog(ab, steering_vector(geom, theta0))


def _rms(gains: np.ndarray, gamma: float) -> np.ndarray:
    return np.sqrt((gamma * np.abs(gains) ** 2 + 1.0) / 2.0)


def chain_rms(geom: ArrayGeometry, ab: AnalogBeamformer, gamma: float, theta0: float) -> np.ndarray:
    """Per-component RMS of each ideal chain output, sqrt((gamma|v^H a|^2 + 1)/2)"""
    return _rms(chain_gains(geom, ab, theta0), gamma)


def generate_snapshots(
    geom: ArrayGeometry,
    ab: AnalogBeamformer,
    profile: AdcProfile,
    truth: SourceTruth,
    seed: int,
    stream: Tuple[int, ...] = (),
) -> SnapshotBlock:
    """
    Draw N snapshots of V_A^H a(theta0) s(n) + w(n) and pass them through the mixed ADCs.

    s(n) is circular Gaussian with variance gamma, w(n) is white with unit variance
    per chain. ``stream`` selects an independent substream of ``seed``.
    """
    if profile.m_sub != ab.m_sub:
        raise ValueError(f"profile has {profile.m_sub} chains, beamformer has {ab.m_sub}")
    rng = substream(seed, *stream)
    gains = chain_gains(geom, ab, truth.theta0)
    source = _complex_gaussian(rng, (truth.snapshots,), truth.gamma)
    noise = _complex_gaussian(rng, (truth.snapshots, ab.m_sub), 1.0)
    ideal = source[:, None] * gains[None, :] + noise
    data = mixed_adc_apply(ideal, profile, _rms(gains, truth.gamma))
    return SnapshotBlock(data=data, seed_trace="/".join(str(k) for k in (seed,) + tuple(stream)))


def noiseless_snapshots(
    geom: ArrayGeometry,
    ab: AnalogBeamformer,
    theta0: float,
    snapshots: int,
    gamma: float = 1.0,
    seed: int = 0,
) -> SnapshotBlock:
    """Unquantized, noise-free chain outputs for estimator consistency checks"""
    rng = substream(seed)
    source = _complex_gaussian(rng, (snapshots,), gamma)
    data = source[:, None] * chain_gains(geom, ab, theta0)[None, :]
    return SnapshotBlock(data=data, seed_trace=f"{seed}/noiseless")


def sample_covariance(block: SnapshotBlock) -> np.ndarray:
    """(1/N) sum_n y(n) y(n)^H, Hermitian by construction"""
    data = block.data
    cov = data.T @ data.conj() / block.snapshots
    return 0.5 * (cov + cov.conj().T)
