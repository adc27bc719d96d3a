"""
Quantizer - AQNM constants, Gaussian-optimal scalar codebooks and the mixed-ADC front end
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar, root
from scipy.stats import norm

from config import settings
from models.signal import AdcProfile
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

# Lloyd-Max distortion of a unit-variance Gaussian, b = 1..5
DISTORTION_TABLE = {1: 0.3634, 2: 0.1175, 3: 0.03454, 4: 0.009497, 5: 0.002499}

# Lloyd-Max codebooks of a unit-variance Gaussian: positive levels and positive thresholds
LLOYD_MAX_TABLE = {
    1: ((0.7978845608028654,), ()),
    2: ((0.4527800346, 1.5104176085), (0.9815988216,)),
    3: (
        (0.2450941789, 0.7560052812, 1.3439092785, 2.1519457045),
        (0.5005497301, 1.0499572799, 1.7479274915),
    ),
    4: (
        (0.1283950299, 0.3880482995, 0.6567591185, 0.9423404565,
         1.2562311973, 1.6180463860, 2.0690172265, 2.7325895710),
        (0.2582216647, 0.5224037090, 0.7995497875, 1.0992858269,
         1.4371387917, 1.8435318063, 2.4008033988),
    ),
    5: (
        (0.0658896598, 0.1980518297, 0.3313783058, 0.4666995230,
         0.6049336240, 0.7471357037, 0.8945651174, 1.0487833199,
         1.2118043806, 1.3863403396, 1.5762280786, 1.7872332177,
         2.0287283994, 2.3177394042, 2.6911195774, 3.2607324934),
        (0.1319707447, 0.2647150677, 0.3990389144, 0.5358165735,
         0.6760346638, 0.8208504105, 0.9716742187, 1.1302938503,
         1.2990723601, 1.4812842091, 1.6817306482, 1.9079808085,
         2.1732339018, 2.5044294908, 2.9759260354),
    ),
}

# Codebooks above this resolution are uniform mid-rise
MAX_LLOYD_BITS = 5


@dataclass(frozen=True)
class Codebook:
    """Scalar quantizer for a unit-variance Gaussian input"""
    levels: np.ndarray
    thresholds: np.ndarray
    distortion: float

    @property
    def bits(self) -> int:
        return int(round(math.log2(self.levels.size)))


def distortion_factor(bits: int) -> float:
    """Distortion factor beta for b-bit quantization of a Gaussian input"""
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    if bits in DISTORTION_TABLE:
        return DISTORTION_TABLE[bits]
    return math.sqrt(3) * math.pi / 2 * 2.0 ** (-2 * bits)


def adc_profile(
    m_sub: int,
    kappa: float,
    bits_low: int,
    bits_high: int = 12,
    beta: Optional[float] = None,
) -> AdcProfile:
    """
    Build the ADC split for M_s chains; the first round(kappa*M_s) chains are high resolution.

    ``beta`` overrides the tabulated distortion factor (e.g. 0 for an ideal quantizer).
    """
    m_high = kappa * m_sub
    if not math.isclose(m_high, round(m_high), abs_tol=1e-9):
        raise ConfigurationError(f"kappa={kappa} does not give an integer chain count for M_s={m_sub}")
    m_high = int(round(m_high))
    return AdcProfile(
        bits_low=bits_low,
        m_high=m_high,
        m_low=m_sub - m_high,
        beta=distortion_factor(bits_low) if beta is None else beta,
        bits_high=bits_high,
    )


def _cell_moments(edges: np.ndarray):
    """Probability and first moment of a standard normal over consecutive cells"""
    cdf = norm.cdf(edges)
    pdf = norm.pdf(edges)
    return np.diff(cdf), pdf[:-1] - pdf[1:]


def _lloyd_step(levels: np.ndarray) -> np.ndarray:
    # Centroids of the cells bounded by the midpoints of the current levels
    thresholds = 0.5 * (levels[1:] + levels[:-1])
    prob, first = _cell_moments(np.concatenate(([-np.inf], thresholds, [np.inf])))
    return first / prob


def _from_levels(levels: np.ndarray) -> Codebook:
    thresholds = 0.5 * (levels[1:] + levels[:-1])
    prob, _ = _cell_moments(np.concatenate(([-np.inf], thresholds, [np.inf])))
    return Codebook(levels, thresholds, float(1.0 - np.sum(prob * levels ** 2)))


def _tabulated(bits: int) -> Codebook:
    positive, _ = LLOYD_MAX_TABLE[bits]
    positive = np.array(positive)
    return _from_levels(np.concatenate((-positive[::-1], positive)))


def lloyd_codebook(bits: int) -> Codebook:
    """
    Regenerate the b-bit Lloyd-Max codebook from the Gaussian quantiles.

    Runs at most settings.lloyd_max_iter Lloyd iterations, then solves the
    fixed-point equations to settings.lloyd_tolerance.
    """
    if not 1 <= bits <= MAX_LLOYD_BITS:
        raise ValueError(f"Lloyd-Max codebooks cover 1..{MAX_LLOYD_BITS} bits, got {bits}")
    levels_count = 2 ** bits
    levels = norm.ppf((np.arange(levels_count) + 0.5) / levels_count)
    for _ in range(settings.lloyd_max_iter):
        updated = _lloyd_step(levels)
        shift = np.max(np.abs(updated - levels))
        levels = updated
        if shift < settings.lloyd_tolerance:
            break
    else:
        solution = root(lambda x: _lloyd_step(x) - x, levels, method="hybr", tol=settings.lloyd_tolerance)
        if solution.success:
            levels = solution.x
        else:
            logger.warning("Lloyd fixed point for %d bits not polished: %s", bits, solution.message)
    # Antisymmetry holds in exact arithmetic; enforce it
    return _from_levels(0.5 * (levels - levels[::-1]))


def _uniform_mse(step: float, levels_count: int) -> float:
    half = levels_count // 2
    levels = (np.arange(-half, half) + 0.5) * step
    thresholds = np.arange(-half + 1, half) * step
    prob, first = _cell_moments(np.concatenate(([-np.inf], thresholds, [np.inf])))
    return float(1.0 - 2.0 * np.sum(levels * first) + np.sum(levels ** 2 * prob))


def _uniform(levels_count: int) -> Codebook:
    result = minimize_scalar(
        _uniform_mse,
        bounds=(1e-6, 16.0 / levels_count),
        args=(levels_count,),
        method="bounded",
        options={"xatol": 1e-12},
    )
    step = float(result.x)
    half = levels_count // 2
    levels = (np.arange(-half, half) + 0.5) * step
    thresholds = np.arange(-half + 1, half) * step
    return Codebook(levels, thresholds, _uniform_mse(step, levels_count))


@lru_cache(maxsize=None)
def gaussian_codebook(bits: int) -> Codebook:
    """Stored Lloyd-Max codebook for b <= 5, MSE-loaded uniform mid-rise codebook above"""
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    if bits <= MAX_LLOYD_BITS:
        codebook = _tabulated(bits)
    else:
        codebook = _uniform(2 ** bits)
    codebook.levels.setflags(write=False)
    codebook.thresholds.setflags(write=False)
    return codebook


def _quantize_real(values: np.ndarray, codebook: Codebook) -> np.ndarray:
    # side='right' maps an exact threshold (incl. 0) to the level above it
    return codebook.levels[np.searchsorted(codebook.thresholds, values, side="right")]


def lloyd_max_quantize(samples, bits: int, rms) -> np.ndarray:
    """
    Quantize I and Q separately after scaling by 1/rms, then rescale.

    ``rms`` is the per-component standard deviation (scalar or broadcastable).
    """
    samples = np.asarray(samples, dtype=complex)
    rms = np.asarray(rms, dtype=float)
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite")
    if np.any(rms <= 0):
        raise ValueError("rms must be positive")
    codebook = gaussian_codebook(bits)
    real = _quantize_real(samples.real / rms, codebook)
    imag = _quantize_real(samples.imag / rms, codebook)
    return (real + 1j * imag) * rms


def quant_noise_variance(profile: AdcProfile, gamma: float, zeta_abs_sq: float, m_per: int) -> float:
    """AQNM noise variance alpha*beta*(gamma*|zeta|^2/M_a + 1) of a low-res chain"""
    return profile.alpha * profile.beta * (gamma * zeta_abs_sq / m_per + 1.0)


def mixed_adc_apply(ideal, profile: AdcProfile, per_chain_rms) -> np.ndarray:
    """
    High-resolution chains pass through, low-resolution chains are quantized.

    ``ideal`` has the M_s chains on its last axis; ``per_chain_rms`` has length M_s.
    """
    ideal = np.asarray(ideal, dtype=complex)
    per_chain_rms = np.asarray(per_chain_rms, dtype=float)
    if ideal.shape[-1] != profile.m_sub:
        raise ValueError(f"expected {profile.m_sub} chains, got {ideal.shape[-1]}")
    if per_chain_rms.shape != (profile.m_sub,):
        raise ValueError(f"expected {profile.m_sub} chain rms values, got shape {per_chain_rms.shape}")
    out = ideal.copy()
    if profile.m_low:
        low = slice(profile.m_high, profile.m_sub)
        out[..., low] = lloyd_max_quantize(ideal[..., low], profile.bits_low, per_chain_rms[low])
    return out
