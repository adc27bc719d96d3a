"""
Estimator - STB-root-MUSIC over the energy-normalized virtual subarray array
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy.linalg import companion

from models.array import AnalogBeamformer, ArrayGeometry, BeamMode, DigitalCombiner
from models.signal import AdcProfile, CandidateSet, SnapshotBlock
from .beamformer import beam_power_profile, chain_powers, digital_combiner, energy_normalize
from .errors import CoverageError, NoSourceError
from .synth import sample_covariance

logger = logging.getLogger(__name__)

# Leading polynomial coefficients below this fraction of the largest are dropped
COEFF_FLOOR = 1e-14
# Eigenvalue spread below this fraction of the largest eigenvalue means no signal
SPREAD_FLOOR = 1e-12
# Profile scores this close to the best are treated as a tie
PROFILE_TIE = 1e-9


def _polynomial(cov: np.ndarray, sources: int) -> np.ndarray:
    m = cov.shape[0]
    values, vectors = np.linalg.eigh(0.5 * (cov + cov.conj().T))
    top = abs(values[-1])
    if top == 0 or values[-1] - values[0] <= SPREAD_FLOOR * top:
        raise NoSourceError("covariance has no signal subspace")
    noise = vectors[:, :m - sources]
    projector = noise @ noise.conj().T
    # Coefficient of z^k is the sum of the k-th diagonal, highest power first
    coeffs = np.array([np.trace(projector, offset=k) for k in range(m - 1, -m, -1)])
    scale = np.max(np.abs(coeffs))
    start = 0
    while start < coeffs.size - 1 and abs(coeffs[start]) <= COEFF_FLOOR * scale:
        start += 1
    return coeffs[start:]


def root_music(cov, sources: int = 1) -> complex:
    """
    Signal root of the root-MUSIC polynomial of a ULA covariance.

    Picks the root nearest the unit circle and merges its phase with its
    mirrored partner. The returned root has phase psi,
    the inter-element phase of the array.
    """
    cov = np.asarray(cov, dtype=complex)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] < 2:
        raise ValueError(f"covariance must be square with at least 2 rows, got shape {cov.shape}")
    if not 1 <= sources < cov.shape[0]:
        raise ValueError(f"sources must be in [1, {cov.shape[0] - 1}], got {sources}")
    coeffs = _polynomial(cov, sources)
    if coeffs.size < 2:
        raise NoSourceError("root-MUSIC polynomial is constant")
    roots = np.linalg.eigvals(companion(coeffs))

    # Of a mirrored pair r, 1/r the inner root is the nearer one to the circle
    best = int(np.argmin(np.abs(1.0 - np.abs(roots))))
    root = roots[best]

    others = np.delete(roots, best)
    if others.size == 0:
        return complex(root)
    partner = others[np.argmin(np.abs(others - 1.0 / root.conjugate()))]
    phase = np.angle(root) + 0.5 * np.angle(partner * root.conjugate())
    return complex(abs(root) * np.exp(1j * phase))


def candidate_angles(root: complex, geom: ArrayGeometry) -> np.ndarray:
    """All directions in (-pi/2, pi/2) whose virtual-array phase matches the root, ascending"""
    virtual = geom.virtual_spacing / geom.wavelength
    u0 = np.angle(root) / (2 * np.pi * virtual)
    period = 1.0 / virtual
    reach = math.ceil(2.0 / period) + 1
    u = u0 + np.arange(-reach, reach + 1) * period
    u = u[np.abs(u) < 1.0]
    if u.size == 0:
        raise NoSourceError(f"root phase {np.angle(root)} maps to no physical direction")
    return np.sort(np.arcsin(u))


def resolve_ambiguity(candidates: CandidateSet, literal_ambiguity: bool = False) -> float:
    """
    Candidate nearest the strongest beam; ties go to the one nearer broadside.

    ``literal_ambiguity`` switches to the argmax form of the rule, which takes the
    candidate farthest from the strongest beam.
    """
    angles = candidates.angles
    distance = np.abs(angles - candidates.best_beam)
    if literal_ambiguity:
        return float(angles[np.argmax(distance)])
    best = min(range(angles.size), key=lambda i: (distance[i], abs(angles[i])))
    return float(angles[best])


def _profile_score(measured: np.ndarray, predicted: np.ndarray) -> float:
    # Correlation coefficient; invariant to the unknown SNR and noise floor
    m = measured - measured.mean()
    p = predicted - predicted.mean()
    scale = np.linalg.norm(m) * np.linalg.norm(p)
    return float(m @ p / scale) if scale > 0 else 0.0


def match_beam_profile(candidates: CandidateSet, geom: ArrayGeometry, ab: AnalogBeamformer) -> float:
    """
    Candidate whose predicted chain gains |v_ms^H a(theta)|^2 best follow the measured chain powers.

    Uses every chain rather than the strongest one, so a grating lobe that
    nearly matches the main beam cannot pick the alias. Candidates that score
    within PROFILE_TIE of the best go to the nearest-beam rule.
    """
    if candidates.chain_powers.size != ab.m_sub:
        raise ValueError(f"{candidates.chain_powers.size} chain powers for {ab.m_sub} chains")
    predicted = beam_power_profile(geom, ab, candidates.angles)
    scores = np.array([_profile_score(candidates.chain_powers, row) for row in predicted])
    keep = scores >= scores.max() - PROFILE_TIE
    if keep.sum() == 1:
        return float(candidates.angles[np.argmax(keep)])
    return resolve_ambiguity(candidates.model_copy(update={"angles": candidates.angles[keep]}))


def align_residual_signs(chains: SnapshotBlock, powers) -> SnapshotBlock:
    """
    Remove the per-chain +-1 left by the subarray gains after phase compensation.

    The principal eigenvector is c*s_m*exp(j m psi) with s_m = +-1. psi is estimated
    modulo pi from squared neighbour products and fixed by requiring the strongest
    chain and its stronger neighbour to share a sign.
    """
    m_sub = chains.m_sub
    if m_sub < 2:
        return chains
    powers = np.asarray(powers, dtype=float)
    _, vectors = np.linalg.eigh(sample_covariance(chains))
    w = vectors[:, -1]
    psi = 0.5 * np.angle(np.sum((w[1:] * w[:-1].conj()) ** 2))

    strongest = int(np.argmax(powers))
    neighbours = [i for i in (strongest - 1, strongest + 1) if 0 <= i < m_sub]
    neighbour = max(neighbours, key=lambda i: powers[i])

    ramp = np.arange(m_sub)
    rotated = w * np.exp(-1j * ramp * psi)
    if (rotated[neighbour] * rotated[strongest].conjugate()).real < 0:
        psi += np.pi
        rotated = w * np.exp(-1j * ramp * psi)
    signs = np.sign((rotated * rotated[strongest].conjugate()).real)
    signs[signs == 0] = 1.0
    flipped = np.flatnonzero(signs < 0)
    if flipped.size:
        logger.debug("sign-corrected chains %s", flipped.tolist())
    return SnapshotBlock(data=chains.data * signs[None, :], seed_trace=chains.seed_trace)


def stb_root_music(
    block: SnapshotBlock,
    geom: ArrayGeometry,
    ab: AnalogBeamformer,
    combiner: Optional[DigitalCombiner] = None,
    literal_ambiguity: bool = False,
    align_signs: bool = True,
    profile_match: bool = True,
    adc: Optional[AdcProfile] = None,
) -> float:
    """
    DOA estimate in radians from post-ADC chain outputs.

    Requires the coverage analog beamformer. The combiner defaults to one built
    from the block itself. The ambiguity is resolved by ``match_beam_profile``
    unless ``profile_match`` is off, in which case the strongest-beam rule
    applies. ``literal_ambiguity`` selects the farthest-candidate variant of that
    rule and overrides both. When ``adc`` is given, the powers of the
    low-resolution chains are divided by alpha before matching.
    """
    if ab.mode is not BeamMode.COVERAGE:
        raise CoverageError("the estimator needs the coverage analog beamformer")
    if block.m_sub != ab.m_sub:
        raise ValueError(f"block has {block.m_sub} chains, beamformer has {ab.m_sub}")
    if combiner is None:
        combiner = digital_combiner(geom, ab, block)
    powers = chain_powers(block)
    normalized = energy_normalize(block, combiner)
    if align_signs:
        normalized = align_residual_signs(normalized, powers)
    root = root_music(sample_covariance(normalized))
    if adc is not None and adc.m_low:
        if adc.m_sub != block.m_sub:
            raise ValueError(f"ADC profile has {adc.m_sub} chains, block has {block.m_sub}")
        powers = powers.copy()
        powers[adc.m_high:] /= adc.alpha
    candidates = CandidateSet(
        angles=candidate_angles(root, geom),
        chain_powers=powers,
        best_beam=float(ab.beam_angles[int(np.argmax(powers))]),
    )
    if profile_match and not literal_ambiguity:
        return match_beam_profile(candidates, geom, ab)
    return resolve_ambiguity(candidates, literal_ambiguity)
