"""
CRLB - closed-form Fisher information of the mixed-ADC HAD receiver and a dense trace oracle

Fisher entries are per snapshot and ordered (gamma, theta0). Bounds divide by N.
"""
import math
from typing import Optional, Tuple

import numpy as np

from models.analysis import DEG2_PER_RAD2, ClosedFormIngredients, FisherReport
from models.array import AnalogBeamformer, ArrayGeometry, BeamMode
from models.signal import AdcProfile, QuantNoiseModel
from .array_model import check_direction, steering_derivative, steering_vector
from .beamformer import all_ones_ab, apply_analog
from .errors import UnboundedVarianceError
from .quantizer import quant_noise_variance

# phi below this fraction of its beam-aligned scale is a Dirichlet null
NULL_RELATIVE = 1e-20


def _check_chains(geom: ArrayGeometry, profile: AdcProfile) -> None:
    if profile.m_sub != geom.m_sub:
        raise ValueError(f"profile has {profile.m_sub} chains, geometry has {geom.m_sub} subarrays")


def _chain_weights(profile: AdcProfile, sigma_q_sq: float) -> np.ndarray:
    # T^2/Q per chain: 1 on high-res chains, alpha^2/(alpha^2 + sigma_q^2) on low-res chains
    weights = np.ones(profile.m_sub)
    alpha_sq = profile.alpha ** 2
    weights[profile.m_high:] = alpha_sq / (alpha_sq + sigma_q_sq)
    return weights


def closed_form_ingredients(
    geom: ArrayGeometry, profile: AdcProfile, gamma: float, theta0: float
) -> ClosedFormIngredients:
    """zeta, xi, Gamma, mu, nu and phi for the all-ones analog beamformer"""
    theta0 = check_direction(theta0)
    _check_chains(geom, profile)
    offsets = geom.element_offsets
    # Direct summation; no 0/0 at theta0 = 0
    phases = np.exp(2j * np.pi * offsets * math.sin(theta0) / geom.wavelength)
    zeta = complex(phases.sum())
    gamma_cap = complex((offsets * phases).sum())
    z = abs(zeta) ** 2

    sigma_q_sq = quant_noise_variance(profile, gamma, z, geom.m_per)
    weights = _chain_weights(profile, sigma_q_sq)
    subarray = geom.subarray_offsets
    xi = float(weights.sum())
    mu = float((weights * subarray).sum())
    nu = float((weights * subarray ** 2).sum())

    energy = gamma * xi * z + geom.m_per
    cross = z * abs(gamma_cap) ** 2 - ((gamma_cap.conjugate() * zeta) ** 2).real
    phi = z ** 2 * (xi * nu - mu ** 2) * energy + geom.m_per * xi ** 2 * cross
    return ClosedFormIngredients(
        zeta=zeta,
        xi=xi,
        gamma_cap=gamma_cap,
        mu=mu,
        nu=nu,
        phi=float(phi),
        quant_noise=QuantNoiseModel(sigma_q_sq=sigma_q_sq),
    )


def _is_null(geom: ArrayGeometry, ing: ClosedFormIngredients, gamma: float) -> bool:
    m_a = geom.m_per
    aligned = m_a ** 4 * ing.xi * ing.nu * (gamma * ing.xi * m_a ** 2 + m_a)
    return ing.phi <= NULL_RELATIVE * aligned


def fim_closed_form(geom: ArrayGeometry, profile: AdcProfile, gamma: float, theta0: float) -> FisherReport:
    """
    Closed-form Fisher entries for the all-ones analog beamformer.

    F_gg = (xi|zeta|^2/E)^2 and F_tt = 8pi^2 gamma^2 cos^2(theta0) phi / (lambda^2 M_a E^2),
    E = gamma*xi*|zeta|^2 + M_a. The cross entry is
    F_gt = -2 gamma c xi^2 |zeta|^2 Im(conj(zeta) Gamma) / E^2 with c = 2pi cos(theta0)/lambda,
    which is zero only for M_a = 1 or theta0 = 0.
    """
    ing = closed_form_ingredients(geom, profile, gamma, theta0)
    z = ing.zeta_abs_sq
    energy = gamma * ing.xi * z + geom.m_per
    c = 2 * math.pi * math.cos(theta0) / geom.wavelength
    phi = 0.0 if _is_null(geom, ing, gamma) else ing.phi
    return FisherReport(
        f_gamma_gamma=(ing.xi * z / energy) ** 2,
        f_gamma_theta=-2 * gamma * c * ing.xi ** 2 * z * (ing.zeta.conjugate() * ing.gamma_cap).imag / energy ** 2,
        f_theta_theta=2 * gamma ** 2 * c ** 2 * phi / (geom.m_per * energy ** 2),
    )


def crlb_theta(report: FisherReport, snapshots: int) -> Tuple[float, float]:
    """Direction bound 1/(N F_tt) in rad^2 and deg^2 (SNR treated as known)"""
    if snapshots < 1:
        raise ValueError(f"snapshots must be >= 1, got {snapshots}")
    if not report.f_theta_theta > 0 or not math.isfinite(report.f_theta_theta):
        raise UnboundedVarianceError(f"F_theta_theta={report.f_theta_theta} is not positive")
    rad2 = 1.0 / (snapshots * report.f_theta_theta)
    return rad2, rad2 * DEG2_PER_RAD2


def crlb_joint(report: FisherReport, snapshots: int) -> Tuple[float, float]:
    """Direction entry of F^-1/N in rad^2 and deg^2 (SNR unknown)"""
    if snapshots < 1:
        raise ValueError(f"snapshots must be >= 1, got {snapshots}")
    det = report.f_gamma_gamma * report.f_theta_theta - report.f_gamma_theta ** 2
    if not det > 0:
        raise UnboundedVarianceError(f"Fisher determinant {det} is not positive")
    rad2 = report.f_gamma_gamma / (snapshots * det)
    return rad2, rad2 * DEG2_PER_RAD2


def ideal_geometry(geom: ArrayGeometry) -> ArrayGeometry:
    """Fully digital array with the same M, d and lambda"""
    return ArrayGeometry(
        m_total=geom.m_total, m_sub=geom.m_total, m_per=1,
        spacing=geom.spacing, wavelength=geom.wavelength,
    )


def ideal_profile(geom: ArrayGeometry, profile: AdcProfile) -> AdcProfile:
    """High-resolution ADC on every antenna"""
    return AdcProfile(
        bits_low=profile.bits_low, m_high=geom.m_total, m_low=0,
        beta=profile.beta, bits_high=profile.bits_high,
    )


def ideal_crlb(geom: ArrayGeometry, gamma: float, theta0: float, snapshots: int) -> float:
    """Reduced closed form for M_a = 1, kappa = 1: 3 lambda^2 (gamma M + 1) / (2 N pi^2 gamma^2 cos^2 d^2 M^2 (M^2 - 1))"""
    theta0 = check_direction(theta0)
    m = geom.m_total
    denominator = (
        2 * snapshots * math.pi ** 2 * gamma ** 2 * math.cos(theta0) ** 2
        * geom.spacing ** 2 * m ** 2 * (m ** 2 - 1)
    )
    if not denominator > 0:
        raise UnboundedVarianceError("ideal Fisher information is zero")
    return 3 * geom.wavelength ** 2 * (gamma * m + 1) / denominator


def performance_loss(geom: ArrayGeometry, profile: AdcProfile, gamma: float, theta0: float) -> float:
    """
    eta_PL = M_a E^2 d^2 M^2 (M^2 - 1) / (12 (gamma M + 1) phi), the CRLB ratio to the
    fully digital, high-resolution array. Infinite at Dirichlet nulls.
    """
    ing = closed_form_ingredients(geom, profile, gamma, theta0)
    if _is_null(geom, ing, gamma):
        return math.inf
    m = geom.m_total
    energy = gamma * ing.xi * ing.zeta_abs_sq + geom.m_per
    d = geom.spacing
    return geom.m_per * energy ** 2 * d ** 2 * m ** 2 * (m ** 2 - 1) / (12 * (gamma * m + 1) * ing.phi)


def performance_loss_ratio(geom: ArrayGeometry, profile: AdcProfile, gamma: float, theta0: float) -> float:
    """eta_PL as crlb / crlb_ideal with every shared parameter held equal"""
    degraded = fim_closed_form(geom, profile, gamma, theta0)
    ideal = fim_closed_form(ideal_geometry(geom), ideal_profile(geom, profile), gamma, theta0)
    if degraded.f_theta_theta <= 0:
        return math.inf
    return ideal.f_theta_theta / degraded.f_theta_theta


def _aqnm_terms(
    geom: ArrayGeometry, ab: AnalogBeamformer, profile: AdcProfile, gamma: float, theta0: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # u = T V^H a, u' = T V^H a', diag(Q)
    _check_chains(geom, profile)
    if ab.m_sub != profile.m_sub or ab.m_total != geom.m_total:
        raise ValueError("beamformer shape does not match the geometry")
    g = apply_analog(ab, steering_vector(geom, theta0))
    g_dot = apply_analog(ab, steering_derivative(geom, theta0))
    gain = np.ones(profile.m_sub)
    gain[profile.m_high:] = profile.alpha
    q = np.ones(profile.m_sub)
    low = np.abs(g[profile.m_high:]) ** 2
    q[profile.m_high:] = profile.alpha ** 2 + quant_noise_variance(profile, gamma, geom.m_per * low, geom.m_per)
    return gain * g, gain * g_dot, q


def population_covariance(
    geom: ArrayGeometry, ab: AnalogBeamformer, profile: AdcProfile, gamma: float, theta0: float
) -> np.ndarray:
    """AQNM covariance R_y = gamma T V^H a a^H V T^H + Q"""
    u, _, q = _aqnm_terms(geom, ab, profile, gamma, theta0)
    return gamma * np.outer(u, u.conj()) + np.diag(q)


def fim_numerical_oracle(
    geom: ArrayGeometry, ab: AnalogBeamformer, profile: AdcProfile, gamma: float, theta0: float
) -> FisherReport:
    """
    Fisher entries Re tr(R^-1 dR_i R^-1 dR_j) from a dense inverse of R_y.

    Q is held fixed in both derivatives, as in the closed form.
    """
    u, u_dot, q = _aqnm_terms(geom, ab, profile, gamma, theta0)
    r = gamma * np.outer(u, u.conj()) + np.diag(q)
    r_inv = np.linalg.inv(r)
    d_gamma = np.outer(u, u.conj())
    d_theta = gamma * (np.outer(u_dot, u.conj()) + np.outer(u, u_dot.conj()))
    a = r_inv @ d_gamma
    b = r_inv @ d_theta
    return FisherReport(
        f_gamma_gamma=float(np.sum(a * a.T).real),
        f_gamma_theta=float(np.sum(a * b.T).real),
        f_theta_theta=float(np.sum(b * b.T).real),
    )


def fisher_discrepancy(
    closed: FisherReport, oracle: FisherReport, ideal: FisherReport, floor: float
) -> float:
    """Worst entry of |closed - oracle| / max(|oracle|, floor * sqrt(F_ii F_jj) of the ideal array)"""
    c, o, i = closed.matrix, oracle.matrix, ideal.matrix
    scale = floor * np.sqrt(np.outer(np.diag(i), np.diag(i)))
    return float(np.max(np.abs(c - o) / np.maximum(np.abs(o), scale)))


def fisher_report(
    geom: ArrayGeometry,
    profile: AdcProfile,
    gamma: float,
    theta0: float,
    snapshots: int,
    ab: Optional[AnalogBeamformer] = None,
    use_oracle: bool = False,
) -> FisherReport:
    """
    Fisher entries with both bounds and eta_PL filled in.

    Uses the closed form unless a non-all-ones beamformer is given or ``use_oracle``
    is set, in which case the oracle supplies the entries. Unbounded directions
    report infinity.
    """
    if ab is not None and ab.mode is not BeamMode.ALL_ONES:
        use_oracle = True
    if use_oracle:
        entries = fim_numerical_oracle(geom, ab or all_ones_ab(geom), profile, gamma, theta0)
    else:
        entries = fim_closed_form(geom, profile, gamma, theta0)
    try:
        rad2, deg2 = crlb_theta(entries, snapshots)
    except UnboundedVarianceError:
        rad2 = deg2 = math.inf
    try:
        joint_rad2, joint_deg2 = crlb_joint(entries, snapshots)
    except UnboundedVarianceError:
        joint_rad2 = joint_deg2 = math.inf
    return entries.model_copy(update={
        "snapshots": snapshots,
        "crlb_rad2": rad2,
        "crlb_deg2": deg2,
        "crlb_joint_rad2": joint_rad2,
        "crlb_joint_deg2": joint_deg2,
        "eta_pl": performance_loss(geom, profile, gamma, theta0),
    })
