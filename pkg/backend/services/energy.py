"""
Energy - receiver power consumption and the energy-efficiency factor
"""
import math
from typing import Optional

from config import settings
from models.analysis import PowerBudget, PowerModel
from models.array import ArrayGeometry
from models.signal import AdcProfile

MW = 1e-3


def power_model_from_settings() -> PowerModel:
    """PowerModel with the constants configured in settings"""
    return PowerModel(
        p_aps=settings.p_aps_mw,
        p_lna=settings.p_lna_mw,
        p_mix=settings.p_mix_mw,
        p_fil=settings.p_fil_mw,
        p_ifa=settings.p_ifa_mw,
        p_syc=settings.p_syc_mw,
        p_agc=settings.p_agc_mw,
        v_dd=settings.v_dd,
        bandwidth=settings.bandwidth_hz,
        l_min=settings.l_min_m,
        f_cor=settings.f_cor_hz,
    )


def adc_power(model: PowerModel, bits: int) -> float:
    """ADC power in watts, 3 V_dd^2 L_min (f_cor + 2B) / 10^(4.838 - 0.1525 b)"""
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    numerator = 3 * model.v_dd ** 2 * model.l_min * (model.f_cor + 2 * model.bandwidth)
    return numerator / 10 ** (4.838 - 0.1525 * bits)


def total_power(geom: ArrayGeometry, profile: AdcProfile, model: Optional[PowerModel] = None) -> PowerBudget:
    """
    Receiver power P_t in watts.

    Low-resolution chains carry an AGC unless they are 1-bit.
    """
    if profile.m_sub != geom.m_sub:
        raise ValueError(f"profile has {profile.m_sub} chains, geometry has {geom.m_sub} subarrays")
    model = model or power_model_from_settings()
    chi = 0 if profile.bits_low == 1 else 1
    per_chain = model.p_lna + model.p_mix + model.p_fil + model.p_ifa
    breakdown = {
        "phase_shifters": geom.m_total * model.p_aps * MW,
        "rf_chains": (geom.m_sub * per_chain + model.p_syc) * MW,
        "high_res_adcs": profile.m_high * (model.p_agc * MW + adc_power(model, profile.bits_high)),
        "low_res_adcs": profile.m_low * (chi * model.p_agc * MW + adc_power(model, profile.bits_low)),
    }
    return PowerBudget(p_total=sum(breakdown.values()), breakdown=breakdown, chi=chi)


def energy_efficiency(crlb_deg2: float, p_total: float) -> float:
    """eta_EE = crlb^-1/2 / P_t in 1/degree/W; zero for an unbounded CRLB"""
    if not crlb_deg2 > 0 or not p_total > 0:
        raise ValueError(f"crlb_deg2={crlb_deg2} and p_total={p_total} must be positive")
    if math.isinf(crlb_deg2):
        return 0.0
    return 1.0 / (math.sqrt(crlb_deg2) * p_total)
