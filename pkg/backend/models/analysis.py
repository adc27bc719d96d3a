"""
Analysis models: Fisher information, bounds and receiver power
"""
import math
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .signal import QuantNoiseModel

DEG2_PER_RAD2 = (180.0 / math.pi) ** 2


class ClosedFormIngredients(BaseModel):
    """Scalar building blocks of the all-ones-AB Fisher information"""
    model_config = ConfigDict(frozen=True)

    zeta: complex
    xi: float
    gamma_cap: complex
    mu: float
    nu: float
    phi: float
    quant_noise: QuantNoiseModel

    @property
    def zeta_abs_sq(self) -> float:
        return abs(self.zeta) ** 2


class FisherReport(BaseModel):
    """Per-snapshot Fisher information over (gamma, theta0) and derived bounds"""
    model_config = ConfigDict(frozen=True)

    f_gamma_gamma: float
    f_gamma_theta: float
    f_theta_theta: float
    snapshots: Optional[int] = None
    crlb_rad2: Optional[float] = None
    crlb_deg2: Optional[float] = None
    crlb_joint_rad2: Optional[float] = None
    crlb_joint_deg2: Optional[float] = None
    eta_pl: Optional[float] = None

    @property
    def matrix(self) -> np.ndarray:
        """2x2 Fisher matrix ordered (gamma, theta0)"""
        return np.array([
            [self.f_gamma_gamma, self.f_gamma_theta],
            [self.f_gamma_theta, self.f_theta_theta],
        ])


class PowerModel(BaseModel):
    """Receiver component powers (mW) and ADC figure-of-merit constants"""
    model_config = ConfigDict(frozen=True)

    p_aps: float = Field(default=1.0, gt=0)
    p_lna: float = Field(default=20.0, gt=0)
    p_mix: float = Field(default=30.3, gt=0)
    p_fil: float = Field(default=2.5, gt=0)
    p_ifa: float = Field(default=3.0, gt=0)
    p_syc: float = Field(default=50.5, gt=0)
    p_agc: float = Field(default=2.0, gt=0)
    v_dd: float = Field(default=3.0, gt=0)
    bandwidth: float = Field(default=20e6, gt=0)
    l_min: float = Field(default=0.5e-6, gt=0)
    f_cor: float = Field(default=1e6, gt=0)


class PowerBudget(BaseModel):
    """Total receiver power in watts with its breakdown"""
    model_config = ConfigDict(frozen=True)

    p_total: float
    breakdown: Dict[str, float]
    chi: int = Field(ge=0, le=1)
    eta_ee: Optional[float] = None

    @model_validator(mode="after")
    def check_sum(self) -> "PowerBudget":
        if not math.isclose(self.p_total, sum(self.breakdown.values()), rel_tol=1e-12):
            raise ValueError("p_total must equal the sum of its breakdown")
        return self
