"""
Signal models: ADC profile, source truth, snapshot blocks and DOA candidates
"""
import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .array import frozen_array


class AdcProfile(BaseModel):
    """Split of the RF chains into high- and low-resolution ADCs"""
    model_config = ConfigDict(frozen=True)

    bits_low: int = Field(ge=1)
    m_high: int = Field(ge=0)
    m_low: int = Field(ge=0)
    beta: float = Field(ge=0.0, lt=1.0)  # distortion factor of the low-res ADCs
    bits_high: int = Field(default=12, ge=1)

    @model_validator(mode="after")
    def check_chains(self) -> "AdcProfile":
        if self.m_high + self.m_low == 0:
            raise ValueError("profile needs at least one RF chain")
        return self

    @property
    def m_sub(self) -> int:
        return self.m_high + self.m_low

    @property
    def kappa(self) -> float:
        """Proportion of high-resolution chains M_0/M_s"""
        return self.m_high / self.m_sub

    @property
    def alpha(self) -> float:
        """AQNM gain 1 - beta"""
        return 1.0 - self.beta


class QuantNoiseModel(BaseModel):
    """AQNM noise of one low-resolution chain"""
    model_config = ConfigDict(frozen=True)

    sigma_q_sq: float = Field(ge=0.0)


class SourceTruth(BaseModel):
    """Single far-field source seen by the array"""
    model_config = ConfigDict(frozen=True)

    theta0: float
    gamma: float = Field(ge=0.0)
    snapshots: int = Field(ge=1)

    @field_validator("theta0")
    @classmethod
    def check_direction(cls, value: float) -> float:
        if not (-math.pi / 2 < value < math.pi / 2):
            raise ValueError(f"theta0={value} rad is outside (-pi/2, pi/2)")
        return value


class SnapshotBlock(BaseModel):
    """N x M_s post-ADC RF-chain outputs"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    data: np.ndarray
    seed_trace: str = ""

    @field_validator("data")
    @classmethod
    def check_data(cls, value: Any) -> np.ndarray:
        data = frozen_array(value)
        if data.ndim != 2:
            raise ValueError("snapshot data must be an N x M_s matrix")
        if not np.all(np.isfinite(data)):
            raise ValueError("snapshot data contains non-finite entries")
        return data

    @property
    def snapshots(self) -> int:
        return self.data.shape[0]

    @property
    def m_sub(self) -> int:
        return self.data.shape[1]


class CandidateSet(BaseModel):
    """Ambiguous DOA candidates and the beam power used to pick one"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    angles: np.ndarray
    chain_powers: np.ndarray
    best_beam: float

    @field_validator("angles")
    @classmethod
    def check_angles(cls, value: Any) -> np.ndarray:
        angles = frozen_array(value, float)
        if angles.size == 0:
            raise ValueError("candidate set is empty")
        if np.any(np.abs(angles) >= math.pi / 2):
            raise ValueError("candidates must lie in (-pi/2, pi/2)")
        return angles

    @field_validator("chain_powers")
    @classmethod
    def check_powers(cls, value: Any) -> np.ndarray:
        powers = frozen_array(value, float)
        if np.any(powers < 0):
            raise ValueError("chain powers must be nonnegative")
        return powers
