"""
Array models: ULA geometry, analog beamformer and digital combiner
"""
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def frozen_array(value: Any, dtype=complex) -> np.ndarray:
    """Copy into a read-only numpy array"""
    array = np.array(value, dtype=dtype)
    array.setflags(write=False)
    return array


class ArrayGeometry(BaseModel):
    """Sub-connected uniform linear array, positions in wavelengths"""
    model_config = ConfigDict(frozen=True)

    m_total: int = Field(gt=0)
    m_sub: int = Field(gt=0)
    m_per: int = Field(gt=0)
    spacing: float = Field(default=0.5, gt=0)
    wavelength: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_partition(self) -> "ArrayGeometry":
        if self.m_sub * self.m_per != self.m_total:
            raise ValueError(
                f"m_total={self.m_total} is not m_sub*m_per={self.m_sub}*{self.m_per}"
            )
        return self

    @classmethod
    def from_counts(cls, m_total: int, m_per: int, spacing: float = 0.5) -> "ArrayGeometry":
        """Build from total antennas and antennas per subarray"""
        if m_per <= 0 or m_total % m_per:
            raise ValueError(f"m_per={m_per} does not divide m_total={m_total}")
        return cls(m_total=m_total, m_sub=m_total // m_per, m_per=m_per, spacing=spacing)

    @property
    def positions(self) -> np.ndarray:
        """Element positions d_m = (m-1)d"""
        return np.arange(self.m_total) * self.spacing

    @property
    def subarray_offsets(self) -> np.ndarray:
        """Positions d_{m_s,1} of the first element of each subarray"""
        return np.arange(self.m_sub) * self.m_per * self.spacing

    @property
    def element_offsets(self) -> np.ndarray:
        """Positions d_{1,m_a} inside one subarray"""
        return np.arange(self.m_per) * self.spacing

    @property
    def virtual_spacing(self) -> float:
        """Spacing of the virtual M_s-element array, M_a*d"""
        return self.m_per * self.spacing


class BeamMode(str, Enum):
    """Analog beamformer designs"""
    ALL_ONES = "all_ones"
    COVERAGE = "coverage"


class AnalogBeamformer(BaseModel):
    """Block-diagonal analog combining matrix V_A (M x M_s)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    phase_matrix: np.ndarray
    beam_angles: np.ndarray = Field(default_factory=lambda: frozen_array([], float))
    mode: BeamMode

    @field_validator("phase_matrix")
    @classmethod
    def freeze_matrix(cls, value: Any) -> np.ndarray:
        matrix = frozen_array(value)
        if matrix.ndim != 2:
            raise ValueError("phase_matrix must be two-dimensional")
        return matrix

    @field_validator("beam_angles")
    @classmethod
    def freeze_angles(cls, value: Any) -> np.ndarray:
        return frozen_array(value, float)

    @property
    def m_total(self) -> int:
        return self.phase_matrix.shape[0]

    @property
    def m_sub(self) -> int:
        return self.phase_matrix.shape[1]


class DigitalCombiner(BaseModel):
    """
    Digital phase compensation and energy normalization.

    Both matrices are diagonal; only their diagonals are stored.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    phase_diag: np.ndarray
    energy_diag: np.ndarray

    @field_validator("phase_diag")
    @classmethod
    def check_phases(cls, value: Any) -> np.ndarray:
        phases = frozen_array(value)
        if not np.allclose(np.abs(phases), 1.0):
            raise ValueError("phase_diag entries must have unit modulus")
        return phases

    @field_validator("energy_diag")
    @classmethod
    def check_energies(cls, value: Any) -> np.ndarray:
        energies = frozen_array(value, float)
        if np.any(energies <= 0) or not np.all(np.isfinite(energies)):
            raise ValueError("energy_diag entries must be finite and strictly positive")
        return energies
