"""
Experiment models: run configuration, sweep axes and validation reports
"""
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .array import ArrayGeometry, BeamMode


class SweepAxis(str, Enum):
    """Parameters an experiment can sweep"""
    SNR_DB = "snr_db"
    BITS = "bits"
    M_TOTAL = "m_total"
    KAPPA = "kappa"
    THETA0 = "theta0"


AXIS_FIELDS = {
    SweepAxis.SNR_DB: "snr_db",
    SweepAxis.BITS: "bits_low",
    SweepAxis.M_TOTAL: "m_total",
    SweepAxis.KAPPA: "kappa",
    SweepAxis.THETA0: "theta0_deg",
}

INTEGER_AXES = {SweepAxis.BITS, SweepAxis.M_TOTAL}


class ExperimentConfig(BaseModel):
    """
    Fully resolved experiment parameters.

    Defaults:
    M=128, kappa=1/4, N=32, theta0=15 deg.
    """
    model_config = ConfigDict(frozen=True)

    m_total: int = Field(default=128, gt=0)
    m_per: int = Field(default=4, gt=0)
    spacing: float = Field(default=0.5, gt=0)
    kappa: float = Field(default=0.25, ge=0.0, le=1.0)
    bits_low: int = Field(default=3, ge=1)
    bits_high: int = Field(default=12, ge=1)
    snr_db: float = 0.0
    theta0_deg: float = 15.0
    snapshots: int = Field(default=32, ge=1)
    trials: int = Field(default=2000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    sweep_axis: Optional[SweepAxis] = None
    sweep_values: List[float] = Field(default_factory=list)
    ab_mode: BeamMode = BeamMode.ALL_ONES
    literal_ambiguity: bool = False
    align_signs: bool = True
    profile_match: bool = True
    workers: Optional[int] = Field(default=None, ge=1)
    output: Optional[str] = None

    @field_validator("theta0_deg")
    @classmethod
    def check_theta(cls, value: float) -> float:
        if not (-90.0 < value < 90.0):
            raise ValueError(f"theta0_deg={value} is outside (-90, 90)")
        return value

    @model_validator(mode="after")
    def check_sweep(self) -> "ExperimentConfig":
        if self.m_total % self.m_per:
            raise ValueError(f"m_per={self.m_per} does not divide m_total={self.m_total}")
        if self.sweep_axis is None:
            if self.sweep_values:
                raise ValueError("sweep_values given without a sweep axis")
            return self
        values = self.sweep_values
        if not values:
            raise ValueError("sweep axis needs at least one value")
        steps = [b - a for a, b in zip(values, values[1:])]
        if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise ValueError("sweep values must be strictly ordered")
        if self.sweep_axis in INTEGER_AXES and any(v != int(v) for v in values):
            raise ValueError(f"{self.sweep_axis.value} sweep needs integer values")
        return self

    @property
    def gamma(self) -> float:
        """Linear SNR"""
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def theta0(self) -> float:
        return math.radians(self.theta0_deg)

    @property
    def m_sub(self) -> int:
        return self.m_total // self.m_per

    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry.from_counts(self.m_total, self.m_per, self.spacing)

    def at(self, value: float) -> "ExperimentConfig":
        """Configuration of one sweep point, with the sweep itself removed"""
        if self.sweep_axis is None:
            return self
        field = AXIS_FIELDS[self.sweep_axis]
        if self.sweep_axis in INTEGER_AXES:
            value = int(value)
        data = self.model_dump(exclude={"sweep_axis", "sweep_values"})
        data[field] = value
        return type(self)(**data)

    def points(self) -> List[Tuple[int, Optional[float], "ExperimentConfig"]]:
        """(axis index, axis value, resolved config) for every sweep point"""
        if self.sweep_axis is None:
            return [(0, None, self)]
        return [(i, v, self.at(v)) for i, v in enumerate(self.sweep_values)]

    def flat(self) -> Dict[str, Any]:
        """Scalar parameters as CSV-ready columns"""
        return self.model_dump(
            mode="json", exclude={"sweep_axis", "sweep_values", "workers", "output"}
        )


class ValidationReport(BaseModel):
    """Closed-form versus oracle Fisher agreement over a grid"""
    points: int
    tolerance: float
    max_discrepancy: float
    worst_point: Optional[Dict[str, Any]] = None
    failing_points: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance


class ValidationRequest(BaseModel):
    """Validate over the acceptance grid or at the configured point only"""
    grid: str = Field(default="acceptance", pattern="^(acceptance|point)$")
    config: ExperimentConfig = Field(default_factory=ExperimentConfig)
