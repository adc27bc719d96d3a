"""
Shared fixtures for the DOA toolkit tests
"""
import pytest

from models.array import ArrayGeometry
from services.beamformer import all_ones_ab, design_coverage_ab
from services.quantizer import adc_profile


@pytest.fixture
def ula16x2() -> ArrayGeometry:
    """M=16 antennas in 8 subarrays of 2"""
    return ArrayGeometry.from_counts(16, 2)


@pytest.fixture
def coverage16x2(ula16x2):
    return design_coverage_ab(ula16x2)


@pytest.fixture
def all_ones16x2(ula16x2):
    return all_ones_ab(ula16x2)


@pytest.fixture
def ideal_profile16x2():
    """Every chain on a high-resolution ADC"""
    return adc_profile(m_sub=8, kappa=1.0, bits_low=3)
