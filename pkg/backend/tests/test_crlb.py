import itertools
import math

import numpy as np
import numpy.testing as npt
import pytest

from models.array import ArrayGeometry
from services.beamformer import all_ones_ab
from services.crlb import (
    closed_form_ingredients,
    crlb_joint,
    crlb_theta,
    fim_closed_form,
    fim_numerical_oracle,
    fisher_discrepancy,
    fisher_report,
    ideal_crlb,
    ideal_geometry,
    ideal_profile,
    performance_loss,
    performance_loss_ratio,
    population_covariance,
)
from services.errors import UnboundedVarianceError
from services.quantizer import adc_profile

THETA15 = math.radians(15)


def _setup(m_total, m_per, kappa, bits, beta=None):
    geom = ArrayGeometry.from_counts(m_total, m_per)
    return geom, adc_profile(geom.m_sub, kappa, bits, beta=beta)


GRID = list(itertools.product(
    [16, 32], [1, 2, 4], [0.0, 0.25, 0.5, 1.0], [1, 3], [0.1, 10.0], [-30.0, 0.0, 45.0],
))


@pytest.mark.parametrize("m_total, m_per, kappa, bits, gamma, theta_deg", GRID)
def test_closed_form_matches_oracle(m_total, m_per, kappa, bits, gamma, theta_deg):
    geom, profile = _setup(m_total, m_per, kappa, bits)
    theta = math.radians(theta_deg)
    closed = fim_closed_form(geom, profile, gamma, theta)
    oracle = fim_numerical_oracle(geom, all_ones_ab(geom), profile, gamma, theta)
    ideal = fim_closed_form(ideal_geometry(geom), ideal_profile(geom, profile), gamma, theta)
    assert fisher_discrepancy(closed, oracle, ideal, floor=1e-3) < 1e-8


def test_reduces_to_classical_ula_bound():
    geom, profile = _setup(128, 1, 1.0, 3)
    rad2, deg2 = crlb_theta(fim_closed_form(geom, profile, 1.0, THETA15), 32)
    assert rad2 == pytest.approx(ideal_crlb(geom, 1.0, THETA15, 32), rel=1e-10)
    assert rad2 == pytest.approx(9.786e-9, rel=1e-3)
    assert deg2 == pytest.approx(rad2 * (180 / math.pi) ** 2)


def test_broadside_ingredients():
    geom, profile = _setup(16, 4, 1.0, 3)
    ing = closed_form_ingredients(geom, profile, 1.0, 0.0)
    assert ing.zeta == pytest.approx(4.0)
    assert ing.gamma_cap == pytest.approx(0.5 + 1.0 + 1.5)
    assert ing.xi == pytest.approx(4.0)
    assert ing.mu == pytest.approx(0.0 + 2.0 + 4.0 + 6.0)


@pytest.mark.parametrize("m_per, theta_deg", [(1, 15.0), (1, -50.0), (2, 0.0), (4, 0.0)])
def test_cross_term_vanishes(m_per, theta_deg):
    geom, profile = _setup(32, m_per, 0.5, 2)
    theta = math.radians(theta_deg)
    closed = fim_closed_form(geom, profile, 1.0, theta)
    oracle = fim_numerical_oracle(geom, all_ones_ab(geom), profile, 1.0, theta)
    scale = np.linalg.norm(oracle.matrix)
    assert abs(closed.f_gamma_theta) / scale < 1e-12
    assert abs(oracle.f_gamma_theta) / scale < 1e-10


def test_cross_term_nonzero_with_subarrays():
    geom, profile = _setup(32, 2, 0.5, 2)
    closed = fim_closed_form(geom, profile, 1.0, THETA15)
    oracle = fim_numerical_oracle(geom, all_ones_ab(geom), profile, 1.0, THETA15)
    assert abs(closed.f_gamma_theta) > 1e-6
    assert closed.f_gamma_theta == pytest.approx(oracle.f_gamma_theta, rel=1e-8)


@pytest.mark.parametrize("bits", range(1, 9))
@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("theta_deg", [-60.0, 0.0, 15.0, 45.0])
def test_ideal_array_has_no_loss(bits, gamma, theta_deg):
    geom, profile = _setup(32, 1, 1.0, bits)
    theta = math.radians(theta_deg)
    assert performance_loss(geom, profile, gamma, theta) == pytest.approx(1.0, abs=1e-10)
    assert performance_loss_ratio(geom, profile, gamma, theta) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("m_per", [1, 2, 4])
def test_ideal_quantizer_matches_all_high_resolution(m_per):
    geom, ideal = _setup(32, m_per, 1.0, 3)
    _, lossless = _setup(32, m_per, 0.25, 3, beta=0.0)
    expected = fim_closed_form(geom, ideal, 1.0, THETA15).matrix
    npt.assert_allclose(fim_closed_form(geom, lossless, 1.0, THETA15).matrix, expected, rtol=1e-10)


@pytest.mark.parametrize("m_total, m_per, kappa, bits", [(128, 4, 0.25, 3), (64, 2, 0.5, 1), (32, 4, 0.0, 2)])
@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("theta_deg", [-60.0, -30.0, 0.0, 15.0])
def test_loss_formula_matches_ratio(m_total, m_per, kappa, bits, gamma, theta_deg):
    geom, profile = _setup(m_total, m_per, kappa, bits)
    theta = math.radians(theta_deg)
    formula = performance_loss(geom, profile, gamma, theta)
    assert formula >= 1.0 - 1e-9
    assert performance_loss_ratio(geom, profile, gamma, theta) == pytest.approx(formula, rel=1e-10)


def test_dirichlet_null_is_unbounded():
    geom, profile = _setup(16, 4, 0.25, 3)
    theta = math.radians(30)
    entries = fim_closed_form(geom, profile, 1.0, theta)
    with pytest.raises(UnboundedVarianceError):
        crlb_theta(entries, 32)
    with pytest.raises(UnboundedVarianceError):
        crlb_joint(entries, 32)
    assert math.isinf(performance_loss(geom, profile, 1.0, theta))
    report = fisher_report(geom, profile, 1.0, theta, 32)
    assert math.isinf(report.crlb_deg2) and math.isinf(report.eta_pl)


def test_joint_bound_is_not_smaller():
    geom, profile = _setup(64, 2, 0.25, 2)
    report = fisher_report(geom, profile, 1.0, THETA15, 32)
    assert report.crlb_joint_rad2 >= report.crlb_rad2
    assert report.crlb_joint_deg2 == pytest.approx(report.crlb_joint_rad2 * (180 / math.pi) ** 2)


@pytest.mark.parametrize("m_per", [1, 4])
@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
def test_loss_decreases_with_bits(m_per, gamma):
    geom = ArrayGeometry.from_counts(128, m_per)
    losses = [
        performance_loss(geom, adc_profile(geom.m_sub, 0.25, b), gamma, THETA15)
        for b in range(1, 9)
    ]
    assert all(a > b for a, b in zip(losses, losses[1:]))
    assert losses[4] - losses[7] < 0.05 * losses[0]


@pytest.mark.parametrize("bits", [2, 3])
def test_loss_decreases_with_antennas_and_flattens_at_high_snr(bits):
    sizes = [32, 64, 128, 256, 512, 1024]

    def curve(gamma):
        return [
            performance_loss(g, adc_profile(g.m_sub, 0.25, bits), gamma, THETA15)
            for g in (ArrayGeometry.from_counts(m, 4) for m in sizes)
        ]

    low, high = curve(0.1), curve(10.0)
    assert all(a > b for a, b in zip(low, low[1:]))
    assert abs(high[0] - high[-1]) / high[0] < abs(low[0] - low[-1]) / low[0]


def test_non_ideal_loss_exceeds_one():
    geom, profile = _setup(128, 4, 0.25, 3)
    assert performance_loss(geom, profile, 1.0, THETA15) > 1.0


def test_coverage_report_uses_oracle(ula16x2, coverage16x2):
    profile = adc_profile(8, 0.25, 3)
    report = fisher_report(ula16x2, profile, 1.0, THETA15, 32, ab=coverage16x2)
    oracle = fim_numerical_oracle(ula16x2, coverage16x2, profile, 1.0, THETA15)
    assert report.f_theta_theta == oracle.f_theta_theta
    assert report.crlb_rad2 == pytest.approx(1 / (32 * oracle.f_theta_theta))


def test_population_covariance_is_positive_definite(ula16x2, coverage16x2):
    r = population_covariance(ula16x2, coverage16x2, adc_profile(8, 0.5, 2), 10.0, THETA15)
    npt.assert_allclose(r, r.conj().T)
    assert np.all(np.linalg.eigvalsh(r) > 0)


def test_snapshot_count_is_checked():
    geom, profile = _setup(16, 2, 1.0, 3)
    with pytest.raises(ValueError):
        crlb_theta(fim_closed_form(geom, profile, 1.0, THETA15), 0)
