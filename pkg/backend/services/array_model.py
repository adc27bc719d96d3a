"""
Array model - ULA manifold, its derivative and the Kronecker position structure
"""
import math
from typing import Tuple

import numpy as np

from models.array import ArrayGeometry
from .errors import InvalidDirectionError


def check_direction(theta: float) -> float:
    """Reject directions outside the open interval (-pi/2, pi/2)"""
    theta = float(theta)
    if not math.isfinite(theta) or not (-math.pi / 2 < theta < math.pi / 2):
        raise InvalidDirectionError(f"theta={theta} rad is outside (-pi/2, pi/2)")
    return theta


def steering_vector(geom: ArrayGeometry, theta: float) -> np.ndarray:
    """
    Array manifold a(theta) with the first element as phase reference.

    Entry m is exp(j*2*pi*sin(theta)*d_m/lambda), d_m = (m-1)d.
    """
    theta = check_direction(theta)
    return np.exp(2j * np.pi * math.sin(theta) * geom.positions / geom.wavelength)


def steering_derivative(geom: ArrayGeometry, theta: float) -> np.ndarray:
    """da/dtheta = j(2pi/lambda)cos(theta) D a(theta)"""
    a = steering_vector(geom, theta)
    return 1j * (2 * np.pi / geom.wavelength) * math.cos(theta) * geom.positions * a


def position_matrices(geom: ArrayGeometry) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonal position matrices D (M), D_s (M_s) and D_a (M_a)"""
    return (
        np.diag(geom.positions),
        np.diag(geom.subarray_offsets),
        np.diag(geom.element_offsets),
    )


def subarray_factors(geom: ArrayGeometry, theta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Factors a_s, a_a with kron(a_s, a_a) = a(theta)"""
    theta = check_direction(theta)
    phase = 2j * np.pi * math.sin(theta) / geom.wavelength
    return np.exp(phase * geom.subarray_offsets), np.exp(phase * geom.element_offsets)
