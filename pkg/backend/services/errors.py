"""
Error types raised by the DOA services
"""


class DoaError(ValueError):
    """Base class for domain errors; still a ValueError for callers that only catch that"""


class InvalidDirectionError(DoaError):
    """Source direction outside the open interval (-pi/2, pi/2)"""


class CoverageError(DoaError):
    """Too few subarrays for the coverage analog beamformer"""


class NoSourceError(DoaError):
    """Covariance carries no identifiable source"""


class UnboundedVarianceError(DoaError):
    """Fisher information is not positive, the bound is infinite"""


class ZeroPowerError(DoaError):
    """An RF chain has zero empirical power and cannot be normalized"""


class ConfigurationError(DoaError):
    """Experiment parameters are inconsistent with each other"""
