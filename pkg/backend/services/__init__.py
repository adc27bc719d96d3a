"""Services package"""
from .errors import (
    ConfigurationError,
    CoverageError,
    DoaError,
    InvalidDirectionError,
    NoSourceError,
    UnboundedVarianceError,
    ZeroPowerError,
)
from .experiment_service import ExperimentService
