"""Models package"""
from .array import AnalogBeamformer, ArrayGeometry, BeamMode, DigitalCombiner
from .signal import AdcProfile, CandidateSet, QuantNoiseModel, SnapshotBlock, SourceTruth
from .analysis import ClosedFormIngredients, FisherReport, PowerBudget, PowerModel
from .experiment import ExperimentConfig, SweepAxis, ValidationReport, ValidationRequest
