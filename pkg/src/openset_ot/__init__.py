"""Entropic optimal transport for open-set domain adaptation.

Two solvers share one log-domain kernel engine: ``rejection`` learns the target
marginal to flag samples of unknown classes, ``label_shift`` learns the source
class proportions to correct class-prior mismatch. ``pipeline`` chains them.
"""

from .errors import (
    EmptySurvivorSetError,
    InvalidInputError,
    InvalidParameterError,
    IOFailureError,
    NumericalFailureError,
    OpenSetOTError,
    ParseError,
)
from .label_shift import LabelShiftConfig, LabelShiftResult, build_operator, fit
from .model_selection import Grid, SelectionReport, reverse_validate
from .ot_core import Dataset, DualPotentials, TransportPlan, cost_matrix, sinkhorn
from .pipeline import PipelineConfig, PipelineResult, open_set_adapt
from .rejection import RejectionConfig, RejectionResult, kkt_report, reject, threshold

__all__ = [
    "Dataset", "DualPotentials", "TransportPlan", "cost_matrix", "sinkhorn",
    "RejectionConfig", "RejectionResult", "reject", "threshold", "kkt_report",
    "LabelShiftConfig", "LabelShiftResult", "build_operator", "fit",
    "PipelineConfig", "PipelineResult", "open_set_adapt",
    "Grid", "SelectionReport", "reverse_validate",
    "OpenSetOTError", "InvalidInputError", "InvalidParameterError", "ParseError",
    "NumericalFailureError", "EmptySurvivorSetError", "IOFailureError",
]
