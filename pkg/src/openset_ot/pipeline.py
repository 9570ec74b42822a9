"""Two-step open-set adaptation: rejection, then label-shift on the survivors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import label_shift, rejection
from .errors import EmptySurvivorSetError, InvalidParameterError
from .metrics import REJECT
from .ot_core import DEFAULT_MAX_ITER, DEFAULT_TOL, Dataset, uniform

MARGINAL_MODES = ("uniform", "learned")


@dataclass(frozen=True)
class PipelineConfig:
    """One ``eta`` drives both steps; ``alpha`` only affects the rejection threshold."""

    eta: float = 0.001
    alpha: float = 1.0
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    normalize_cost: bool = False
    literal_clamp: bool = False
    update: str = "dual"

    def rejection_config(self) -> rejection.RejectionConfig:
        return rejection.RejectionConfig(
            eta=self.eta, alpha=self.alpha, tol=self.tol, max_iter=self.max_iter,
            normalize_cost=self.normalize_cost, literal_clamp=self.literal_clamp,
        )

    def label_shift_config(self) -> label_shift.LabelShiftConfig:
        return label_shift.LabelShiftConfig(
            eta=self.eta, tol=self.tol, max_iter=self.max_iter,
            normalize_cost=self.normalize_cost, update=self.update,
        )


@dataclass
class PipelineResult:
    rejection: rejection.RejectionResult
    labelshift: label_shift.LabelShiftResult
    final_labels: np.ndarray
    nu: np.ndarray
    # marginal handed to the label-shift step, over the kept targets
    survivor_marginal: np.ndarray

    @property
    def kept_indices(self) -> np.ndarray:
        return self.rejection.kept_indices


def survivor_marginal(rejected: rejection.RejectionResult, marginal_mode: str) -> np.ndarray:
    kept = rejected.kept_indices
    if marginal_mode == "uniform":
        return uniform(kept.shape[0])
    if marginal_mode == "learned":
        mass = rejected.mu_t_star[kept]
        return mass / mass.sum()
    raise InvalidParameterError(f"marginal_mode must be one of {MARGINAL_MODES}, got {marginal_mode!r}")


def open_set_adapt(source: Dataset, target: Dataset, cfg: PipelineConfig = PipelineConfig(),
                   marginal_mode: str = "learned") -> PipelineResult:
    """Reject unknown targets, then correct label shift on the remaining ones.

    With ``marginal_mode="learned"`` the rejection marginal restricted to the
    kept targets is renormalised and used as the label-shift target marginal.
    Returned labels are source class ids, or ``REJECT`` for rejected targets.
    """
    if marginal_mode not in MARGINAL_MODES:
        raise InvalidParameterError(f"marginal_mode must be one of {MARGINAL_MODES}, got {marginal_mode!r}")
    rej = rejection.reject(source, target, cfg.rejection_config())
    kept = rej.kept_indices
    if kept.size == 0:
        raise EmptySurvivorSetError("every target sample was rejected")
    mu_t = survivor_marginal(rej, marginal_mode)
    ls = label_shift.fit(source, target.subset(kept), mu_t, cfg.label_shift_config())
    final = np.full(target.n, REJECT, dtype=np.int64)
    final[kept] = ls.predicted_labels
    return PipelineResult(rejection=rej, labelshift=ls, final_labels=final, nu=ls.nu, survivor_marginal=mu_t)
