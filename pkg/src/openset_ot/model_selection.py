"""Reverse validation of the rejection hyperparameters ``(eta, alpha)``.

For each grid point the forward rejection filters the target. The surviving
targets then act as the source of a backward rejection onto the original
source, run with the forward threshold. A configuration scores the fraction of
original source samples whose backward mass falls at or below that threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .ot_core import Dataset
from .rejection import RejectionConfig, reject

DEFAULT_ETAS = (0.001, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0)
DEFAULT_ALPHAS = (0.1, 1.0, 10.0)


@dataclass(frozen=True)
class Grid:
    etas: Sequence[float] = DEFAULT_ETAS
    alphas: Sequence[float] = DEFAULT_ALPHAS

    def __post_init__(self):
        object.__setattr__(self, "etas", tuple(float(e) for e in self.etas))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        for name in ("etas", "alphas"):
            values = getattr(self, name)
            if not values:
                raise InvalidParameterError(f"grid {name} must be nonempty")
            if not all(np.isfinite(v) and v > 0 for v in values):
                raise InvalidParameterError(f"grid {name} must be positive, got {values}")

    def configs(self) -> list:
        """Every ``(eta, alpha)`` pair, sorted so ties resolve to the smallest eta, then alpha."""
        return sorted({(e, a) for e in self.etas for a in self.alphas})


@dataclass(frozen=True)
class ConfigScore:
    eta: float
    alpha: float
    threshold: float
    forward_rejected: int
    backward_rejected: int | None  # None when the backward pass was skipped
    score: float
    degenerate: bool

    def as_dict(self) -> dict:
        return {
            "eta": self.eta,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "forward_rejected": self.forward_rejected,
            "backward_rejected": self.backward_rejected,
            "score": self.score,
            "degenerate": self.degenerate,
        }


@dataclass
class SelectionReport:
    scores: list = field(default_factory=list)
    chosen: tuple | None = None
    maximize: bool = False

    def as_dict(self) -> dict:
        return {
            "chosen": None if self.chosen is None else {"eta": self.chosen[0], "alpha": self.chosen[1]},
            "maximize": self.maximize,
            "scores": [s.as_dict() for s in self.scores],
        }


def score_config(source: Dataset, target: Dataset, cfg: RejectionConfig) -> ConfigScore:
    forward = reject(source, target, cfg)
    n_fwd = int(forward.rejected.sum())
    if forward.kept_indices.size == 0:
        return ConfigScore(cfg.eta, cfg.alpha, forward.threshold, n_fwd, None, 0.0, True)
    survivors = target.subset(forward.kept_indices)
    backward = reject(survivors, source, cfg, threshold_value=forward.threshold)
    n_bwd = int(backward.rejected.sum())
    return ConfigScore(cfg.eta, cfg.alpha, forward.threshold, n_fwd, n_bwd, n_bwd / source.n, False)


def reverse_validate(source: Dataset, target: Dataset, grid: Grid = Grid(),
                     base_cfg: RejectionConfig = RejectionConfig(), maximize: bool = False) -> SelectionReport:
    """Score every grid point and pick one among the non-degenerate ones.

    By default the configuration whose backward pass rejects the fewest source
    samples wins; ``maximize=True`` picks the largest score instead. Ties go to
    the smallest ``eta``, then the smallest ``alpha``, whatever the grid order.
    """
    scores = [score_config(source, target, replace(base_cfg, eta=eta, alpha=alpha))
              for eta, alpha in grid.configs()]
    report = SelectionReport(scores=scores, maximize=maximize)
    candidates = [s for s in scores if not s.degenerate]
    if candidates:
        sign = -1.0 if maximize else 1.0
        # min() keeps the first of equal keys, and scores are in tie-break order
        best = min(candidates, key=lambda s: sign * s.score)
        report.chosen = (best.eta, best.alpha)
    return report
